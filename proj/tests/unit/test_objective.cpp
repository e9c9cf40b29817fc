#include <corrkit/objective.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace corrkit;

namespace {

// Hand-rolled distribution from explicit entries on a 1x1 grid.
GtFlowDistribution single_cell(std::vector<DistributionEntry> entries)
{
    GtFlowDistribution::Cell cell;
    cell.entries = std::move(entries);
    cell.samples = 1;
    return {1, 1, 1, {cell}};
}

// Counting oracle for one patch: plain maps, no outer-product shortcut.
std::map<std::pair<int, int>, double> patch_oracle(const DisplacementField& f, int s, int pu, int pv)
{
    std::map<int, int> cu, cv;
    int n = 0;
    for (int v = pv * s; v < std::min(f.height(), (pv + 1) * s); ++v)
        for (int u = pu * s; u < std::min(f.width(), (pu + 1) * s); ++u) {
            if (!f.valid(u, v)) continue;
            ++n;
            ++cu[static_cast<int>(std::ceil(f.du(u, v) / s - 0.5))];
            ++cv[static_cast<int>(std::ceil(f.dv(u, v) / s - 0.5))];
        }
    std::map<std::pair<int, int>, double> out;
    for (auto [a, na] : cu)
        for (auto [b, nb] : cv) out[{a, b}] = static_cast<double>(na) * nb / (static_cast<double>(n) * n);
    return out;
}

TEST(Quantize, RoundingRule)
{
    EXPECT_EQ(quantize_offset(0.5), 0);
    EXPECT_EQ(quantize_offset(-0.5), -1);
    EXPECT_EQ(quantize_offset(1.5), 1);
    EXPECT_EQ(quantize_offset(0.51), 1);
    EXPECT_EQ(quantize_offset(-2.49), -2);
}

TEST(GtDistribution, WorkedMarginalExample)
{
    // patch 2: u offsets {0,0,1,0}, v offsets {0,0,0,1} at the low-res grid
    const DisplacementField f(2, 2, {0, 0, 2, 0}, {0, 0, 0, 2}, {1, 1, 1, 1});
    const auto g = quantize_gt_distribution(f, 2);
    ASSERT_EQ(g.width(), 1);
    std::map<std::pair<int, int>, double> got;
    for (const auto& e : g.at(0, 0)) got[{e.f.du, e.f.dv}] = e.p;
    ASSERT_EQ(got.size(), 4u);
    EXPECT_EQ((got[{0, 0}]), 0.5625);
    EXPECT_EQ((got[{1, 0}]), 0.1875);
    EXPECT_EQ((got[{0, 1}]), 0.1875);
    EXPECT_EQ((got[{1, 1}]), 0.0625);
    const auto& c = g.cell(0, 0);
    EXPECT_EQ(c.samples, 4);
    ASSERT_EQ(c.u_marginal.size(), 2u);
    EXPECT_EQ(c.u_marginal[0].offset, 0);
    EXPECT_EQ(c.u_marginal[0].count, 3);
}

TEST(GtDistribution, UnanimousPatchIsDelta)
{
    const auto f = make_displacement_field(4, 4, Displacement{6.2, -3.9});
    const auto g = quantize_gt_distribution(f, 4);
    ASSERT_EQ(g.at(0, 0).size(), 1u);
    EXPECT_EQ(g.at(0, 0)[0].p, 1.0);
    EXPECT_EQ(g.at(0, 0)[0].f, (Offset{2, -1}));
}

TEST(GtDistribution, EmptyPatchAndClippedTrailing)
{
    std::vector<std::uint8_t> m(5 * 3, 1);
    for (int v = 0; v < 2; ++v)
        for (int u = 0; u < 2; ++u) m[v * 5 + u] = 0;
    const DisplacementField f(5, 3, std::vector<double>(15, 1.0), std::vector<double>(15, 0.0), m);
    const auto g = quantize_gt_distribution(f, 2);
    EXPECT_EQ(g.width(), 3);
    EXPECT_EQ(g.height(), 2);
    EXPECT_TRUE(g.empty(0, 0));
    EXPECT_EQ(g.cell(2, 1).samples, 1);
    EXPECT_EQ(g.nonempty_count(), 5u);
}

TEST(GtDistribution, MatchesCountingOracleAndSumsToOne)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int s = 2 + trial % 3;
        const auto f = oracle::random_field(13, 11, rng, 3.0 * s, 0.2);
        const auto g = quantize_gt_distribution(f, s);
        for (int pv = 0; pv < g.height(); ++pv)
            for (int pu = 0; pu < g.width(); ++pu) {
                const auto want = patch_oracle(f, s, pu, pv);
                const auto got = g.at(pu, pv);
                ASSERT_EQ(got.size(), want.size());
                double sum = 0;
                for (const auto& e : got) {
                    sum += e.p;
                    EXPECT_NEAR(e.p, (want.at({e.f.du, e.f.dv})), 1e-15);
                }
                if (!got.empty()) EXPECT_NEAR(sum, 1.0, 1e-9);
                for (std::size_t i = 1; i < got.size(); ++i)
                    EXPECT_TRUE(std::pair(got[i - 1].f.dv, got[i - 1].f.du) < std::pair(got[i].f.dv, got[i].f.du));
            }
    }
}

TEST(GtDistribution, RejectsBadPatch)
{
    const auto f = make_displacement_field(2, 2, Displacement{});
    EXPECT_THROW(quantize_gt_distribution(f, 0), ArgumentError);
}

TEST(InfoNce, UniformScoresGiveLogN)
{
    for (int n : {2, 4, 16}) {
        const ScoreVolume vol(1, 1, ProposalSet::disparity_range(n), std::vector<double>(n, 0.3));
        for (double tau : {0.07, 1.0, 5.0}) {
            const auto r = info_nce_loss(vol, single_cell({{Offset{-1, 0}, 1.0}}), {tau});
            EXPECT_NEAR(r.loss, std::log(static_cast<double>(n)), 1e-12);
        }
    }
}

TEST(InfoNce, SharpPeak)
{
    const ScoreVolume vol(1, 1, ProposalSet::disparity_range(4), {0, 0, 1, 0});
    const auto r = info_nce_loss(vol, single_cell({{Offset{-2, 0}, 1.0}}), {0.07});
    const double expect = std::log1p(3.0 * std::exp(-1.0 / 0.07));
    EXPECT_NEAR(r.loss, expect, 1e-15);
    EXPECT_NEAR(r.loss / expect, 1.0, 1e-9);
}

TEST(InfoNce, ExtremeLogitsStayFinite)
{
    const ScoreVolume vol(1, 1, ProposalSet::disparity_range(3), {1, -1, -1});
    const auto r = info_nce_loss(vol, single_cell({{Offset{-1, 0}, 1.0}}), {1e-4});
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_NEAR(r.loss, 2.0 / 1e-4, 1e-6);
}

struct Problem {
    ScoreVolume volume;
    GtFlowDistribution target;
};

Problem random_problem(std::mt19937_64& rng)
{
    const int s = 2;
    // |flow| <= s keeps every quantized offset inside the radius-1 window
    const auto f = oracle::random_field(8, 6, rng, s, 0.1);
    auto target = quantize_gt_distribution(f, s);
    const auto props = ProposalSet::window(1);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> scores(static_cast<std::size_t>(target.width()) * target.height() * props.size());
    for (auto& x : scores) x = U(rng);
    return {ScoreVolume(target.width(), target.height(), props, scores), std::move(target)};
}

TEST(InfoNce, GradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> T(0.05, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto [vol, target] = random_problem(rng);
        const LossConfig cfg{T(rng)};
        const auto r = info_nce_loss(vol, target, cfg);
        const double h = 1e-4;
        std::vector<double> fd(r.gradient.size());
        for (std::size_t i = 0; i < fd.size(); ++i) {
            auto plus = std::vector<double>(vol.data().begin(), vol.data().end());
            auto minus = plus;
            plus[i] += h;
            minus[i] -= h;
            const double lp = info_nce_loss(ScoreVolume(vol.width(), vol.height(), vol.proposals(), plus), target, cfg).loss;
            const double lm = info_nce_loss(ScoreVolume(vol.width(), vol.height(), vol.proposals(), minus), target, cfg).loss;
            fd[i] = (lp - lm) / (2 * h);
        }
        double num = 0, den = 0;
        for (std::size_t i = 0; i < fd.size(); ++i) {
            num = std::max(num, std::abs(fd[i] - r.gradient[i]));
            den = std::max(den, std::abs(fd[i]));
        }
        EXPECT_LT(num / den, 1e-5) << "trial " << trial << " tau " << cfg.temperature;
    }
}

TEST(InfoNce, GradientRowsSumToZero)
{
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 10; ++trial) {
        const auto [vol, target] = random_problem(rng);
        const auto r = info_nce_loss(vol, target);
        for (int v = 0; v < vol.height(); ++v)
            for (int u = 0; u < vol.width(); ++u) {
                double s = 0;
                for (std::size_t k = 0; k < vol.depth(); ++k)
                    s += r.gradient[(static_cast<std::size_t>(v) * vol.width() + u) * vol.depth() + k];
                EXPECT_LT(std::abs(s), 1e-10);
            }
    }
}

TEST(InfoNce, ShiftInvariance)
{
    std::mt19937_64 rng(43);
    const auto [vol, target] = random_problem(rng);
    std::vector<double> shifted(vol.data().begin(), vol.data().end());
    for (auto& x : shifted) x += 0.37;
    const auto a = info_nce_loss(vol, target);
    const auto b = info_nce_loss(ScoreVolume(vol.width(), vol.height(), vol.proposals(), shifted), target);
    EXPECT_NEAR(a.loss, b.loss, 1e-12);
}

TEST(InfoNce, MeanSkipsEmptyPixels)
{
    std::mt19937_64 rng(44);
    const auto [vol, target] = random_problem(rng);
    const auto r = info_nce_loss(vol, target);
    EXPECT_EQ(r.pixel_count, target.nonempty_count());
    double s = 0;
    for (double x : r.per_pixel) s += x;
    EXPECT_NEAR(r.loss, s / static_cast<double>(r.pixel_count), 1e-12);
}

TEST(InfoNce, ArgumentErrors)
{
    const ScoreVolume vol(1, 1, ProposalSet::disparity_range(4), {0, 0, 0, 0});
    const auto target = single_cell({{Offset{-1, 0}, 1.0}});
    EXPECT_THROW(info_nce_loss(vol, target, {0.0}), ArgumentError);
    EXPECT_THROW(info_nce_loss(vol, target, {-1.0}), ArgumentError);
    EXPECT_THROW(info_nce_loss(vol, single_cell({{Offset{-7, 0}, 1.0}})), ArgumentError);
    EXPECT_THROW(info_nce_loss(vol, GtFlowDistribution(2, 1, 1, std::vector<GtFlowDistribution::Cell>(2))),
                 ArgumentError);
}

TEST(PairwiseSum, Exactness)
{
    std::vector<double> v(1000, 0.1);
    EXPECT_NEAR(pairwise_sum(v), 100.0, 1e-12);
    EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

} // namespace
