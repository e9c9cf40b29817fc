#include <corrkit/evalkit.hpp>
#include <corrkit/random.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace corrkit {

namespace {

// sigma_8 / sigma_1 of the 9-column design matrix below this means the null
// space is at least 2-dimensional.
constexpr double kDegenerateRatio = 1e-10;
constexpr int kRefitRounds = 10;

struct Normalizer {
    Eigen::Matrix3d T;
    bool ok;
};

// Hartley: centroid to origin, mean distance sqrt(2).
template <typename Get>
Normalizer hartley(std::span<const Match> ms, Get get)
{
    double cx = 0.0, cy = 0.0;
    for (const auto& m : ms) {
        const auto [x, y] = get(m);
        cx += x;
        cy += y;
    }
    const double n = static_cast<double>(ms.size());
    cx /= n;
    cy /= n;
    double mean_dist = 0.0;
    for (const auto& m : ms) {
        const auto [x, y] = get(m);
        mean_dist += std::hypot(x - cx, y - cy);
    }
    mean_dist /= n;
    if (!(mean_dist > 1e-12)) {
        return {Eigen::Matrix3d::Identity(), false};
    }
    const double s = std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d T;
    T << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
    return {T, true};
}

bool has_coincident(std::span<const Match> ms)
{
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t j = i + 1; j < ms.size(); ++j) {
            if ((ms[i].u1 == ms[j].u1 && ms[i].v1 == ms[j].v1) || (ms[i].u2 == ms[j].u2 && ms[i].v2 == ms[j].v2)) {
                return true;
            }
        }
    }
    return false;
}

Eigen::Matrix3d normalize_sign(Eigen::Matrix3d F)
{
    F /= F.norm();
    Eigen::Index r = 0, c = 0;
    F.cwiseAbs().maxCoeff(&r, &c);
    if (F(r, c) < 0.0) {
        F = -F;
    }
    return F;
}

} // namespace

FundamentalMatrix FundamentalMatrix::from_matrix(const Eigen::Matrix3d& F)
{
    if (!F.allFinite() || !(F.norm() > 0.0)) {
        throw ArgumentError("FundamentalMatrix: matrix must be finite and nonzero");
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d sv = svd.singularValues();
    sv(2) = 0.0;
    const Eigen::Matrix3d r2 = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
    if (!(r2.norm() > 0.0)) {
        throw ArgumentError("FundamentalMatrix: rank below 2");
    }
    return FundamentalMatrix(normalize_sign(r2));
}

double sampson_distance(const Eigen::Matrix3d& F, const Match& m) noexcept
{
    const Eigen::Vector3d x1(m.u1, m.v1, 1.0);
    const Eigen::Vector3d x2(m.u2, m.v2, 1.0);
    const Eigen::Vector3d Fx1 = F * x1;
    const Eigen::Vector3d Ftx2 = F.transpose() * x2;
    const double num = std::abs(x2.dot(Fx1));
    const double den = std::sqrt(Fx1(0) * Fx1(0) + Fx1(1) * Fx1(1) + Ftx2(0) * Ftx2(0) + Ftx2(1) * Ftx2(1));
    if (den == 0.0) {
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return num / den;
}

FundamentalMatrix eight_point(std::span<const Match> matches)
{
    if (matches.size() < 8) {
        throw EstimationError("eight_point: need at least 8 matches, got " + std::to_string(matches.size()));
    }
    const auto n1 = hartley(matches, [](const Match& m) { return std::pair{m.u1, m.v1}; });
    const auto n2 = hartley(matches, [](const Match& m) { return std::pair{m.u2, m.v2}; });
    if (!n1.ok || !n2.ok) {
        throw EstimationError("eight_point: coincident points");
    }
    Eigen::MatrixXd A(matches.size(), 9);
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const Eigen::Vector3d p = n1.T * Eigen::Vector3d(matches[i].u1, matches[i].v1, 1.0);
        const Eigen::Vector3d q = n2.T * Eigen::Vector3d(matches[i].u2, matches[i].v2, 1.0);
        // x2^T F x1 = sum_ij q_i F_ij p_j, F row-major
        A.row(static_cast<Eigen::Index>(i)) << q(0) * p(0), q(0) * p(1), q(0), q(1) * p(0), q(1) * p(1), q(1), p(0),
            p(1), 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(7) / sv(0) < kDegenerateRatio) {
        throw EstimationError("eight_point: degenerate configuration");
    }
    const Eigen::VectorXd f = svd.matrixV().col(8);
    Eigen::Matrix3d Fn;
    Fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

    // rank 2 in normalized coordinates, then undo the normalization
    Eigen::JacobiSVD<Eigen::Matrix3d> s3(Fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector3d d = s3.singularValues();
    d(2) = 0.0;
    Fn = s3.matrixU() * d.asDiagonal() * s3.matrixV().transpose();
    const Eigen::Matrix3d F = n2.T.transpose() * Fn * n1.T;
    return FundamentalMatrix::from_matrix(F);
}

FundamentalEstimate estimate_fundamental(const MatchSet& matches, const RansacParams& params)
{
    const std::size_t n = matches.size();
    if (n < 8) {
        throw EstimationError("estimate_fundamental: need at least 8 matches, got " + std::to_string(n));
    }
    if (params.iterations < 1 || !(params.inlier_tau > 0.0)) {
        throw ArgumentError("estimate_fundamental: iterations must be >= 1 and inlier_tau > 0");
    }
    const auto& all = matches.matches();

    auto score = [&](const Eigen::Matrix3d& F, Mask& mask) {
        mask.assign(n, 0);
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sampson_distance(F, all[i]) <= params.inlier_tau) {
                mask[i] = 1;
                ++count;
            }
        }
        return count;
    };

    Rng rng(params.seed);
    std::optional<FundamentalMatrix> best;
    Mask best_mask, mask;
    std::size_t best_count = 0;
    int degenerate = 0;
    std::array<Match, 8> sample{};
    std::array<std::size_t, 8> idx{};

    for (int it = 0; it < params.iterations; ++it) {
        // 8 distinct indices
        for (std::size_t k = 0; k < 8; ++k) {
            bool fresh;
            do {
                idx[k] = static_cast<std::size_t>(rng.below(n));
                fresh = std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx[k])
                        == idx.begin() + static_cast<std::ptrdiff_t>(k);
            } while (!fresh);
            sample[k] = all[idx[k]];
        }
        if (has_coincident(sample)) {
            ++degenerate;
            continue;
        }
        std::optional<FundamentalMatrix> F;
        try {
            F = eight_point(sample);
        } catch (const EstimationError&) {
            ++degenerate;
            continue;
        }
        const std::size_t count = score(F->matrix(), mask);
        if (!best || count > best_count) {
            best_count = count;
            best = *F;
            best_mask = mask;
        }
    }
    if (!best) {
        throw EstimationError("estimate_fundamental: every sample was degenerate");
    }

    // least-squares refit on the inlier set until it stops growing
    for (int round = 0; round < kRefitRounds && best_count >= 8; ++round) {
        std::vector<Match> inl;
        inl.reserve(best_count);
        for (std::size_t i = 0; i < n; ++i) {
            if (best_mask[i]) {
                inl.push_back(all[i]);
            }
        }
        std::optional<FundamentalMatrix> F;
        try {
            F = eight_point(inl);
        } catch (const EstimationError&) {
            break;
        }
        const std::size_t count = score(F->matrix(), mask);
        if (count < best_count) {
            break;
        }
        const bool same = mask == best_mask;
        best = *F;
        best_mask = mask;
        best_count = count;
        if (same) {
            break;
        }
    }
    return {*best, std::move(best_mask), best_count, degenerate};
}

MetricReport maa_epipolar(const MatchSet& gt_matches, const FundamentalMatrix& F, int max_threshold)
{
    if (gt_matches.empty()) {
        throw EvaluationError("maa_epipolar: empty match set");
    }
    if (max_threshold < 1) {
        throw ArgumentError("maa_epipolar: max_threshold must be >= 1");
    }
    const auto& ms = gt_matches.matches();
    std::vector<double> dist(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
        dist[i] = sampson_distance(F.matrix(), ms[i]);
    }
    double acc_sum = 0.0;
    for (int t = 1; t <= max_threshold; ++t) {
        double hits = 0.0;
        for (double d : dist) {
            hits += d < t ? 1.0 : 0.0;
        }
        acc_sum += hits / static_cast<double>(ms.size());
    }
    return {"maa_" + std::to_string(max_threshold), 100.0 * acc_sum / max_threshold, Unit::Percent, ms.size()};
}

} // namespace corrkit
