#include <corrkit/objective.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace corrkit {

GtFlowDistribution::GtFlowDistribution(int width, int height, int patch, std::vector<Cell> cells)
    : width_(width), height_(height), patch_(patch), cells_(std::move(cells))
{
    if (width < 1 || height < 1 || patch < 1) {
        throw ArgumentError("GtFlowDistribution: dimensions and patch must be >= 1");
    }
    if (cells_.size() != static_cast<std::size_t>(width) * height) {
        throw ArgumentError("GtFlowDistribution: cell count mismatch");
    }
}

std::size_t GtFlowDistribution::nonempty_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return !c.entries.empty(); }));
}

int quantize_offset(double x) noexcept
{
    return static_cast<int>(std::ceil(x - 0.5));
}

GtFlowDistribution quantize_gt_distribution(const DisplacementField& flow, int patch)
{
    if (patch < 1) {
        throw ArgumentError("quantize_gt_distribution: patch size must be >= 1");
    }
    const int w = (flow.width() + patch - 1) / patch;
    const int h = (flow.height() + patch - 1) / patch;
    const double s = patch;
    std::vector<GtFlowDistribution::Cell> cells(static_cast<std::size_t>(w) * h);

    for (int pv = 0; pv < h; ++pv) {
        for (int pu = 0; pu < w; ++pu) {
            std::map<int, int> u_counts, v_counts;
            int samples = 0;
            for (int v = pv * patch; v < std::min((pv + 1) * patch, flow.height()); ++v) {
                for (int u = pu * patch; u < std::min((pu + 1) * patch, flow.width()); ++u) {
                    if (!flow.valid(u, v)) {
                        continue;
                    }
                    ++u_counts[quantize_offset(flow.du(u, v) / s)];
                    ++v_counts[quantize_offset(flow.dv(u, v) / s)];
                    ++samples;
                }
            }
            auto& cell = cells[static_cast<std::size_t>(pv) * w + pu];
            cell.samples = samples;
            if (samples == 0) {
                continue;
            }
            for (const auto& [off, n] : u_counts) {
                cell.u_marginal.push_back({off, n});
            }
            for (const auto& [off, n] : v_counts) {
                cell.v_marginal.push_back({off, n});
            }
            const double total = static_cast<double>(samples) * samples;
            for (const auto& [fv, nv] : v_counts) {
                for (const auto& [fu, nu] : u_counts) {
                    cell.entries.push_back({{fu, fv}, static_cast<double>(nu) * nv / total});
                }
            }
        }
    }
    return {w, h, patch, std::move(cells)};
}

double pairwise_sum(std::span<const double> values) noexcept
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double x : values) {
            s += x;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

LossReport info_nce_loss(const ScoreVolume& scores, const GtFlowDistribution& target, const LossConfig& cfg)
{
    if (!(cfg.temperature > 0.0)) {
        throw ArgumentError("info_nce_loss: temperature must be > 0");
    }
    if (scores.width() != target.width() || scores.height() != target.height()) {
        throw ArgumentError("info_nce_loss: score volume and distribution grids differ");
    }
    const int w = scores.width();
    const int h = scores.height();
    const std::size_t depth = scores.depth();
    const double tau = cfg.temperature;
    const auto& proposals = scores.proposals();

    LossReport report;
    report.per_pixel.assign(static_cast<std::size_t>(w) * h, 0.0);
    report.counted.assign(static_cast<std::size_t>(w) * h, 0);
    report.gradient.assign(scores.data().size(), 0.0);

    std::vector<double> log_q(depth);
    std::vector<double> p(depth);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const auto entries = target.at(u, v);
            if (entries.empty()) {
                continue;
            }
            std::fill(p.begin(), p.end(), 0.0);
            for (const auto& e : entries) {
                const auto k = proposals.find(e.f);
                if (!k) {
                    throw ArgumentError("info_nce_loss: ground-truth offset (" + std::to_string(e.f.du) + ", "
                                        + std::to_string(e.f.dv) + ") at pixel (" + std::to_string(u) + ", "
                                        + std::to_string(v) + ") is outside the proposal set");
                }
                p[*k] += e.p;
            }

            const auto s = scores.scores_at(u, v);
            double mx = s[0];
            for (double x : s) {
                mx = std::max(mx, x);
            }
            const double m = mx / tau;
            double z = 0.0;
            for (std::size_t k = 0; k < depth; ++k) {
                z += std::exp(s[k] / tau - m);
            }
            const double lse = std::log(z);
            double loss = 0.0;
            for (std::size_t k = 0; k < depth; ++k) {
                log_q[k] = (s[k] / tau - m) - lse;
                if (p[k] != 0.0) {
                    loss -= p[k] * log_q[k];
                }
            }
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            report.per_pixel[i] = loss;
            report.counted[i] = 1;
            double* g = report.gradient.data() + i * depth;
            for (std::size_t k = 0; k < depth; ++k) {
                g[k] = (std::exp(log_q[k]) - p[k]) / tau;
            }
            ++report.pixel_count;
        }
    }

    if (report.pixel_count == 0) {
        return report;
    }
    std::vector<double> losses;
    losses.reserve(report.pixel_count);
    for (std::size_t i = 0; i < report.per_pixel.size(); ++i) {
        if (report.counted[i]) {
            losses.push_back(report.per_pixel[i]);
        }
    }
    const double n = static_cast<double>(report.pixel_count);
    report.loss = pairwise_sum(losses) / n;
    for (double& g : report.gradient) {
        g /= n;
    }
    return report;
}

} // namespace corrkit
