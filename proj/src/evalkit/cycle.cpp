#include <corrkit/evalkit.hpp>

#include <cmath>

namespace corrkit {

namespace {

struct Sample {
    double du, dv;
    bool ok;
};

// Bilinear lookup of bwd at (x, y). Written as nested lerps so a constant
// field samples back to exactly that constant.
Sample sample_bilinear(const DisplacementField& f, double x, double y)
{
    if (!(x >= 0.0 && y >= 0.0 && x <= f.width() - 1 && y <= f.height() - 1)) {
        return {0.0, 0.0, false};
    }
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double ax = x - x0;
    const double ay = y - y0;
    const int x1 = ax > 0.0 ? x0 + 1 : x0;
    const int y1 = ay > 0.0 ? y0 + 1 : y0;
    // corners that carry zero weight are not consulted
    if (!f.valid(x0, y0) || !f.valid(x1, y0) || !f.valid(x0, y1) || !f.valid(x1, y1)) {
        return {0.0, 0.0, false};
    }
    auto lerp2 = [&](auto get) {
        const double top = get(x0, y0) + ax * (get(x1, y0) - get(x0, y0));
        const double bot = get(x0, y1) + ax * (get(x1, y1) - get(x0, y1));
        return top + ay * (bot - top);
    };
    return {lerp2([&](int u, int v) { return f.du(u, v); }), lerp2([&](int u, int v) { return f.dv(u, v); }), true};
}

} // namespace

ConfidenceMap cycle_consistency(const DisplacementField& fwd, const DisplacementField& bwd, const CycleOptions& options)
{
    if (!(options.tau_c >= 0.0)) {
        throw ArgumentError("cycle_consistency: tau_c must be >= 0");
    }
    std::vector<double> conf(fwd.size(), 0.0);
    for (int v = 0; v < fwd.height(); ++v) {
        for (int u = 0; u < fwd.width(); ++u) {
            if (!fwd.valid(u, v)) {
                continue;
            }
            const double fu = fwd.du(u, v);
            const double fv = fwd.dv(u, v);
            const Sample b = sample_bilinear(bwd, u + fu, v + fv);
            if (!b.ok) {
                continue;
            }
            const double r = std::hypot(fu + b.du, fv + b.dv);
            const double limit = options.relative ? options.tau_c * std::max(1.0, std::hypot(fu, fv)) : options.tau_c;
            conf[fwd.index(u, v)] = r <= limit ? 1.0 : 0.0;
        }
    }
    return {fwd.width(), fwd.height(), std::move(conf)};
}

MatchSet extract_matches(const DisplacementField& flow, const ConfidenceMap& confidence, int stride,
                         int target_width, int target_height, double min_confidence)
{
    if (stride < 1) {
        throw ArgumentError("extract_matches: stride must be >= 1");
    }
    if (confidence.width() != flow.width() || confidence.height() != flow.height()) {
        throw ArgumentError("extract_matches: confidence map and flow differ in size");
    }
    if (target_width < 1 || target_height < 1) {
        throw ArgumentError("extract_matches: target size must be positive");
    }
    std::vector<Match> out;
    for (int v = 0; v < flow.height(); v += stride) {
        for (int u = 0; u < flow.width(); u += stride) {
            const double c = confidence.at(u, v);
            if (!flow.valid(u, v) || !(c >= min_confidence) || c <= 0.0) {
                continue;
            }
            const double u2 = u + flow.du(u, v);
            const double v2 = v + flow.dv(u, v);
            if (u2 < 0.0 || v2 < 0.0 || u2 > target_width - 1 || v2 > target_height - 1) {
                continue;
            }
            out.push_back({static_cast<double>(u), static_cast<double>(v), u2, v2, c});
        }
    }
    return MatchSet(std::move(out), flow.width(), flow.height(), target_width, target_height);
}

MatchSet extract_matches(const DisplacementField& flow, const ConfidenceMap& confidence, int stride)
{
    return extract_matches(flow, confidence, stride, flow.width(), flow.height());
}

} // namespace corrkit
