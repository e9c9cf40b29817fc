#include <corrkit/visuals.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace corrkit {

namespace {

// Segment lengths of the wheel: red-yellow, yellow-green, green-cyan,
// cyan-blue, blue-magenta, magenta-red.
constexpr std::array<int, 6> kSegments{15, 6, 4, 11, 13, 6};

std::vector<std::array<double, 3>> make_wheel()
{
    std::vector<std::array<double, 3>> wheel;
    auto ramp = [](int i, int n) { return 255.0 * i / n; };
    for (int i = 0; i < kSegments[0]; ++i) wheel.push_back({255, ramp(i, kSegments[0]), 0});
    for (int i = 0; i < kSegments[1]; ++i) wheel.push_back({255 - ramp(i, kSegments[1]), 255, 0});
    for (int i = 0; i < kSegments[2]; ++i) wheel.push_back({0, 255, ramp(i, kSegments[2])});
    for (int i = 0; i < kSegments[3]; ++i) wheel.push_back({0, 255 - ramp(i, kSegments[3]), 255});
    for (int i = 0; i < kSegments[4]; ++i) wheel.push_back({ramp(i, kSegments[4]), 0, 255});
    for (int i = 0; i < kSegments[5]; ++i) wheel.push_back({255, 0, 255 - ramp(i, kSegments[5])});
    return wheel;
}

std::uint16_t to_byte(double x)
{
    return static_cast<std::uint16_t>(std::clamp(std::lround(x), 0L, 255L));
}

} // namespace

PngImage flow_to_color(const DisplacementField& flow, double max_radius)
{
    static const auto wheel = make_wheel();
    const int ncols = static_cast<int>(wheel.size());

    double rmax = max_radius;
    if (!(rmax > 0.0)) {
        rmax = 0.0;
        for (std::size_t i = 0; i < flow.size(); ++i) {
            if (flow.valid_at(i)) {
                rmax = std::max(rmax, std::hypot(flow.du_values()[i], flow.dv_values()[i]));
            }
        }
    }
    if (!(rmax > 0.0)) {
        rmax = 1.0;
    }

    PngImage img{flow.width(), flow.height(), 3, 8, std::vector<std::uint16_t>(flow.size() * 3, 0)};
    for (std::size_t i = 0; i < flow.size(); ++i) {
        if (!flow.valid_at(i)) {
            continue;
        }
        const double fu = flow.du_values()[i] / rmax;
        const double fv = flow.dv_values()[i] / rmax;
        const double rad = std::hypot(fu, fv);
        const double a = std::atan2(-fv, -fu) / std::numbers::pi;
        const double fk = (a + 1.0) / 2.0 * (ncols - 1);
        const int k0 = static_cast<int>(std::floor(fk));
        const int k1 = (k0 + 1) % ncols;
        const double f = fk - k0;
        for (int c = 0; c < 3; ++c) {
            double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
            col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
            img.samples[i * 3 + c] = to_byte(255.0 * col);
        }
    }
    return img;
}

PngImage heatmap(int width, int height, std::span<const double> values, double lo, double hi)
{
    if (width < 1 || height < 1 || values.size() != static_cast<std::size_t>(width) * height) {
        throw ArgumentError("heatmap: size mismatch");
    }
    if (lo == hi) {
        bool any = false;
        for (double x : values) {
            if (!std::isfinite(x)) {
                continue;
            }
            lo = any ? std::min(lo, x) : x;
            hi = any ? std::max(hi, x) : x;
            any = true;
        }
    }
    const double span = hi > lo ? hi - lo : 1.0;
    PngImage img{width, height, 1, 8, std::vector<std::uint16_t>(values.size(), 0)};
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isfinite(values[i])) {
            img.samples[i] = to_byte(255.0 * (std::clamp(values[i], lo, hi) - lo) / span);
        }
    }
    return img;
}

PngImage confidence_to_png(const ConfidenceMap& confidence)
{
    return heatmap(confidence.width(), confidence.height(), confidence.values(), 0.0, 1.0);
}

} // namespace corrkit
