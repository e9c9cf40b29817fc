#include <corrkit/geometry.hpp>
#include <corrkit/random.hpp>

#include <cmath>
#include <limits>

namespace corrkit {

namespace {

int normalize_turns(int turns)
{
    if (turns < 0 || turns > 3) {
        throw ArgumentError("quarter turns must be in {0,1,2,3}, got " + std::to_string(turns));
    }
    return turns;
}

DisplacementField rotate_field_once(const DisplacementField& f)
{
    const int w = f.width();
    const int h = f.height();
    // New grid is h wide and w tall.
    const std::size_t n = f.size();
    std::vector<double> du(n), dv(n);
    Mask valid(n);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t src = f.index(u, v);
            const std::size_t dst = static_cast<std::size_t>(u) * h + (h - 1 - v);
            du[dst] = -f.dv_values()[src];
            dv[dst] = f.du_values()[src];
            valid[dst] = f.valid_at(src);
        }
    }
    return {h, w, std::move(du), std::move(dv), std::move(valid)};
}

Image rotate_image_once(const Image& img)
{
    const int w = img.width();
    const int h = img.height();
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            px[static_cast<std::size_t>(u) * h + (h - 1 - v)] = img.at(u, v);
        }
    }
    return {h, w, std::move(px)};
}

Image crop_rows(const Image& img, int first, int count)
{
    const auto begin = img.pixels().begin() + static_cast<std::ptrdiff_t>(first) * img.width();
    return {img.width(), count, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count) * img.width())};
}

} // namespace

void AugmentSpec::validate() const
{
    normalize_turns(rotate_quarter_turns);
}

AugmentSpec AugmentSpec::sample(std::uint64_t seed, int max_dy)
{
    if (max_dy < 0) {
        throw ArgumentError("AugmentSpec::sample: max_dy must be >= 0");
    }
    Rng rng(seed);
    AugmentSpec spec;
    spec.seed = seed;
    spec.rotate_quarter_turns = rng.integer(0, 3);
    spec.vertical_jitter_dy = rng.integer(-max_dy, max_dy);
    return spec;
}

DisplacementField shift_flow_vertical(const DisplacementField& field, double dy)
{
    if (!std::isfinite(dy)) {
        throw ArgumentError("shift_flow_vertical: dy must be finite");
    }
    std::vector<double> du(field.du_values().begin(), field.du_values().end());
    std::vector<double> dv(field.dv_values().begin(), field.dv_values().end());
    for (std::size_t i = 0; i < dv.size(); ++i) {
        if (field.valid_at(i)) {
            dv[i] -= dy;
        }
    }
    return {field.width(), field.height(), std::move(du), std::move(dv), field.mask()};
}

StereoSample augment_vertical_jitter(const StereoSample& sample, int dy, int margin)
{
    const int h = sample.left.height();
    if (margin < 0 || 2 * margin >= h) {
        throw ArgumentError("augment_vertical_jitter: crop margin must satisfy 0 <= 2*margin < height");
    }
    if (std::abs(dy) > margin) {
        throw ArgumentError("augment_vertical_jitter: |dy| = " + std::to_string(std::abs(dy))
                            + " exceeds the crop margin " + std::to_string(margin));
    }
    if (sample.right.height() != h || sample.flow.height() != h || sample.flow.width() != sample.left.width()) {
        throw ArgumentError("augment_vertical_jitter: views and flow must share one grid");
    }
    const int rows = h - 2 * margin;
    const int w = sample.flow.width();
    const auto first = static_cast<std::size_t>(margin) * w;
    const auto count = static_cast<std::size_t>(rows) * w;

    std::vector<double> du(sample.flow.du_values().begin() + first, sample.flow.du_values().begin() + first + count);
    std::vector<double> dv(sample.flow.dv_values().begin() + first, sample.flow.dv_values().begin() + first + count);
    Mask valid(sample.flow.mask().begin() + first, sample.flow.mask().begin() + first + count);
    for (std::size_t i = 0; i < count; ++i) {
        if (valid[i]) {
            dv[i] -= dy;
        }
    }
    return {crop_rows(sample.left, margin, rows), crop_rows(sample.right, margin + dy, rows),
            DisplacementField(w, rows, std::move(du), std::move(dv), std::move(valid))};
}

DisplacementField rotate_field_quarter(const DisplacementField& field, int turns)
{
    DisplacementField out = field;
    for (int t = normalize_turns(turns); t > 0; --t) {
        out = rotate_field_once(out);
    }
    return out;
}

Image rotate_image_quarter(const Image& image, int turns)
{
    Image out = image;
    for (int t = normalize_turns(turns); t > 0; --t) {
        out = rotate_image_once(out);
    }
    return out;
}

StereoSample augment_rotate_quarter(const StereoSample& sample, int turns)
{
    const auto same = [&](const Image& img) {
        return img.width() == sample.flow.width() && img.height() == sample.flow.height();
    };
    if (!same(sample.left) || !same(sample.right)) {
        throw ArgumentError("augment_rotate_quarter: views and flow must share one grid");
    }
    return {rotate_image_quarter(sample.left, turns), rotate_image_quarter(sample.right, turns),
            rotate_field_quarter(sample.flow, turns)};
}

DisplacementField apply_augment(const DisplacementField& field, const AugmentSpec& spec)
{
    spec.validate();
    return rotate_field_quarter(shift_flow_vertical(field, spec.vertical_jitter_dy), spec.rotate_quarter_turns);
}

} // namespace corrkit
