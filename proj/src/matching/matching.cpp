#include <corrkit/matching.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace corrkit {

// ---------------------------------------------------------------------------
// ProposalSet

ProposalSet::ProposalSet(ProposalKind kind, int du_min, int du_max, int dv_min, int dv_max)
    : kind_(kind), du_min_(du_min), du_max_(du_max), dv_min_(dv_min), dv_max_(dv_max)
{
    if (du_min > du_max || dv_min > dv_max) {
        throw ArgumentError("ProposalSet: empty offset range");
    }
    if (kind == ProposalKind::DisparityRange) {
        for (int d = 0; d <= -du_min; ++d) {
            offsets_.push_back({-d, 0});
        }
    } else {
        for (int dv = dv_min; dv <= dv_max; ++dv) {
            for (int du = du_min; du <= du_max; ++du) {
                offsets_.push_back({du, dv});
            }
        }
    }
    rank_.resize(offsets_.size());
    std::iota(rank_.begin(), rank_.end(), std::size_t{0});
    std::stable_sort(rank_.begin(), rank_.end(), [this](std::size_t a, std::size_t b) {
        const Offset& fa = offsets_[a];
        const Offset& fb = offsets_[b];
        const long na = long(fa.du) * fa.du + long(fa.dv) * fa.dv;
        const long nb = long(fb.du) * fb.du + long(fb.dv) * fb.dv;
        if (na != nb) {
            return na < nb;
        }
        return fa < fb;
    });
}

ProposalSet ProposalSet::disparity_range(int levels)
{
    if (levels < 1) {
        throw ArgumentError("ProposalSet::disparity_range: need at least one level");
    }
    return {ProposalKind::DisparityRange, -(levels - 1), 0, 0, 0};
}

ProposalSet ProposalSet::full_2d(int width, int height)
{
    if (width < 1 || height < 1) {
        throw ArgumentError("ProposalSet::full_2d: dimensions must be >= 1");
    }
    return {ProposalKind::Full2d, -(width - 1), width - 1, -(height - 1), height - 1};
}

ProposalSet ProposalSet::window(int radius)
{
    if (radius < 0) {
        throw ArgumentError("ProposalSet::window: radius must be >= 0");
    }
    return {ProposalKind::Window, -radius, radius, -radius, radius};
}

ProposalSet ProposalSet::rectangle(ProposalKind kind, int du_min, int du_max, int dv_min, int dv_max)
{
    if (kind == ProposalKind::DisparityRange && (du_max != 0 || dv_min != 0 || dv_max != 0)) {
        throw ArgumentError("ProposalSet::rectangle: disparity sets are (-d, 0) for d >= 0");
    }
    return {kind, du_min, du_max, dv_min, dv_max};
}

std::optional<std::size_t> ProposalSet::find(Offset f) const noexcept
{
    if (f.du < du_min_ || f.du > du_max_ || f.dv < dv_min_ || f.dv > dv_max_) {
        return std::nullopt;
    }
    if (kind_ == ProposalKind::DisparityRange) {
        return static_cast<std::size_t>(-f.du);
    }
    return static_cast<std::size_t>(f.dv - dv_min_) * static_cast<std::size_t>(du_max_ - du_min_ + 1)
           + static_cast<std::size_t>(f.du - du_min_);
}

// ---------------------------------------------------------------------------
// ScoreVolume

ScoreVolume::ScoreVolume(int width, int height, ProposalSet proposals, std::vector<double> scores)
    : width_(width), height_(height), proposals_(std::move(proposals)), scores_(std::move(scores))
{
    if (width < 1 || height < 1) {
        throw ArgumentError("ScoreVolume: dimensions must be >= 1");
    }
    if (scores_.size() != static_cast<std::size_t>(width) * height * proposals_.size()) {
        throw ArgumentError("ScoreVolume: score buffer does not match grid x proposals");
    }
    for (double s : scores_) {
        if (!std::isfinite(s)) {
            throw ValidationError("ScoreVolume: non-finite score");
        }
    }
}

// ---------------------------------------------------------------------------

FeatureMap census_descriptor(const Image& image, int window)
{
    if (window < 3 || window % 2 == 0) {
        throw ArgumentError("census_descriptor: window must be odd and >= 3, got " + std::to_string(window));
    }
    const int r = window / 2;
    const int channels = window * window - 1;
    const int w = image.width();
    const int h = image.height();
    std::vector<double> data(static_cast<std::size_t>(w) * h * channels);
    auto* out = data.data();
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const double center = image.at(u, v);
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx == 0 && dy == 0) {
                        continue;
                    }
                    *out++ = image.at_clamped(u + dx, v + dy) >= center ? 1.0 : -1.0;
                }
            }
        }
    }
    return {w, h, channels, std::move(data)};
}

namespace {

std::vector<double> normalized_features(const FeatureMap& f)
{
    const auto c = static_cast<std::size_t>(f.channels());
    std::vector<double> out(f.data().begin(), f.data().end());
    for (std::size_t p = 0; p < out.size(); p += c) {
        double sq = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            sq += out[p + i] * out[p + i];
        }
        const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            out[p + i] *= inv;
        }
    }
    return out;
}

} // namespace

ScoreVolume cosine_score_volume(const FeatureMap& ref, const FeatureMap& tar, const ProposalSet& proposals)
{
    if (ref.channels() != tar.channels()) {
        throw ArgumentError("cosine_score_volume: channel mismatch (" + std::to_string(ref.channels()) + " vs "
                            + std::to_string(tar.channels()) + ")");
    }
    if (ref.width() != tar.width() || ref.height() != tar.height()) {
        throw ArgumentError("cosine_score_volume: grid size mismatch");
    }
    const int w = ref.width();
    const int h = ref.height();
    const auto c = static_cast<std::size_t>(ref.channels());
    const std::vector<double> a = normalized_features(ref);
    const std::vector<double> b = normalized_features(tar);
    const std::size_t depth = proposals.size();

    std::vector<double> scores(static_cast<std::size_t>(w) * h * depth);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const double* fa = a.data() + (static_cast<std::size_t>(v) * w + u) * c;
            double* out = scores.data() + (static_cast<std::size_t>(v) * w + u) * depth;
            for (std::size_t k = 0; k < depth; ++k) {
                const int tu = u + proposals[k].du;
                const int tv = v + proposals[k].dv;
                if (tu < 0 || tv < 0 || tu >= w || tv >= h) {
                    out[k] = kOutOfBoundsScore;
                    continue;
                }
                const double* fb = b.data() + (static_cast<std::size_t>(tv) * w + tu) * c;
                double s = 0.0;
                for (std::size_t i = 0; i < c; ++i) {
                    s += fa[i] * fb[i];
                }
                out[k] = s;
            }
        }
    }
    return {w, h, proposals, std::move(scores)};
}

namespace {

std::size_t winner(std::span<const double> scores, std::span<const std::size_t> rank)
{
    std::size_t best = rank[0];
    for (std::size_t k : rank.subspan(1)) {
        if (scores[k] > scores[best]) {
            best = k;
        }
    }
    return best;
}

} // namespace

DisplacementField argmax_regress(const ScoreVolume& volume)
{
    const int w = volume.width();
    const int h = volume.height();
    const auto& props = volume.proposals();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> du(n), dv(n);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const Offset f = props[winner(volume.scores_at(u, v), props.rank())];
            du[static_cast<std::size_t>(v) * w + u] = f.du;
            dv[static_cast<std::size_t>(v) * w + u] = f.dv;
        }
    }
    return {w, h, std::move(du), std::move(dv), Mask(n, 1)};
}

DisparityMap argmax_disparity(const ScoreVolume& volume)
{
    if (volume.proposals().kind() != ProposalKind::DisparityRange) {
        throw ArgumentError("argmax_disparity: volume is not over a disparity range");
    }
    const int w = volume.width();
    const int h = volume.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> d(n);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            d[static_cast<std::size_t>(v) * w + u] =
                static_cast<double>(winner(volume.scores_at(u, v), volume.proposals().rank()));
        }
    }
    return {w, h, std::move(d), Mask(n, 1)};
}

// ---------------------------------------------------------------------------

namespace {

struct Lerp {
    int i0;
    int i1;
    double t;
};

// Pixel-center aligned source coordinate for output index x at factor k.
Lerp spatial_lerp(int x, int k, int size)
{
    const double src = std::clamp((x + 0.5) / k - 0.5, 0.0, static_cast<double>(size - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, size - 1);
    return {i0, i1, src - i0};
}

// Source index along a proposal axis of length `size` for output index x.
Lerp axis_lerp(int x, int k, int size)
{
    const int i0 = x / k;
    const int rem = x % k;
    if (rem == 0 || i0 + 1 >= size) {
        return {std::min(i0, size - 1), std::min(i0, size - 1), 0.0};
    }
    return {i0, i0 + 1, static_cast<double>(rem) / k};
}

} // namespace

ScoreVolume upsample_volume_trilinear(const ScoreVolume& volume, int k)
{
    if (k < 1) {
        throw ArgumentError("upsample_volume_trilinear: factor must be >= 1");
    }
    const auto& in_props = volume.proposals();
    const ProposalSet out_props =
        ProposalSet::rectangle(in_props.kind(), in_props.du_min() * k, in_props.du_max() * k, in_props.dv_min() * k,
                               in_props.dv_max() * k);
    const int w = volume.width();
    const int h = volume.height();
    const int ow = w * k;
    const int oh = h * k;
    const std::size_t in_depth = in_props.size();
    const std::size_t out_depth = out_props.size();

    // Proposal-axis layout: disparity sets index by d (one axis); rectangles are
    // row-major over (dv, du).
    const bool disparity = in_props.kind() == ProposalKind::DisparityRange;
    const int in_nu = disparity ? static_cast<int>(in_depth) : in_props.du_max() - in_props.du_min() + 1;
    const int in_nv = disparity ? 1 : in_props.dv_max() - in_props.dv_min() + 1;
    const int out_nu = disparity ? static_cast<int>(out_depth) : out_props.du_max() - out_props.du_min() + 1;
    const int out_nv = disparity ? 1 : out_props.dv_max() - out_props.dv_min() + 1;

    std::vector<Lerp> along_u(out_nu), along_v(out_nv);
    for (int i = 0; i < out_nu; ++i) {
        along_u[i] = axis_lerp(i, k, in_nu);
    }
    for (int i = 0; i < out_nv; ++i) {
        along_v[i] = axis_lerp(i, k, in_nv);
    }

    std::vector<double> out(static_cast<std::size_t>(ow) * oh * out_depth);
    std::vector<double> spatial(in_depth);
    for (int y = 0; y < oh; ++y) {
        const Lerp ly = spatial_lerp(y, k, h);
        for (int x = 0; x < ow; ++x) {
            const Lerp lx = spatial_lerp(x, k, w);
            const auto s00 = volume.scores_at(lx.i0, ly.i0);
            const auto s10 = volume.scores_at(lx.i1, ly.i0);
            const auto s01 = volume.scores_at(lx.i0, ly.i1);
            const auto s11 = volume.scores_at(lx.i1, ly.i1);
            for (std::size_t q = 0; q < in_depth; ++q) {
                const double top = (1.0 - lx.t) * s00[q] + lx.t * s10[q];
                const double bottom = (1.0 - lx.t) * s01[q] + lx.t * s11[q];
                spatial[q] = (1.0 - ly.t) * top + ly.t * bottom;
            }
            double* dst = out.data() + (static_cast<std::size_t>(y) * ow + x) * out_depth;
            for (int jv = 0; jv < out_nv; ++jv) {
                const Lerp pv = along_v[jv];
                for (int ju = 0; ju < out_nu; ++ju) {
                    const Lerp pu = along_u[ju];
                    auto at = [&](int iu, int iv) { return spatial[static_cast<std::size_t>(iv) * in_nu + iu]; };
                    const double top = (1.0 - pu.t) * at(pu.i0, pv.i0) + pu.t * at(pu.i1, pv.i0);
                    const double bottom = (1.0 - pu.t) * at(pu.i0, pv.i1) + pu.t * at(pu.i1, pv.i1);
                    dst[static_cast<std::size_t>(jv) * out_nu + ju] = (1.0 - pv.t) * top + pv.t * bottom;
                }
            }
        }
    }
    return {ow, oh, out_props, std::move(out)};
}

ScoreVolume fuse_volumes(std::span<const ScoreVolume> volumes, FuseMode mode, double temperature)
{
    if (volumes.empty()) {
        throw ArgumentError("fuse_volumes: no volumes");
    }
    if (!(temperature > 0.0)) {
        throw ArgumentError("fuse_volumes: temperature must be > 0");
    }
    const ScoreVolume& first = volumes.front();
    for (const auto& vol : volumes) {
        if (vol.width() != first.width() || vol.height() != first.height()
            || vol.proposals().kind() != first.proposals().kind() || vol.depth() != first.depth()
            || vol.proposals().du_min() != first.proposals().du_min()
            || vol.proposals().dv_min() != first.proposals().dv_min()) {
            throw ArgumentError("fuse_volumes: volumes must share grid and proposals");
        }
    }
    const std::size_t depth = first.depth();
    std::vector<double> out(first.data().size(), 1.0);
    std::vector<double> prob(depth);
    for (const auto& vol : volumes) {
        const auto data = vol.data();
        for (std::size_t p = 0; p < data.size(); p += depth) {
            if (mode == FuseMode::Product) {
                for (std::size_t q = 0; q < depth; ++q) {
                    out[p + q] *= data[p + q];
                }
                continue;
            }
            const double mx = *std::max_element(data.begin() + p, data.begin() + p + depth);
            double sum = 0.0;
            for (std::size_t q = 0; q < depth; ++q) {
                prob[q] = std::exp((data[p + q] - mx) / temperature);
                sum += prob[q];
            }
            for (std::size_t q = 0; q < depth; ++q) {
                out[p + q] *= prob[q] / sum;
            }
        }
    }
    return {first.width(), first.height(), first.proposals(), std::move(out)};
}

CensusMatchResult census_match(const Image& ref, const Image& tar, const ProposalSet& proposals, int window)
{
    if (ref.width() != tar.width() || ref.height() != tar.height()) {
        throw ArgumentError("census_match: images must have the same size");
    }
    ScoreVolume volume = cosine_score_volume(census_descriptor(ref, window), census_descriptor(tar, window), proposals);
    DisplacementField field = argmax_regress(volume);
    return {std::move(volume), std::move(field)};
}

} // namespace corrkit
