#include <corrkit/featxform.hpp>
#include <corrkit/random.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace corrkit {

// ---------------------------------------------------------------------------
// Linear

Linear Linear::zeros(int in, int out)
{
    if (in < 1 || out < 1) {
        throw ArgumentError("Linear: dimensions must be >= 1");
    }
    return {in, out, std::vector<double>(static_cast<std::size_t>(in) * out, 0.0),
            std::vector<double>(static_cast<std::size_t>(out), 0.0)};
}

Linear Linear::identity(int n)
{
    Linear l = zeros(n, n);
    for (int i = 0; i < n; ++i) {
        l.w(i, i) = 1.0;
    }
    return l;
}

Linear Linear::seeded(int in, int out, Rng& rng)
{
    Linear l = zeros(in, out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& x : l.weight) {
        x = rng.uniform(-bound, bound);
    }
    for (double& x : l.bias) {
        x = rng.uniform(-bound, bound);
    }
    return l;
}

void Linear::validate(const char* what) const
{
    if (in < 1 || out < 1 || weight.size() != static_cast<std::size_t>(in) * out
        || bias.size() != static_cast<std::size_t>(out)) {
        throw ArgumentError(std::string(what) + ": inconsistent linear layer shape");
    }
    const auto finite = [](double x) { return std::isfinite(x); };
    if (!std::all_of(weight.begin(), weight.end(), finite) || !std::all_of(bias.begin(), bias.end(), finite)) {
        throw ValidationError(std::string(what) + ": non-finite parameter");
    }
}

void Linear::apply(std::span<const double> x, std::span<double> y) const
{
    for (int r = 0; r < out; ++r) {
        const double* row = weight.data() + static_cast<std::size_t>(r) * in;
        double acc = bias[r];
        for (int c = 0; c < in; ++c) {
            acc += row[c] * x[c];
        }
        y[r] = acc;
    }
}

// ---------------------------------------------------------------------------
// UpsampleAttention

void UpsampleAttention::validate() const
{
    if (heads < 1 || model_channels < 1 || model_channels % heads != 0) {
        throw ArgumentError("UpsampleAttention: model channels must be a positive multiple of the head count");
    }
    if (scale < 1) {
        throw ArgumentError("UpsampleAttention: scale must be >= 1");
    }
    query.validate("UpsampleAttention.query");
    key.validate("UpsampleAttention.key");
    value.validate("UpsampleAttention.value");
    output.validate("UpsampleAttention.output");
    if (query.in != guide_channels || query.out != model_channels || key.in != feature_channels
        || key.out != model_channels || value.in != feature_channels || value.out != model_channels
        || output.in != model_channels || output.out != out_channels) {
        throw ArgumentError("UpsampleAttention: projection shapes do not match the declared channels");
    }
}

UpsampleAttention UpsampleAttention::seeded(int guide_channels, int feature_channels, int model_channels,
                                            int out_channels, int heads, int scale, std::uint64_t seed)
{
    Rng rng(seed);
    UpsampleAttention a;
    a.heads = heads;
    a.scale = scale;
    a.guide_channels = guide_channels;
    a.feature_channels = feature_channels;
    a.model_channels = model_channels;
    a.out_channels = out_channels;
    a.query = Linear::seeded(guide_channels, model_channels, rng);
    a.key = Linear::seeded(feature_channels, model_channels, rng);
    a.value = Linear::seeded(feature_channels, model_channels, rng);
    a.output = Linear::seeded(model_channels, out_channels, rng);
    a.validate();
    return a;
}

UpsampleAttention UpsampleAttention::identity(int channels, int heads, int scale)
{
    UpsampleAttention a;
    a.heads = heads;
    a.scale = scale;
    a.guide_channels = channels;
    a.feature_channels = channels;
    a.model_channels = channels;
    a.out_channels = channels;
    a.query = Linear::zeros(channels, channels);
    a.key = Linear::identity(channels);
    a.value = Linear::identity(channels);
    a.output = Linear::identity(channels);
    a.validate();
    return a;
}

// ---------------------------------------------------------------------------
// Unfold

NeighborTensor::NeighborTensor(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data))
{
    if (data_.size() != static_cast<std::size_t>(width) * height * kNeighborhood * channels) {
        throw ArgumentError("NeighborTensor: buffer size mismatch");
    }
}

NeighborTensor unfold_neighbors(const FeatureMap& features, int upscale)
{
    if (upscale < 1) {
        throw ArgumentError("unfold_neighbors: upscale must be >= 1");
    }
    const int lw = features.width();
    const int lh = features.height();
    const int w = lw * upscale;
    const int h = lh * upscale;
    const auto c = static_cast<std::size_t>(features.channels());
    std::vector<double> data(static_cast<std::size_t>(w) * h * kNeighborhood * c);
    auto out = data.begin();
    for (int v = 0; v < h; ++v) {
        const int av = v / upscale;
        for (int u = 0; u < w; ++u) {
            const int au = u / upscale;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto src = features.at(std::clamp(au + dx, 0, lw - 1), std::clamp(av + dy, 0, lh - 1));
                    out = std::copy(src.begin(), src.end(), out);
                }
            }
        }
    }
    return {w, h, features.channels(), std::move(data)};
}

// ---------------------------------------------------------------------------
// Guided upsampling

namespace {

// Projects every cell of a feature map through `layer`.
std::vector<double> project_all(const FeatureMap& f, const Linear& layer)
{
    const std::size_t cells = static_cast<std::size_t>(f.width()) * f.height();
    std::vector<double> out(cells * layer.out);
    for (std::size_t i = 0; i < cells; ++i) {
        layer.apply(f.data().subspan(i * f.channels(), f.channels()),
                    std::span<double>(out.data() + i * layer.out, layer.out));
    }
    return out;
}

} // namespace

GuidedUpsampleTrace guided_upsample_traced(const FeatureMap& low, const FeatureMap& guide,
                                           const UpsampleAttention& attn)
{
    attn.validate();
    if (guide.width() != low.width() * attn.scale || guide.height() != low.height() * attn.scale) {
        throw ArgumentError("guided_upsample: guide grid must be scale x the low-resolution grid");
    }
    if (guide.channels() != attn.guide_channels || low.channels() != attn.feature_channels) {
        throw ArgumentError("guided_upsample: feature channels do not match the attention parameters");
    }

    const int lw = low.width();
    const int lh = low.height();
    const int w = guide.width();
    const int h = guide.height();
    const int C = attn.model_channels;
    const int n = attn.heads;
    const int head_dim = C / n;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

    const std::vector<double> keys = project_all(low, attn.key);
    const std::vector<double> values = project_all(low, attn.value);
    const std::vector<double> queries = project_all(guide, attn.query);

    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    std::vector<double> weights(pixels * n * kNeighborhood);
    std::vector<double> attended(pixels * C, 0.0);
    std::vector<double> out(pixels * attn.out_channels);

    std::array<std::size_t, kNeighborhood> cells{};
    std::array<double, kNeighborhood> logits{};
    for (int v = 0; v < h; ++v) {
        const int av = v / attn.scale;
        for (int u = 0; u < w; ++u) {
            const int au = u / attn.scale;
            const std::size_t p = static_cast<std::size_t>(v) * w + u;
            int j = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    cells[j++] = static_cast<std::size_t>(std::clamp(av + dy, 0, lh - 1)) * lw
                                 + std::clamp(au + dx, 0, lw - 1);
                }
            }
            const double* q = queries.data() + p * C;
            double* att = attended.data() + p * C;
            for (int hd = 0; hd < n; ++hd) {
                const int c0 = hd * head_dim;
                for (int k = 0; k < kNeighborhood; ++k) {
                    const double* key = keys.data() + cells[k] * C;
                    double dot = 0.0;
                    for (int c = c0; c < c0 + head_dim; ++c) {
                        dot += q[c] * key[c];
                    }
                    logits[k] = dot * inv_sqrt;
                }
                const double mx = *std::max_element(logits.begin(), logits.end());
                double sum = 0.0;
                for (double& l : logits) {
                    l = std::exp(l - mx);
                    sum += l;
                }
                double* wgt = weights.data() + (p * n + hd) * kNeighborhood;
                for (int k = 0; k < kNeighborhood; ++k) {
                    wgt[k] = logits[k] / sum;
                    const double* val = values.data() + cells[k] * C;
                    for (int c = c0; c < c0 + head_dim; ++c) {
                        att[c] += wgt[k] * val[c];
                    }
                }
            }
            attn.output.apply(std::span<const double>(att, C),
                              std::span<double>(out.data() + p * attn.out_channels, attn.out_channels));
        }
    }
    const int scale_den = guide.scale_denominator();
    return {FeatureMap(w, h, attn.out_channels, std::move(out), scale_den), std::move(weights), std::move(attended)};
}

FeatureMap guided_upsample(const FeatureMap& low, const FeatureMap& guide, const UpsampleAttention& attn)
{
    return guided_upsample_traced(low, guide, attn).output;
}

// ---------------------------------------------------------------------------
// Patch embedding

double gelu(double x)
{
    return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

FeatureMap fold_patches(const FeatureMap& features, int patch)
{
    if (patch < 1 || features.width() % patch != 0 || features.height() % patch != 0) {
        throw ArgumentError("fold_patches: grid must be divisible by the patch size");
    }
    const int w = features.width() / patch;
    const int h = features.height() / patch;
    const int c = features.channels();
    std::vector<double> data(static_cast<std::size_t>(w) * h * c * patch * patch);
    auto out = data.begin();
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            for (int dy = 0; dy < patch; ++dy) {
                for (int dx = 0; dx < patch; ++dx) {
                    const auto src = features.at(u * patch + dx, v * patch + dy);
                    out = std::copy(src.begin(), src.end(), out);
                }
            }
        }
    }
    return {w, h, c * patch * patch, std::move(data), features.scale_denominator() * patch};
}

FeatureMap expand_nearest(const FeatureMap& features, int factor)
{
    if (factor < 1 || features.scale_denominator() % factor != 0) {
        throw ArgumentError("expand_nearest: factor must divide the scale denominator");
    }
    const int w = features.width() * factor;
    const int h = features.height() * factor;
    const int c = features.channels();
    std::vector<double> data(static_cast<std::size_t>(w) * h * c);
    auto out = data.begin();
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const auto src = features.at(u / factor, v / factor);
            out = std::copy(src.begin(), src.end(), out);
        }
    }
    return {w, h, c, std::move(data), features.scale_denominator() / factor};
}

std::array<int, 4> PatchEmbedSpec::folded_channels() const
{
    return {input_channels[0] * 16, input_channels[1] * 4, input_channels[2], input_channels[3]};
}

void PatchEmbedSpec::validate() const
{
    const auto folded = folded_channels();
    int concat = 0;
    for (int i = 0; i < 4; ++i) {
        if (input_channels[i] < 1) {
            throw ArgumentError("PatchEmbedSpec: input channels must be >= 1");
        }
        projections[i].validate("PatchEmbedSpec.projection");
        if (projections[i].in != folded[i]) {
            throw ArgumentError("PatchEmbedSpec: projection " + std::to_string(i) + " expects "
                                + std::to_string(projections[i].in) + " inputs, folded level has "
                                + std::to_string(folded[i]));
        }
        concat += projections[i].out;
    }
    fuse_hidden.validate("PatchEmbedSpec.fuse_hidden");
    fuse_out.validate("PatchEmbedSpec.fuse_out");
    if (fuse_hidden.in != concat || fuse_out.in != fuse_hidden.out) {
        throw ArgumentError("PatchEmbedSpec: fusion layers do not chain");
    }
}

PatchEmbedSpec PatchEmbedSpec::seeded(std::array<int, 4> input_channels, std::array<int, 4> projected_channels,
                                      int hidden, int out_channels, std::uint64_t seed)
{
    Rng rng(seed);
    PatchEmbedSpec spec;
    spec.input_channels = input_channels;
    const auto folded = spec.folded_channels();
    int concat = 0;
    for (int i = 0; i < 4; ++i) {
        spec.projections[i] = Linear::seeded(folded[i], projected_channels[i], rng);
        concat += projected_channels[i];
    }
    spec.fuse_hidden = Linear::seeded(concat, hidden, rng);
    spec.fuse_out = Linear::seeded(hidden, out_channels, rng);
    spec.validate();
    return spec;
}

FeatureMap multiscale_patch_embed(const FeaturePyramid& pyramid, const PatchEmbedSpec& spec)
{
    spec.validate();
    const std::array<const FeatureMap*, 4> levels = {&pyramid.half, &pyramid.quarter, &pyramid.eighth,
                                                     &pyramid.sixteenth};
    constexpr std::array<int, 4> denominators = {2, 4, 8, 16};
    const int w = pyramid.eighth.width();
    const int h = pyramid.eighth.height();
    for (int i = 0; i < 4; ++i) {
        const FeatureMap& f = *levels[i];
        if (f.scale_denominator() != denominators[i]) {
            throw ArgumentError("multiscale_patch_embed: level " + std::to_string(i) + " has scale 1/"
                                + std::to_string(f.scale_denominator()) + ", expected 1/"
                                + std::to_string(denominators[i]));
        }
        if (f.width() * denominators[i] != w * 8 || f.height() * denominators[i] != h * 8) {
            throw ArgumentError("multiscale_patch_embed: pyramid levels disagree on the image size");
        }
        if (f.channels() != spec.input_channels[i]) {
            throw ArgumentError("multiscale_patch_embed: level " + std::to_string(i) + " channel count mismatch");
        }
    }

    const std::array<FeatureMap, 4> aligned = {fold_patches(pyramid.half, 4), fold_patches(pyramid.quarter, 2),
                                               pyramid.eighth, expand_nearest(pyramid.sixteenth, 2)};

    std::array<int, 4> offsets{};
    int concat = 0;
    for (int i = 0; i < 4; ++i) {
        offsets[i] = concat;
        concat += spec.projections[i].out;
    }
    const int hidden = spec.fuse_hidden.out;
    const int out_c = spec.out_channels();
    std::vector<double> joined(concat), mid(hidden);
    std::vector<double> out(static_cast<std::size_t>(w) * h * out_c);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            for (int i = 0; i < 4; ++i) {
                spec.projections[i].apply(aligned[i].at(u, v),
                                          std::span<double>(joined.data() + offsets[i], spec.projections[i].out));
            }
            spec.fuse_hidden.apply(joined, mid);
            for (double& x : mid) {
                x = gelu(x);
            }
            spec.fuse_out.apply(mid, std::span<double>(out.data() + (static_cast<std::size_t>(v) * w + u) * out_c,
                                                       out_c));
        }
    }
    return {w, h, out_c, std::move(out), 8};
}

} // namespace corrkit
