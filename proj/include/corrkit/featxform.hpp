#pragma once

// Forward feature transforms: attention-based guided upsampling over a 3x3
// low-resolution neighborhood, and the multi-scale patch embedding that folds
// a 1/2..1/16 pyramid onto the 1/8 grid. Parameters are supplied or seeded;
// nothing here trains.

#include <corrkit/core.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace corrkit {

class Rng;

/// y = W x + b with W stored row-major (out x in).
struct Linear {
    int in = 0;
    int out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    static Linear zeros(int in, int out);
    static Linear identity(int n);
    /// Weights and biases uniform in [-1/sqrt(in), 1/sqrt(in)), drawn in order
    /// (all weights row-major, then biases) from `rng`.
    static Linear seeded(int in, int out, Rng& rng);

    void validate(const char* what) const;
    void apply(std::span<const double> x, std::span<double> y) const;
    double& w(int r, int c) { return weight[static_cast<std::size_t>(r) * in + c]; }
    double w(int r, int c) const { return weight[static_cast<std::size_t>(r) * in + c]; }
};

/// Multi-head attention parameters for guided upsampling. `model_channels` is
/// the query/key/value width C; each head sees C / heads channels.
struct UpsampleAttention {
    int heads = 1;
    int scale = 2; ///< guide grid = scale x low grid
    int guide_channels = 0;
    int feature_channels = 0;
    int model_channels = 0;
    int out_channels = 0;
    Linear query;  ///< guide_channels -> model_channels
    Linear key;    ///< feature_channels -> model_channels
    Linear value;  ///< feature_channels -> model_channels
    Linear output; ///< model_channels -> out_channels

    void validate() const;

    static UpsampleAttention seeded(int guide_channels, int feature_channels, int model_channels, int out_channels,
                                    int heads, int scale, std::uint64_t seed);
    /// Identity key/value/output projections on C channels and a zero query
    /// (uniform weights) unless `query` is replaced afterwards.
    static UpsampleAttention identity(int channels, int heads, int scale);
};

inline constexpr int kNeighborhood = 9; // 3x3

/// Per target cell, the 9 neighbor C-vectors of its low-res anchor, row-major
/// over (dy, dx) in {-1,0,1}^2.
class NeighborTensor {
public:
    NeighborTensor(int width, int height, int channels, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::span<const double> neighbor(int u, int v, int j) const noexcept
    {
        const auto c = static_cast<std::size_t>(channels_);
        return {data_.data() + ((static_cast<std::size_t>(v) * width_ + u) * kNeighborhood + j) * c, c};
    }

private:
    int width_;
    int height_;
    int channels_;
    std::vector<double> data_;
};

/// 3x3 unfold with replicate padding. With upscale s > 1 the result lives on
/// the s-times grid, each cell p taking the neighborhood of anchor floor(p/s).
NeighborTensor unfold_neighbors(const FeatureMap& features, int upscale = 1);

struct GuidedUpsampleTrace {
    FeatureMap output;
    /// Attention weights, [pixel][head][neighbor].
    std::vector<double> weights;
    /// Concatenated head outputs before the output projection, [pixel][C].
    std::vector<double> attended;
};

/// out(p) = W_out concat_h( sum_q softmax_q(<Q_h(guide(p)), K_h(low(q))> / sqrt(C/n)) V_h(low(q)) ).
FeatureMap guided_upsample(const FeatureMap& low, const FeatureMap& guide, const UpsampleAttention& attn);
GuidedUpsampleTrace guided_upsample_traced(const FeatureMap& low, const FeatureMap& guide,
                                           const UpsampleAttention& attn);

// ---------------------------------------------------------------------------
// Multi-scale patch embedding

struct FeaturePyramid {
    FeatureMap half;      ///< 1/2
    FeatureMap quarter;   ///< 1/4
    FeatureMap eighth;    ///< 1/8
    FeatureMap sixteenth; ///< 1/16
};

/// Scale index order: 0 = 1/2 (4x4 fold), 1 = 1/4 (2x2 fold), 2 = 1/8
/// (unchanged), 3 = 1/16 (2x2 duplication).
struct PatchEmbedSpec {
    std::array<int, 4> input_channels{};
    std::array<Linear, 4> projections; ///< folded channels -> projected width
    Linear fuse_hidden;                ///< sum of projected widths -> hidden
    Linear fuse_out;                   ///< hidden -> output

    /// Folded channel count per scale: C*16, C*4, C, C.
    std::array<int, 4> folded_channels() const;
    int out_channels() const noexcept { return fuse_out.out; }
    void validate() const;

    static PatchEmbedSpec seeded(std::array<int, 4> input_channels, std::array<int, 4> projected_channels,
                                 int hidden, int out_channels, std::uint64_t seed);
};

/// Fold size per scale (denominator of the fold ratio for 1/16, which expands).
inline constexpr std::array<int, 4> kPatchFold = {4, 2, 1, 2};

/// Folds/expands each level onto the 1/8 grid, projects, concatenates along
/// channels, then applies fuse_out(GELU(fuse_hidden(x))).
FeatureMap multiscale_patch_embed(const FeaturePyramid& pyramid, const PatchEmbedSpec& spec);

/// Space-to-depth: p x p blocks become channels ordered (dy, dx, c).
FeatureMap fold_patches(const FeatureMap& features, int patch);
/// Nearest 2x2 (or f x f) expansion.
FeatureMap expand_nearest(const FeatureMap& features, int factor);

double gelu(double x);

} // namespace corrkit
