#pragma once

// Contrastive matching objective: a per-pixel InfoNCE loss over a score
// volume against a ground-truth distribution quantized from dense flow.

#include <corrkit/core.hpp>
#include <corrkit/matching.hpp>

#include <span>
#include <vector>

namespace corrkit {

struct DistributionEntry {
    Offset f;
    double p;
};

struct MarginalEntry {
    int offset;
    int count;
};

/// Per low-resolution pixel, a sparse distribution over integer proposals.
/// Pixels whose patch holds no valid flow carry an empty distribution.
class GtFlowDistribution {
public:
    struct Cell {
        std::vector<DistributionEntry> entries; ///< dv ascending outer, du ascending inner
        std::vector<MarginalEntry> u_marginal;  ///< offset ascending
        std::vector<MarginalEntry> v_marginal;
        int samples = 0; ///< valid pixels counted in the patch
    };

    GtFlowDistribution(int width, int height, int patch, std::vector<Cell> cells);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int patch() const noexcept { return patch_; }
    const Cell& cell(int u, int v) const noexcept { return cells_[static_cast<std::size_t>(v) * width_ + u]; }
    std::span<const DistributionEntry> at(int u, int v) const noexcept { return cell(u, v).entries; }
    bool empty(int u, int v) const noexcept { return cell(u, v).entries.empty(); }
    std::size_t nonempty_count() const noexcept;

private:
    int width_;
    int height_;
    int patch_;
    std::vector<Cell> cells_;
};

/// Round to nearest, ties toward negative infinity.
int quantize_offset(double x) noexcept;

/// For each s x s patch (trailing patches clipped to the image), every valid
/// pixel contributes the quantized low-resolution offset (q(du/s), q(dv/s));
/// the horizontal and vertical offset frequencies are counted separately and
/// the distribution is their outer product.
GtFlowDistribution quantize_gt_distribution(const DisplacementField& flow, int patch);

struct LossConfig {
    double temperature = 0.07;
};

struct LossReport {
    double loss = 0.0;               ///< mean over counted pixels
    std::vector<double> per_pixel;   ///< 0 at skipped pixels
    Mask counted;                    ///< pixels with a nonempty distribution
    std::size_t pixel_count = 0;
    std::vector<double> gradient;    ///< dL/dS, laid out like the volume
};

/// L(u,v) = -sum_f p(u,v,f) log softmax(S(u,v,.)/tau)_f; L = mean over pixels
/// with nonempty distributions (occluded / out-of-view pixels are kept).
/// Throws ArgumentError when tau <= 0, the grids differ, or a distribution
/// entry names an offset outside the volume's proposal set.
LossReport info_nce_loss(const ScoreVolume& scores, const GtFlowDistribution& target, const LossConfig& cfg = {});

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values) noexcept;

} // namespace corrkit
