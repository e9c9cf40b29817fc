#pragma once

// Training-free matcher: census descriptors, cosine score volumes over a set
// of integer displacement proposals, winner-take-all regression and volume
// interpolation.

#include <corrkit/core.hpp>

#include <compare>
#include <optional>
#include <span>
#include <vector>

namespace corrkit {

struct Offset {
    int du = 0;
    int dv = 0;

    friend auto operator<=>(const Offset&, const Offset&) = default;
};

enum class ProposalKind {
    DisparityRange, ///< offsets (-d, 0) for d = 0..levels-1, indexed by d
    Full2d,         ///< every offset of a rectangle, row-major (dv outer, du inner)
    Window,         ///< [-r, r]^2, row-major
};

class ProposalSet {
public:
    static ProposalSet disparity_range(int levels);
    /// Offsets reaching every pixel of a width x height target from any reference
    /// pixel: du in [-(width-1), width-1], dv in [-(height-1), height-1].
    static ProposalSet full_2d(int width, int height);
    static ProposalSet window(int radius);
    /// Rectangle of offsets with explicit bounds, tagged with `kind`.
    static ProposalSet rectangle(ProposalKind kind, int du_min, int du_max, int dv_min, int dv_max);

    ProposalKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return offsets_.size(); }
    const Offset& operator[](std::size_t k) const noexcept { return offsets_[k]; }
    std::span<const Offset> offsets() const noexcept { return offsets_; }
    std::optional<std::size_t> find(Offset f) const noexcept;

    int du_min() const noexcept { return du_min_; }
    int du_max() const noexcept { return du_max_; }
    int dv_min() const noexcept { return dv_min_; }
    int dv_max() const noexcept { return dv_max_; }

    /// Tie-break rank: smaller |f| first, then (du, dv) lexicographic.
    std::span<const std::size_t> rank() const noexcept { return rank_; }

private:
    ProposalSet(ProposalKind kind, int du_min, int du_max, int dv_min, int dv_max);

    ProposalKind kind_;
    int du_min_, du_max_, dv_min_, dv_max_;
    std::vector<Offset> offsets_;
    std::vector<std::size_t> rank_;
};

/// Per-pixel scores over a proposal set, stored pixel-major.
class ScoreVolume {
public:
    ScoreVolume(int width, int height, ProposalSet proposals, std::vector<double> scores);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const ProposalSet& proposals() const noexcept { return proposals_; }
    std::size_t depth() const noexcept { return proposals_.size(); }

    double score(int u, int v, std::size_t k) const noexcept
    {
        return scores_[(static_cast<std::size_t>(v) * width_ + u) * depth() + k];
    }
    std::span<const double> scores_at(int u, int v) const noexcept
    {
        return {scores_.data() + (static_cast<std::size_t>(v) * width_ + u) * depth(), depth()};
    }
    std::span<const double> data() const noexcept { return scores_; }

private:
    int width_;
    int height_;
    ProposalSet proposals_;
    std::vector<double> scores_;
};

/// Out-of-bounds targets score this value.
inline constexpr double kOutOfBoundsScore = -1.0;

/// Census transform: one channel per window neighbor (row-major, center
/// skipped), +1 where neighbor >= center, else -1. Borders replicate.
FeatureMap census_descriptor(const Image& image, int window);

/// S(u, v, f) = <F_ref(u, v) / |.|, F_tar(u + f.du, v + f.dv) / |.|>. Zero
/// vectors score 0; out-of-bounds targets score kOutOfBoundsScore.
ScoreVolume cosine_score_volume(const FeatureMap& ref, const FeatureMap& tar, const ProposalSet& proposals);

/// Winner-take-all per pixel with the ProposalSet tie-break.
DisplacementField argmax_regress(const ScoreVolume& volume);
/// Disparity-kind volumes only: d = index of the winning level.
DisparityMap argmax_disparity(const ScoreVolume& volume);

/// Bilinear in space (pixel-center aligned, clamped) times linear (or bilinear
/// for 2D sets) along the proposal axis; proposal coordinates scale by k.
ScoreVolume upsample_volume_trilinear(const ScoreVolume& volume, int k);

enum class FuseMode {
    Product,        ///< elementwise product of raw scores
    SoftmaxProduct, ///< elementwise product of per-pixel softmax(S / temperature)
};

/// Fuses volumes that share grid and proposals.
ScoreVolume fuse_volumes(std::span<const ScoreVolume> volumes, FuseMode mode = FuseMode::Product,
                         double temperature = 1.0);

struct CensusMatchResult {
    ScoreVolume volume;
    DisplacementField field;
};

/// census_descriptor on both images, cosine volume, argmax.
CensusMatchResult census_match(const Image& ref, const Image& tar, const ProposalSet& proposals, int window);

} // namespace corrkit
