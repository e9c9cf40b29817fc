#pragma once

// Evaluation: dense flow/disparity/depth metrics, forward-backward cycle
// consistency, sparse match extraction, and fundamental-matrix estimation for
// the epipolar mAA score.

#include <corrkit/core.hpp>

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace corrkit {

enum class Unit { Pixel, Percent, SceneUnits, Dimensionless };

const char* unit_name(Unit unit) noexcept;

struct MetricReport {
    std::string name;
    double value = 0.0;
    Unit unit = Unit::Dimensionless;
    std::size_t count = 0; ///< pixels / correspondences used
};

// Flow metrics are over pixels valid in both fields; disparity overloads
// compare |d_est - d_gt|. All throw EvaluationError without any such pixel
// and ArgumentError on size mismatch.

MetricReport epe(const DisplacementField& est, const DisplacementField& gt);
MetricReport epe(const DisparityMap& est, const DisparityMap& gt);

/// Percentage of pixels with error > tau.
MetricReport bad_tau(const DisplacementField& est, const DisplacementField& gt, double tau);
MetricReport bad_tau(const DisparityMap& est, const DisparityMap& gt, double tau);
/// 100 - Bad-tau.
MetricReport pca_tau(const DisplacementField& est, const DisplacementField& gt, double tau);
MetricReport pca_tau(const DisparityMap& est, const DisparityMap& gt, double tau);

/// KITTI outlier rate: error > 3 px and error > 5% of the ground-truth
/// magnitude. Named "f1_all" for flow and "d1_all" for disparity.
MetricReport d1_f1_all(const DisplacementField& est, const DisplacementField& gt);
MetricReport d1_f1_all(const DisparityMap& est, const DisparityMap& gt);

/// abs_rel, sq_rel, rmse, rmse_log over jointly valid pixels.
std::array<MetricReport, 4> depth_metrics(const DepthMap& est, const DepthMap& gt);

// ---------------------------------------------------------------------------

struct CycleOptions {
    double tau_c = 1.0;
    /// When set, the threshold is tau_c * max(1, |fwd(p)|) instead of tau_c.
    bool relative = false;
};

/// Confidence 1 where |fwd(p) + bwd(p + fwd(p))| <= threshold, with bwd
/// sampled bilinearly; 0 when fwd is invalid, the landing point leaves the
/// target grid, or a contributing bwd sample is invalid.
ConfidenceMap cycle_consistency(const DisplacementField& fwd, const DisplacementField& bwd,
                                const CycleOptions& options = {});

/// One match per pixel on the stride grid (u, v multiples of `stride`) whose
/// confidence is >= min_confidence, flow is valid and target lies inside the
/// target_width x target_height image.
MatchSet extract_matches(const DisplacementField& flow, const ConfidenceMap& confidence, int stride,
                         int target_width, int target_height, double min_confidence = 0.5);
/// Target assumed to share the reference size.
MatchSet extract_matches(const DisplacementField& flow, const ConfidenceMap& confidence, int stride);

// ---------------------------------------------------------------------------

/// Rank-2 fundamental matrix with unit Frobenius norm, sign fixed so the
/// largest-magnitude entry is positive.
class FundamentalMatrix {
public:
    /// Enforces rank 2 (smallest singular value zeroed) and normalizes.
    static FundamentalMatrix from_matrix(const Eigen::Matrix3d& F);

    const Eigen::Matrix3d& matrix() const noexcept { return F_; }

private:
    explicit FundamentalMatrix(const Eigen::Matrix3d& F) : F_(F) {}
    Eigen::Matrix3d F_;
};

/// First-order geometric error |x2^T F x1| / sqrt((Fx1)_1^2 + (Fx1)_2^2 + (F^T x2)_1^2 + (F^T x2)_2^2), in px.
double sampson_distance(const Eigen::Matrix3d& F, const Match& m) noexcept;

/// Hartley-normalized linear (8-point) estimate from >= 8 matches, least
/// squares when more are given. Throws EstimationError on fewer than 8 or a
/// degenerate configuration.
FundamentalMatrix eight_point(std::span<const Match> matches);

struct RansacParams {
    int iterations = 2000;
    double inlier_tau = 1.0; ///< Sampson distance, px
    std::uint64_t seed = 0;
};

struct FundamentalEstimate {
    FundamentalMatrix F;
    Mask inliers;
    std::size_t inlier_count = 0;
    int degenerate_samples = 0;
};

/// Minimal 8-point samples scored by Sampson distance, then least-squares
/// refits on the inlier set. Deterministic for a given seed.
FundamentalEstimate estimate_fundamental(const MatchSet& matches, const RansacParams& params = {});

/// Mean over thresholds 1..max_threshold px of the fraction of matches whose
/// Sampson distance to F is below the threshold, as a percentage.
MetricReport maa_epipolar(const MatchSet& gt_matches, const FundamentalMatrix& F, int max_threshold = 10);

// ---------------------------------------------------------------------------
// Report serialization

/// Aligned text table: metric, value, unit, count.
std::string format_metric_table(std::span<const MetricReport> reports);
/// One "name=value" line per metric plus "name.unit" and "name.count".
std::string format_metric_key_values(std::span<const MetricReport> reports);
std::vector<MetricReport> parse_metric_key_values(std::string_view text);

/// "u1 v1 u2 v2 confidence" lines with a header comment.
std::string format_matches(const MatchSet& matches);
MatchSet parse_matches(std::string_view text);

std::string format_fundamental(const FundamentalMatrix& F);
FundamentalMatrix parse_fundamental(std::string_view text);

} // namespace corrkit
