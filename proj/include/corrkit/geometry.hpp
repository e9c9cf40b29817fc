#pragma once

// Conversions between displacement, disparity and depth, plus the stereo
// training augmentations that act on displacement annotations.

#include <corrkit/core.hpp>

#include <cstdint>

namespace corrkit {

/// Cutoffs for the depth validity check.
struct ConversionTolerances {
    double eps_den = 1e-6; ///< |denominator| (Zu/Zv) or A^T A (Zlsm) below this -> invalid
    double eps_s = 1e-9;   ///< projective scale s2 at or below this -> invalid (behind / at camera plane)
};

enum class DepthMode { Zu, Zv, Zlsm };

/// d = -du where |dv| <= v_tol and -du >= 0; every other pixel is invalid.
DisparityMap flow_to_disparity(const DisplacementField& field, double v_tol = 0.0);

/// du = -d, dv = 0.
DisplacementField disparity_to_flow(const DisparityMap& disparity);

/// Back-projects each valid reference pixel at its z-depth and reprojects it
/// into the target camera. Pixels that land at s2 <= eps_s are invalid.
DisplacementField project_depth_to_flow(const DepthMap& depth, const CameraModel& cam_ref,
                                        const CameraModel& cam_tar, const ConversionTolerances& tol = {});

/// Rows of the per-pixel system A z = b, built from the u- and v-equations of
///   s2 [u2 v2 1]^T = H [u1 v1 1]^T z + B.
LsmSystem depth_system(const PoseWarp& warp, double u1, double v1, double u2, double v2);

/// Per-pixel depth from a displacement field. A pixel is invalid when its
/// denominator (or A^T A for Zlsm) is below eps_den, or the depth is not a
/// finite positive number.
DepthMap flow_to_depth(const DisplacementField& field, const CameraModel& cam_ref, const CameraModel& cam_tar,
                       DepthMode mode, const ConversionTolerances& tol = {});

// ---------------------------------------------------------------------------
// Augmentations

struct AugmentSpec {
    int vertical_jitter_dy = 0;
    int rotate_quarter_turns = 0;
    std::uint64_t seed = 0;

    /// Throws ArgumentError unless turns is in {0,1,2,3}.
    void validate() const;
    /// Draws turns uniformly from {0..3} and dy uniformly from [-max_dy, max_dy].
    static AugmentSpec sample(std::uint64_t seed, int max_dy);
};

struct StereoSample {
    Image left;
    Image right;
    DisplacementField flow; ///< on the left (reference) grid
};

/// dv' = dv - dy at every valid pixel; du unchanged.
DisplacementField shift_flow_vertical(const DisplacementField& field, double dy);

/// Crops `margin` rows from the top and bottom of the left view and the same
/// window moved down by dy rows from the right view; the flow follows the left
/// crop with dv' = dv - dy. Requires |dy| <= margin and 2 * margin < height.
StereoSample augment_vertical_jitter(const StereoSample& sample, int dy, int margin);

/// Clockwise quarter turns. Per turn, pixel (u, v) moves to (H-1-v, u) and the
/// vector (du, dv) becomes (-dv, du).
DisplacementField rotate_field_quarter(const DisplacementField& field, int turns);
Image rotate_image_quarter(const Image& image, int turns);
/// Both views and the flow; the views must share the flow's size.
StereoSample augment_rotate_quarter(const StereoSample& sample, int turns);

/// Applies spec.vertical_jitter_dy (flow-only shift) then the rotation.
DisplacementField apply_augment(const DisplacementField& field, const AugmentSpec& spec);

} // namespace corrkit
