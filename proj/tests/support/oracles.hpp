#pragma once

// Independent reference implementations and synthetic-scene generators used by
// the unit and acceptance tests. Nothing here calls the library routine it is
// meant to check; fields are assembled and evaluated with plain loops.

#include <corrkit/core.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using corrkit::DisplacementField;
using corrkit::DisparityMap;
using corrkit::DepthMap;

// ---- random inputs --------------------------------------------------------

DisplacementField random_field(int w, int h, std::mt19937_64& rng, double range, double invalid_fraction = 0.0);
DisparityMap random_disparity(int w, int h, std::mt19937_64& rng, double max_d, double invalid_fraction = 0.0);
DepthMap random_depth(int w, int h, std::mt19937_64& rng, double lo, double hi, double invalid_fraction = 0.0);
/// Row-major W*H*C features in [-1, 1].
corrkit::FeatureMap random_features(int w, int h, int c, std::mt19937_64& rng, int scale_denominator = 1);

// ---- cameras ---------------------------------------------------------------

/// Rodrigues rotation from an axis-angle vector.
Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& w);

struct Pinhole {
    double fx, fy, cx, cy, skew;
    Eigen::Matrix3d R;
    Eigen::Vector3d T;
    corrkit::CameraModel model() const;
};

/// Reference camera near identity and a target with a non-axial baseline of
/// norm in [0.2, 1] and a small rotation.
std::pair<Pinhole, Pinhole> random_camera_pair(std::mt19937_64& rng, int w, int h);

/// World point seen at reference pixel (u, v) with z-depth z.
Eigen::Vector3d back_project(const Pinhole& cam, double u, double v, double z);
/// (u, v, camera-frame z) of a world point.
Eigen::Vector3d project(const Pinhole& cam, const Eigen::Vector3d& X);

/// F = K2^-T [t]x R K1^-1 with R = R2 R1^T, t = T2 - R T1.
Eigen::Matrix3d fundamental_from_cameras(const Pinhole& c1, const Pinhole& c2);

// ---- metric loops ------------------------------------------------------------

double naive_epe(const DisplacementField& est, const DisplacementField& gt);
double naive_bad(const DisplacementField& est, const DisplacementField& gt, double tau);
double naive_f1(const DisplacementField& est, const DisplacementField& gt);
double naive_epe(const DisparityMap& est, const DisparityMap& gt);
double naive_bad(const DisparityMap& est, const DisparityMap& gt, double tau);
double naive_d1(const DisparityMap& est, const DisparityMap& gt);
/// abs_rel, sq_rel, rmse, rmse_log
std::array<double, 4> naive_depth(const DepthMap& est, const DepthMap& gt);
double naive_sampson(const Eigen::Matrix3d& F, double u1, double v1, double u2, double v2);

// ---- matcher -----------------------------------------------------------------

/// Quadruple loop: for each pixel and each integer offset in the rectangle,
/// cosine of the two feature vectors (-1 out of bounds, 0 for zero norm);
/// winner by score, then smaller |f|^2, then (du, dv) lexicographic.
std::vector<std::pair<int, int>> brute_force_match(const corrkit::FeatureMap& ref, const corrkit::FeatureMap& tar,
                                                   int du_min, int du_max, int dv_min, int dv_max,
                                                   std::vector<double>* scores = nullptr);

// ---- epipolar and occlusion scenes ------------------------------------------

struct EpipolarScene {
    std::vector<corrkit::Match> matches; ///< outliers first, then exact correspondences
    int outliers = 0;
    Eigen::Matrix3d F;                   ///< from the generating cameras
};

/// n correspondences inside a 320x240 view pair; the first round(fraction * n)
/// are replaced by uniform random pairs.
EpipolarScene epipolar_scene(std::mt19937_64& rng, int n, double outlier_fraction);

struct OcclusionScene {
    DisplacementField fwd, bwd;
    corrkit::Mask occluded;  ///< background pixels landing under the moved square
    corrkit::Mask covisible; ///< every other pixel whose target is in view
};

/// Background translates (1, 0); a side x side square at (x0, y0) translates (6, 3).
OcclusionScene occlusion_scene(int w, int h, int x0, int y0, int side);

// ---- stereo scenes -----------------------------------------------------------

struct Stereogram {
    corrkit::Image left;
    corrkit::Image right;
    DisparityMap gt; ///< invalid in the occluded block and where u < shift
    int occluded_pixels = 0;
};

/// Random-dot pair: right(u, v) = left(u + shift, v); a block of about
/// `occlusion_fraction` of the left image has its right-image counterpart
/// replaced by fresh noise.
Stereogram random_dot_stereogram(int w, int h, int shift, double occlusion_fraction, std::uint64_t seed);

/// Writes an 8-bit binary PGM.
void write_pgm(const std::string& path, const corrkit::Image& image);

} // namespace oracle
