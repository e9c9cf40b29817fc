#pragma once

// Shared domain types. Pixel convention: (u, v) = (column, row), origin at the
// top-left pixel center, u to the right, v downward. Storage is row-major.
// Invalid pixels hold NaN and a cleared mask bit; the mask is authoritative.

#include <corrkit/errors.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace corrkit {

using Mask = std::vector<std::uint8_t>;

struct Displacement {
    double du = 0.0;
    double dv = 0.0;
};

/// Width/height/mask bookkeeping shared by the dense per-pixel types.
class PixelGrid {
public:
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * height_; }
    std::size_t index(int u, int v) const noexcept { return static_cast<std::size_t>(v) * width_ + u; }
    bool contains(int u, int v) const noexcept { return u >= 0 && v >= 0 && u < width_ && v < height_; }

    bool valid(int u, int v) const noexcept { return valid_[index(u, v)] != 0; }
    bool valid_at(std::size_t i) const noexcept { return valid_[i] != 0; }
    const Mask& mask() const noexcept { return valid_; }
    std::size_t valid_count() const noexcept;
    double valid_ratio() const noexcept;

protected:
    PixelGrid(int width, int height, Mask valid, const char* what);

    int width_;
    int height_;
    Mask valid_;
};

/// Per-pixel 2D displacement (du = u2 - u1, dv = v2 - v1). Targets may fall
/// outside the image; that is representable, not an error.
class DisplacementField : public PixelGrid {
public:
    DisplacementField(int width, int height, std::vector<double> du, std::vector<double> dv, Mask valid);

    double du(int u, int v) const noexcept { return du_[index(u, v)]; }
    double dv(int u, int v) const noexcept { return dv_[index(u, v)]; }
    Displacement at(int u, int v) const noexcept { return {du(u, v), dv(u, v)}; }
    std::span<const double> du_values() const noexcept { return du_; }
    std::span<const double> dv_values() const noexcept { return dv_; }

private:
    std::vector<double> du_;
    std::vector<double> dv_;
};

/// Constant field; `std::nullopt` yields an all-invalid field.
DisplacementField make_displacement_field(int width, int height, std::optional<Displacement> fill);

/// Rectified-pair disparity; valid values are finite and >= 0.
class DisparityMap : public PixelGrid {
public:
    DisparityMap(int width, int height, std::vector<double> d, Mask valid);

    double d(int u, int v) const noexcept { return d_[index(u, v)]; }
    std::span<const double> values() const noexcept { return d_; }

private:
    std::vector<double> d_;
};

enum class DepthVariant { Zu, Zv, Zlsm, Source };

/// z-depth along the reference optical axis; valid values are finite and > 0.
class DepthMap : public PixelGrid {
public:
    DepthMap(int width, int height, std::vector<double> z, Mask valid, DepthVariant variant = DepthVariant::Source);

    double z(int u, int v) const noexcept { return z_[index(u, v)]; }
    std::span<const double> values() const noexcept { return z_; }
    DepthVariant variant() const noexcept { return variant_; }

private:
    std::vector<double> z_;
    DepthVariant variant_;
};

/// Per-pixel confidence in [0, 1].
class ConfidenceMap {
public:
    ConfidenceMap(int width, int height, std::vector<double> c);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int u, int v) const noexcept { return c_[static_cast<std::size_t>(v) * width_ + u]; }
    std::span<const double> values() const noexcept { return c_; }
    double mean() const noexcept;

private:
    int width_;
    int height_;
    std::vector<double> c_;
};

struct Match {
    double u1, v1, u2, v2;
    double confidence;
};

/// Sparse correspondences. Coordinates must lie inside [0, w-1] x [0, h-1] of
/// their image when sizes are given.
class MatchSet {
public:
    MatchSet() = default;
    explicit MatchSet(std::vector<Match> matches);
    MatchSet(std::vector<Match> matches, int ref_width, int ref_height, int tar_width, int tar_height);

    const std::vector<Match>& matches() const noexcept { return matches_; }
    std::size_t size() const noexcept { return matches_.size(); }
    bool empty() const noexcept { return matches_.empty(); }
    const Match& operator[](std::size_t i) const noexcept { return matches_[i]; }

private:
    std::vector<Match> matches_;
};

/// Grayscale raster used by the descriptor and augmentation code.
class Image {
public:
    Image(int width, int height, std::vector<double> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int u, int v) const noexcept { return px_[static_cast<std::size_t>(v) * width_ + u]; }
    /// Clamped (replicate-border) lookup.
    double at_clamped(int u, int v) const noexcept;
    std::span<const double> pixels() const noexcept { return px_; }

private:
    int width_;
    int height_;
    std::vector<double> px_;
};

/// Luma from interleaved RGB (Rec. 601 weights).
Image grayscale_from_rgb(int width, int height, std::span<const double> rgb);

/// Dense C-channel feature grid. `scale_denominator` names the pyramid level
/// (2 for 1/2, ..., 16 for 1/16; 1 for full resolution).
class FeatureMap {
public:
    FeatureMap(int width, int height, int channels, std::vector<double> data, int scale_denominator = 1);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    int scale_denominator() const noexcept { return scale_den_; }
    std::span<const double> at(int u, int v) const noexcept
    {
        return {data_.data() + (static_cast<std::size_t>(v) * width_ + u) * channels_,
                static_cast<std::size_t>(channels_)};
    }
    std::span<const double> data() const noexcept { return data_; }

private:
    int width_;
    int height_;
    int channels_;
    int scale_den_;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Cameras

struct Intrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    double skew = 0.0;

    Eigen::Matrix3d matrix() const;
};

/// Pinhole camera with world-to-camera extrinsics: x_cam = R * x_world + T.
class CameraModel {
public:
    static constexpr double kOrthonormalityTolerance = 1e-9;

    CameraModel(const Intrinsics& intrinsics, const Eigen::Matrix3d& R, const Eigen::Vector3d& T);

    const Intrinsics& intrinsics() const noexcept { return intrinsics_; }
    Eigen::Matrix3d K() const { return intrinsics_.matrix(); }
    const Eigen::Matrix3d& R() const noexcept { return R_; }
    const Eigen::Vector3d& T() const noexcept { return T_; }

private:
    Intrinsics intrinsics_;
    Eigen::Matrix3d R_;
    Eigen::Vector3d T_;
};

/// Largest deviation of R from orthonormality: max(|R^T R - I|_inf, |det R - 1|).
double orthonormality_error(const Eigen::Matrix3d& R);

struct ProjectionResult {
    double u2;
    double v2;
    double s2;
    bool in_front;
};

/// Reference-pixel-plus-depth to target-pixel map:
///   s2 [u2 v2 1]^T = H [u1 v1 1]^T Z + B
/// with H = K2 R2 R1^-1 K1^-1 and B = -K2 R2 R1^-1 T1 + K2 T2.
struct PoseWarp {
    Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
    Eigen::Vector3d B = Eigen::Vector3d::Zero();

    /// Throws ValidationError when s2 == 0 exactly.
    ProjectionResult project(double u1, double v1, double z) const;
};

PoseWarp compose_camera_pair(const CameraModel& cam1, const CameraModel& cam2);

/// Per-pixel 2x1 least-squares system A z = b for depth from a displacement.
struct LsmSystem {
    Eigen::Vector2d A = Eigen::Vector2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();

    double normal() const noexcept { return A.squaredNorm(); }
    /// (A^T A)^-1 A^T b; caller checks normal() first.
    double solve() const noexcept { return A.dot(b) / A.squaredNorm(); }
    double residual(double z) const noexcept { return (A * z - b).squaredNorm(); }
};

} // namespace corrkit
