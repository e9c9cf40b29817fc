#include <corrkit/core.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace corrkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_dims(int width, int height, const char* what)
{
    if (width < 1 || height < 1) {
        throw ArgumentError(std::string(what) + ": dimensions must be >= 1, got " + std::to_string(width) + "x"
                            + std::to_string(height));
    }
}

void require_size(std::size_t got, std::size_t want, const char* what, const char* buffer)
{
    if (got != want) {
        throw ArgumentError(std::string(what) + ": " + buffer + " has " + std::to_string(got) + " entries, expected "
                            + std::to_string(want));
    }
}

std::string pixel_name(std::size_t i, int width)
{
    return "(" + std::to_string(i % width) + ", " + std::to_string(i / width) + ")";
}

} // namespace

// ---------------------------------------------------------------------------

PixelGrid::PixelGrid(int width, int height, Mask valid, const char* what)
    : width_(width), height_(height), valid_(std::move(valid))
{
    require_dims(width, height, what);
    require_size(valid_.size(), size(), what, "mask");
    for (auto& m : valid_) {
        m = m ? 1 : 0;
    }
}

std::size_t PixelGrid::valid_count() const noexcept
{
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

double PixelGrid::valid_ratio() const noexcept
{
    return static_cast<double>(valid_count()) / static_cast<double>(size());
}

DisplacementField::DisplacementField(int width, int height, std::vector<double> du, std::vector<double> dv,
                                     Mask valid)
    : PixelGrid(width, height, std::move(valid), "DisplacementField"), du_(std::move(du)), dv_(std::move(dv))
{
    require_size(du_.size(), size(), "DisplacementField", "du");
    require_size(dv_.size(), size(), "DisplacementField", "dv");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!valid_[i]) {
            du_[i] = kNaN;
            dv_[i] = kNaN;
        } else if (!std::isfinite(du_[i]) || !std::isfinite(dv_[i])) {
            throw ValidationError("DisplacementField: non-finite displacement at valid pixel " + pixel_name(i, width));
        }
    }
}

DisplacementField make_displacement_field(int width, int height, std::optional<Displacement> fill)
{
    require_dims(width, height, "make_displacement_field");
    const auto n = static_cast<std::size_t>(width) * height;
    if (!fill) {
        return {width, height, std::vector<double>(n, kNaN), std::vector<double>(n, kNaN), Mask(n, 0)};
    }
    return {width, height, std::vector<double>(n, fill->du), std::vector<double>(n, fill->dv), Mask(n, 1)};
}

DisparityMap::DisparityMap(int width, int height, std::vector<double> d, Mask valid)
    : PixelGrid(width, height, std::move(valid), "DisparityMap"), d_(std::move(d))
{
    require_size(d_.size(), size(), "DisparityMap", "d");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!valid_[i]) {
            d_[i] = kNaN;
        } else if (!std::isfinite(d_[i]) || d_[i] < 0.0) {
            throw ValidationError("DisparityMap: valid disparity must be finite and >= 0 at " + pixel_name(i, width));
        }
    }
}

DepthMap::DepthMap(int width, int height, std::vector<double> z, Mask valid, DepthVariant variant)
    : PixelGrid(width, height, std::move(valid), "DepthMap"), z_(std::move(z)), variant_(variant)
{
    require_size(z_.size(), size(), "DepthMap", "z");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!valid_[i]) {
            z_[i] = kNaN;
        } else if (!std::isfinite(z_[i]) || z_[i] <= 0.0) {
            throw ValidationError("DepthMap: valid depth must be finite and > 0 at " + pixel_name(i, width));
        }
    }
}

ConfidenceMap::ConfidenceMap(int width, int height, std::vector<double> c)
    : width_(width), height_(height), c_(std::move(c))
{
    require_dims(width, height, "ConfidenceMap");
    require_size(c_.size(), static_cast<std::size_t>(width) * height, "ConfidenceMap", "c");
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (!(c_[i] >= 0.0 && c_[i] <= 1.0)) {
            throw ValidationError("ConfidenceMap: confidence outside [0,1] at " + pixel_name(i, width));
        }
    }
}

double ConfidenceMap::mean() const noexcept
{
    return std::accumulate(c_.begin(), c_.end(), 0.0) / static_cast<double>(c_.size());
}

MatchSet::MatchSet(std::vector<Match> matches) : matches_(std::move(matches))
{
    for (std::size_t i = 0; i < matches_.size(); ++i) {
        const auto& m = matches_[i];
        if (!std::isfinite(m.u1) || !std::isfinite(m.v1) || !std::isfinite(m.u2) || !std::isfinite(m.v2)) {
            throw ValidationError("MatchSet: non-finite coordinate in match " + std::to_string(i));
        }
        if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) {
            throw ValidationError("MatchSet: confidence outside [0,1] in match " + std::to_string(i));
        }
    }
}

MatchSet::MatchSet(std::vector<Match> matches, int ref_width, int ref_height, int tar_width, int tar_height)
    : MatchSet(std::move(matches))
{
    auto inside = [](double x, double y, int w, int h) { return x >= 0 && y >= 0 && x <= w - 1 && y <= h - 1; };
    for (std::size_t i = 0; i < matches_.size(); ++i) {
        const auto& m = matches_[i];
        if (!inside(m.u1, m.v1, ref_width, ref_height) || !inside(m.u2, m.v2, tar_width, tar_height)) {
            throw ValidationError("MatchSet: match " + std::to_string(i) + " outside image bounds");
        }
    }
}

Image::Image(int width, int height, std::vector<double> pixels) : width_(width), height_(height), px_(std::move(pixels))
{
    require_dims(width, height, "Image");
    require_size(px_.size(), static_cast<std::size_t>(width) * height, "Image", "pixels");
}

double Image::at_clamped(int u, int v) const noexcept
{
    return at(std::clamp(u, 0, width_ - 1), std::clamp(v, 0, height_ - 1));
}

Image grayscale_from_rgb(int width, int height, std::span<const double> rgb)
{
    require_dims(width, height, "grayscale_from_rgb");
    const auto n = static_cast<std::size_t>(width) * height;
    require_size(rgb.size(), 3 * n, "grayscale_from_rgb", "rgb");
    std::vector<double> gray(n);
    for (std::size_t i = 0; i < n; ++i) {
        gray[i] = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    }
    return {width, height, std::move(gray)};
}

FeatureMap::FeatureMap(int width, int height, int channels, std::vector<double> data, int scale_denominator)
    : width_(width), height_(height), channels_(channels), scale_den_(scale_denominator), data_(std::move(data))
{
    require_dims(width, height, "FeatureMap");
    if (channels < 1) {
        throw ArgumentError("FeatureMap: channel count must be >= 1");
    }
    if (scale_denominator < 1) {
        throw ArgumentError("FeatureMap: scale denominator must be >= 1");
    }
    require_size(data_.size(), static_cast<std::size_t>(width) * height * channels, "FeatureMap", "data");
    for (double x : data_) {
        if (!std::isfinite(x)) {
            throw ValidationError("FeatureMap: non-finite entry");
        }
    }
}

// ---------------------------------------------------------------------------

Eigen::Matrix3d Intrinsics::matrix() const
{
    Eigen::Matrix3d K;
    K << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
}

double orthonormality_error(const Eigen::Matrix3d& R)
{
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    return std::max(ortho, std::abs(R.determinant() - 1.0));
}

CameraModel::CameraModel(const Intrinsics& intrinsics, const Eigen::Matrix3d& R, const Eigen::Vector3d& T)
    : intrinsics_(intrinsics), R_(R), T_(T)
{
    if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
        throw ValidationError("CameraModel: focal lengths must be positive");
    }
    if (!std::isfinite(intrinsics.cx) || !std::isfinite(intrinsics.cy) || !std::isfinite(intrinsics.skew)
        || !std::isfinite(intrinsics.fx) || !std::isfinite(intrinsics.fy) || !R.allFinite() || !T.allFinite()) {
        throw ValidationError("CameraModel: non-finite parameter");
    }
    if (orthonormality_error(R) > kOrthonormalityTolerance) {
        throw ValidationError("CameraModel: rotation is not orthonormal with det +1");
    }
}

ProjectionResult PoseWarp::project(double u1, double v1, double z) const
{
    const Eigen::Vector3d h = H * Eigen::Vector3d(u1, v1, 1.0) * z + B;
    if (h.z() == 0.0) {
        throw ValidationError("PoseWarp::project: projective scale is zero");
    }
    return {h.x() / h.z(), h.y() / h.z(), h.z(), h.z() > 0.0};
}

PoseWarp compose_camera_pair(const CameraModel& cam1, const CameraModel& cam2)
{
    // R^-1 = R^T for the validated rotations held by CameraModel. B is
    // evaluated as K2 (T2 - R2 R1^-1 T1), the same expression factored.
    const Eigen::Matrix3d relative = cam2.R() * cam1.R().transpose();
    const Eigen::Matrix3d K2 = cam2.K();
    PoseWarp warp;
    warp.H = K2 * relative * cam1.K().inverse();
    warp.B = K2 * (cam2.T() - relative * cam1.T());
    return warp;
}

} // namespace corrkit
