#include <corrkit/geometry.hpp>

#include <cmath>
#include <limits>

namespace corrkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

DisparityMap flow_to_disparity(const DisplacementField& field, double v_tol)
{
    if (!(v_tol >= 0.0)) {
        throw ArgumentError("flow_to_disparity: v_tol must be >= 0");
    }
    const std::size_t n = field.size();
    std::vector<double> d(n, kNaN);
    Mask valid(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!field.valid_at(i)) {
            continue;
        }
        const double disp = -field.du_values()[i];
        if (std::abs(field.dv_values()[i]) <= v_tol && disp >= 0.0) {
            d[i] = disp + 0.0; // -0.0 -> +0.0
            valid[i] = 1;
        }
    }
    return {field.width(), field.height(), std::move(d), std::move(valid)};
}

DisplacementField disparity_to_flow(const DisparityMap& disparity)
{
    const std::size_t n = disparity.size();
    std::vector<double> du(n, kNaN), dv(n, kNaN);
    for (std::size_t i = 0; i < n; ++i) {
        if (disparity.valid_at(i)) {
            du[i] = -disparity.values()[i];
            dv[i] = 0.0;
        }
    }
    return {disparity.width(), disparity.height(), std::move(du), std::move(dv), disparity.mask()};
}

DisplacementField project_depth_to_flow(const DepthMap& depth, const CameraModel& cam_ref,
                                        const CameraModel& cam_tar, const ConversionTolerances& tol)
{
    const PoseWarp warp = compose_camera_pair(cam_ref, cam_tar);
    const int w = depth.width();
    const std::size_t n = depth.size();
    std::vector<double> du(n, kNaN), dv(n, kNaN);
    Mask valid(n, 0);
    for (int v = 0; v < depth.height(); ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = depth.index(u, v);
            if (!depth.valid_at(i)) {
                continue;
            }
            const Eigen::Vector3d h = warp.H * Eigen::Vector3d(u, v, 1.0) * depth.values()[i] + warp.B;
            if (!(h.z() > tol.eps_s)) {
                continue;
            }
            const double fu = h.x() / h.z() - u;
            const double fv = h.y() / h.z() - v;
            if (std::isfinite(fu) && std::isfinite(fv)) {
                du[i] = fu;
                dv[i] = fv;
                valid[i] = 1;
            }
        }
    }
    return {w, depth.height(), std::move(du), std::move(dv), std::move(valid)};
}

LsmSystem depth_system(const PoseWarp& warp, double u1, double v1, double u2, double v2)
{
    const Eigen::Matrix3d& H = warp.H;
    const Eigen::Vector3d& B = warp.B;
    const double row1 = H(0, 0) * u1 + H(0, 1) * v1 + H(0, 2);
    const double row2 = H(1, 0) * u1 + H(1, 1) * v1 + H(1, 2);
    const double row3 = H(2, 0) * u1 + H(2, 1) * v1 + H(2, 2);
    LsmSystem sys;
    sys.A = {row1 - row3 * u2, row2 - row3 * v2};
    sys.b = {B(2) * u2 - B(0), B(2) * v2 - B(1)};
    return sys;
}

DepthMap flow_to_depth(const DisplacementField& field, const CameraModel& cam_ref, const CameraModel& cam_tar,
                       DepthMode mode, const ConversionTolerances& tol)
{
    const PoseWarp warp = compose_camera_pair(cam_ref, cam_tar);
    const int w = field.width();
    const std::size_t n = field.size();
    std::vector<double> z(n, kNaN);
    Mask valid(n, 0);
    for (int v = 0; v < field.height(); ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = field.index(u, v);
            if (!field.valid_at(i)) {
                continue;
            }
            const LsmSystem sys = depth_system(warp, u, v, u + field.du_values()[i], v + field.dv_values()[i]);
            double depth = kNaN;
            switch (mode) {
            case DepthMode::Zu:
                if (std::abs(sys.A(0)) >= tol.eps_den) {
                    depth = sys.b(0) / sys.A(0);
                }
                break;
            case DepthMode::Zv:
                if (std::abs(sys.A(1)) >= tol.eps_den) {
                    depth = sys.b(1) / sys.A(1);
                }
                break;
            case DepthMode::Zlsm:
                if (sys.normal() >= tol.eps_den) {
                    depth = sys.solve();
                }
                break;
            }
            if (std::isfinite(depth) && depth > 0.0) {
                z[i] = depth;
                valid[i] = 1;
            }
        }
    }
    const DepthVariant variant =
        mode == DepthMode::Zu ? DepthVariant::Zu : (mode == DepthMode::Zv ? DepthVariant::Zv : DepthVariant::Zlsm);
    return {w, field.height(), std::move(z), std::move(valid), variant};
}

} // namespace corrkit
