#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <limits>

namespace oracle {

namespace {

double uni(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p)
{
    return p > 0.0 && uni(rng, 0.0, 1.0) < p;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

DisplacementField random_field(int w, int h, std::mt19937_64& rng, double range, double invalid_fraction)
{
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> du(n), dv(n);
    corrkit::Mask valid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        du[i] = uni(rng, -range, range);
        dv[i] = uni(rng, -range, range);
        if (coin(rng, invalid_fraction)) {
            valid[i] = 0;
            du[i] = dv[i] = kNaN;
        }
    }
    return {w, h, std::move(du), std::move(dv), std::move(valid)};
}

DisparityMap random_disparity(int w, int h, std::mt19937_64& rng, double max_d, double invalid_fraction)
{
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> d(n);
    corrkit::Mask valid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        d[i] = uni(rng, 0.0, max_d);
        if (coin(rng, invalid_fraction)) {
            valid[i] = 0;
            d[i] = kNaN;
        }
    }
    return {w, h, std::move(d), std::move(valid)};
}

DepthMap random_depth(int w, int h, std::mt19937_64& rng, double lo, double hi, double invalid_fraction)
{
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> z(n);
    corrkit::Mask valid(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = uni(rng, lo, hi);
        if (coin(rng, invalid_fraction)) {
            valid[i] = 0;
            z[i] = kNaN;
        }
    }
    return {w, h, std::move(z), std::move(valid)};
}

corrkit::FeatureMap random_features(int w, int h, int c, std::mt19937_64& rng, int scale_denominator)
{
    std::vector<double> data(static_cast<std::size_t>(w) * h * c);
    for (auto& x : data) x = uni(rng, -1.0, 1.0);
    return {w, h, c, std::move(data), scale_denominator};
}

Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& w)
{
    const double theta = w.norm();
    if (theta == 0.0) return Eigen::Matrix3d::Identity();
    const Eigen::Vector3d k = w / theta;
    Eigen::Matrix3d K;
    K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
    return Eigen::Matrix3d::Identity() + std::sin(theta) * K + (1.0 - std::cos(theta)) * K * K;
}

corrkit::CameraModel Pinhole::model() const
{
    return corrkit::CameraModel(corrkit::Intrinsics{fx, fy, cx, cy, skew}, R, T);
}

std::pair<Pinhole, Pinhole> random_camera_pair(std::mt19937_64& rng, int w, int h)
{
    auto intr = [&](Pinhole& c) {
        c.fx = uni(rng, 0.8, 1.5) * w;
        c.fy = c.fx * uni(rng, 0.95, 1.05);
        c.cx = w / 2.0 + uni(rng, -2.0, 2.0);
        c.cy = h / 2.0 + uni(rng, -2.0, 2.0);
        c.skew = uni(rng, -0.5, 0.5);
    };
    Pinhole a{}, b{};
    intr(a);
    intr(b);
    a.R = rotation_from_axis_angle({uni(rng, -0.05, 0.05), uni(rng, -0.05, 0.05), uni(rng, -0.05, 0.05)});
    a.T = Eigen::Vector3d(uni(rng, -0.2, 0.2), uni(rng, -0.2, 0.2), uni(rng, -0.2, 0.2));
    b.R = rotation_from_axis_angle({uni(rng, -0.08, 0.08), uni(rng, -0.08, 0.08), uni(rng, -0.08, 0.08)}) * a.R;
    // Baseline mostly in the image plane, never along a single axis.
    Eigen::Vector3d dir(uni(rng, 0.3, 1.0) * (coin(rng, 0.5) ? 1 : -1), uni(rng, 0.3, 1.0) * (coin(rng, 0.5) ? 1 : -1),
                        uni(rng, -0.3, 0.3));
    const Eigen::Vector3d rel_t = dir.normalized() * uni(rng, 0.2, 1.0);
    // relative motion x2 = Rrel x1 + rel_t with Rrel = Rb Ra^T
    b.T = b.R * a.R.transpose() * a.T + rel_t;
    return {a, b};
}

Eigen::Vector3d back_project(const Pinhole& cam, double u, double v, double z)
{
    // invert K by hand: y = (v - cy) / fy, x = (u - cx - skew*y) / fx
    const double y = (v - cam.cy) / cam.fy;
    const double x = (u - cam.cx - cam.skew * y) / cam.fx;
    const Eigen::Vector3d Xc(x * z, y * z, z);
    return cam.R.transpose() * (Xc - cam.T);
}

Eigen::Vector3d project(const Pinhole& cam, const Eigen::Vector3d& X)
{
    const Eigen::Vector3d Xc = cam.R * X + cam.T;
    const double x = Xc.x() / Xc.z();
    const double y = Xc.y() / Xc.z();
    return {cam.fx * x + cam.skew * y + cam.cx, cam.fy * y + cam.cy, Xc.z()};
}

Eigen::Matrix3d fundamental_from_cameras(const Pinhole& c1, const Pinhole& c2)
{
    const Eigen::Matrix3d R = c2.R * c1.R.transpose();
    const Eigen::Vector3d t = c2.T - R * c1.T;
    Eigen::Matrix3d tx;
    tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
    Eigen::Matrix3d K1, K2;
    K1 << c1.fx, c1.skew, c1.cx, 0, c1.fy, c1.cy, 0, 0, 1;
    K2 << c2.fx, c2.skew, c2.cx, 0, c2.fy, c2.cy, 0, 0, 1;
    return K2.inverse().transpose() * tx * R * K1.inverse();
}

// ---- metric loops ------------------------------------------------------------

double naive_epe(const DisplacementField& est, const DisplacementField& gt)
{
    double sum = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v) {
        for (int u = 0; u < gt.width(); ++u) {
            if (!est.valid(u, v) || !gt.valid(u, v)) continue;
            const double a = est.du(u, v) - gt.du(u, v);
            const double b = est.dv(u, v) - gt.dv(u, v);
            sum += std::sqrt(a * a + b * b);
            ++n;
        }
    }
    return sum / n;
}

double naive_bad(const DisplacementField& est, const DisplacementField& gt, double tau)
{
    double bad = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v) {
        for (int u = 0; u < gt.width(); ++u) {
            if (!est.valid(u, v) || !gt.valid(u, v)) continue;
            const double a = est.du(u, v) - gt.du(u, v);
            const double b = est.dv(u, v) - gt.dv(u, v);
            if (std::sqrt(a * a + b * b) > tau) bad += 1.0;
            ++n;
        }
    }
    return 100.0 * bad / n;
}

double naive_f1(const DisplacementField& est, const DisplacementField& gt)
{
    double bad = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v) {
        for (int u = 0; u < gt.width(); ++u) {
            if (!est.valid(u, v) || !gt.valid(u, v)) continue;
            const double a = est.du(u, v) - gt.du(u, v);
            const double b = est.dv(u, v) - gt.dv(u, v);
            const double err = std::sqrt(a * a + b * b);
            const double mag = std::sqrt(gt.du(u, v) * gt.du(u, v) + gt.dv(u, v) * gt.dv(u, v));
            if (err > 3.0 && err > 0.05 * mag) bad += 1.0;
            ++n;
        }
    }
    return 100.0 * bad / n;
}

double naive_epe(const DisparityMap& est, const DisparityMap& gt)
{
    double sum = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v)
        for (int u = 0; u < gt.width(); ++u)
            if (est.valid(u, v) && gt.valid(u, v)) {
                sum += std::abs(est.d(u, v) - gt.d(u, v));
                ++n;
            }
    return sum / n;
}

double naive_bad(const DisparityMap& est, const DisparityMap& gt, double tau)
{
    double bad = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v)
        for (int u = 0; u < gt.width(); ++u)
            if (est.valid(u, v) && gt.valid(u, v)) {
                if (std::abs(est.d(u, v) - gt.d(u, v)) > tau) bad += 1.0;
                ++n;
            }
    return 100.0 * bad / n;
}

double naive_d1(const DisparityMap& est, const DisparityMap& gt)
{
    double bad = 0.0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v)
        for (int u = 0; u < gt.width(); ++u)
            if (est.valid(u, v) && gt.valid(u, v)) {
                const double err = std::abs(est.d(u, v) - gt.d(u, v));
                if (err > 3.0 && err > 0.05 * std::abs(gt.d(u, v))) bad += 1.0;
                ++n;
            }
    return 100.0 * bad / n;
}

std::array<double, 4> naive_depth(const DepthMap& est, const DepthMap& gt)
{
    double a = 0, b = 0, c = 0, d = 0;
    int n = 0;
    for (int v = 0; v < gt.height(); ++v)
        for (int u = 0; u < gt.width(); ++u)
            if (est.valid(u, v) && gt.valid(u, v)) {
                const double z = gt.z(u, v), zh = est.z(u, v);
                a += std::abs(zh - z) / z;
                b += (zh - z) * (zh - z) / z;
                c += (zh - z) * (zh - z);
                d += (std::log(zh) - std::log(z)) * (std::log(zh) - std::log(z));
                ++n;
            }
    return {a / n, b / n, std::sqrt(c / n), std::sqrt(d / n)};
}

double naive_sampson(const Eigen::Matrix3d& F, double u1, double v1, double u2, double v2)
{
    double Fx[3], Ftx[3];
    const double x1[3] = {u1, v1, 1.0}, x2[3] = {u2, v2, 1.0};
    double e = 0.0;
    for (int i = 0; i < 3; ++i) {
        Fx[i] = F(i, 0) * x1[0] + F(i, 1) * x1[1] + F(i, 2) * x1[2];
        Ftx[i] = F(0, i) * x2[0] + F(1, i) * x2[1] + F(2, i) * x2[2];
    }
    for (int i = 0; i < 3; ++i) e += x2[i] * Fx[i];
    return std::abs(e) / std::sqrt(Fx[0] * Fx[0] + Fx[1] * Fx[1] + Ftx[0] * Ftx[0] + Ftx[1] * Ftx[1]);
}

// ---- matcher -----------------------------------------------------------------

std::vector<std::pair<int, int>> brute_force_match(const corrkit::FeatureMap& ref, const corrkit::FeatureMap& tar,
                                                   int du_min, int du_max, int dv_min, int dv_max,
                                                   std::vector<double>* scores)
{
    const int w = ref.width(), h = ref.height(), c = ref.channels();
    std::vector<std::pair<int, int>> best(static_cast<std::size_t>(w) * h);
    if (scores) scores->clear();
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            double top = -std::numeric_limits<double>::infinity();
            int bu = 0, bv = 0;
            for (int dv = dv_min; dv <= dv_max; ++dv) {
                for (int du = du_min; du <= du_max; ++du) {
                    double s;
                    const int u2 = u + du, v2 = v + dv;
                    if (u2 < 0 || v2 < 0 || u2 >= tar.width() || v2 >= tar.height()) {
                        s = -1.0;
                    } else {
                        double dot = 0, na = 0, nb = 0;
                        for (int k = 0; k < c; ++k) {
                            const double a = ref.at(u, v)[k], b = tar.at(u2, v2)[k];
                            dot += a * b;
                            na += a * a;
                            nb += b * b;
                        }
                        s = (na == 0 || nb == 0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
                    }
                    if (scores) scores->push_back(s);
                    const int m = du * du + dv * dv, bm = bu * bu + bv * bv;
                    const bool better = s > top
                                        || (s == top
                                            && (m < bm || (m == bm && (du < bu || (du == bu && dv < bv)))));
                    if (better) {
                        top = s;
                        bu = du;
                        bv = dv;
                    }
                }
            }
            best[static_cast<std::size_t>(v) * w + u] = {bu, bv};
        }
    }
    return best;
}

// ---- stereo scenes -----------------------------------------------------------

Stereogram random_dot_stereogram(int w, int h, int shift, double occlusion_fraction, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto dot = [&] { return std::floor(uni(rng, 0.0, 256.0)) / 255.0; }; // 8-bit levels
    std::vector<double> L(static_cast<std::size_t>(w) * h), R(L.size());
    for (auto& x : L) x = dot();
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u)
            R[static_cast<std::size_t>(v) * w + u] = u + shift < w ? L[static_cast<std::size_t>(v) * w + u + shift] : dot();

    // square-ish block in the interior of the left view
    const int side = static_cast<int>(std::lround(std::sqrt(occlusion_fraction * w * h)));
    const int bu = (w - side) / 2 + shift, bv = (h - side) / 2;
    std::vector<double> d(L.size(), static_cast<double>(shift));
    corrkit::Mask valid(L.size(), 1);
    int occluded = 0;
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * w + u;
            const bool in_block = u >= bu && u < bu + side && v >= bv && v < bv + side;
            if (in_block) {
                R[static_cast<std::size_t>(v) * w + (u - shift)] = dot();
                ++occluded;
            }
            if (in_block || u < shift) {
                valid[i] = 0;
                d[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return {corrkit::Image(w, h, L), corrkit::Image(w, h, R), DisparityMap(w, h, std::move(d), std::move(valid)),
            occluded};
}

void write_pgm(const std::string& path, const corrkit::Image& image)
{
    std::ofstream os(path, std::ios::binary);
    os << "P5\n" << image.width() << " " << image.height() << "\n255\n";
    for (double x : image.pixels()) {
        os.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::min(1.0, std::max(0.0, x)) * 255.0))));
    }
}

EpipolarScene epipolar_scene(std::mt19937_64& rng, int n, double outlier_fraction)
{
    const int W = 320, H = 240;
    const auto [a, b] = random_camera_pair(rng, W, H);
    std::uniform_real_distribution<double> U(0, W - 1), V(0, H - 1), Z(3, 30);
    EpipolarScene s{{}, 0, fundamental_from_cameras(a, b)};
    while (static_cast<int>(s.matches.size()) < n) {
        const double u = U(rng), v = V(rng);
        const auto x = project(b, back_project(a, u, v, Z(rng)));
        if (x.z() <= 0 || x.x() < 0 || x.x() > W - 1 || x.y() < 0 || x.y() > H - 1) continue;
        s.matches.push_back({u, v, x.x(), x.y(), 1.0});
    }
    s.outliers = static_cast<int>(std::round(outlier_fraction * n));
    for (int i = 0; i < s.outliers; ++i) s.matches[i] = {U(rng), V(rng), U(rng), V(rng), 1.0};
    return s;
}

OcclusionScene occlusion_scene(int w, int h, int x0, int y0, int side)
{
    const int n = w * h;
    std::vector<double> fu(n), fv(n), bu(n), bv(n);
    corrkit::Mask ones(n, 1), occ(n, 0), cov(n, 0);
    auto in_square = [&](int u, int v, int ox, int oy) {
        return u >= x0 + ox && u < x0 + ox + side && v >= y0 + oy && v < y0 + oy + side;
    };
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            const int i = v * w + u;
            const bool fg = in_square(u, v, 0, 0);
            fu[i] = fg ? 6 : 1;
            fv[i] = fg ? 3 : 0;
            const bool fg2 = in_square(u, v, 6, 3);
            bu[i] = fg2 ? -6 : -1;
            bv[i] = fg2 ? -3 : 0;
            const int tu = u + static_cast<int>(fu[i]), tv = v + static_cast<int>(fv[i]);
            if (tu >= w || tv >= h) continue;
            if (!fg && in_square(tu, tv, 6, 3))
                occ[i] = 1;
            else
                cov[i] = 1;
        }
    return {DisplacementField(w, h, fu, fv, ones), DisplacementField(w, h, bu, bv, ones), occ, cov};
}


} // namespace oracle
