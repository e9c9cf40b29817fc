#include <corrkit/evalkit.hpp>

#include <cmath>

namespace corrkit {

namespace {

void require_same_grid(const PixelGrid& a, const PixelGrid& b, const char* what)
{
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ArgumentError(std::string(what) + ": estimate and ground truth differ in size");
    }
}

MetricReport finish(const char* name, double sum, std::size_t count, Unit unit, bool percent)
{
    if (count == 0) {
        throw EvaluationError(std::string(name) + ": no jointly valid pixels");
    }
    const double value = percent ? 100.0 * sum / static_cast<double>(count) : sum / static_cast<double>(count);
    return {name, value, unit, count};
}

// Visits (error, gt magnitude) for every jointly valid pixel.
template <typename Visit>
std::size_t for_each_error(const DisplacementField& est, const DisplacementField& gt, Visit visit)
{
    require_same_grid(est, gt, "flow metric");
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!est.valid_at(i) || !gt.valid_at(i)) {
            continue;
        }
        const double eu = est.du_values()[i] - gt.du_values()[i];
        const double ev = est.dv_values()[i] - gt.dv_values()[i];
        const double gu = gt.du_values()[i];
        const double gv = gt.dv_values()[i];
        visit(std::sqrt(eu * eu + ev * ev), std::sqrt(gu * gu + gv * gv));
        ++count;
    }
    return count;
}

template <typename Visit>
std::size_t for_each_error(const DisparityMap& est, const DisparityMap& gt, Visit visit)
{
    require_same_grid(est, gt, "disparity metric");
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!est.valid_at(i) || !gt.valid_at(i)) {
            continue;
        }
        visit(std::abs(est.values()[i] - gt.values()[i]), std::abs(gt.values()[i]));
        ++count;
    }
    return count;
}

template <typename Field>
MetricReport epe_impl(const Field& est, const Field& gt)
{
    double sum = 0.0;
    const auto n = for_each_error(est, gt, [&](double e, double) { sum += e; });
    return finish("epe", sum, n, Unit::Pixel, false);
}

template <typename Field>
MetricReport bad_impl(const Field& est, const Field& gt, double tau)
{
    if (!(tau >= 0.0)) {
        throw ArgumentError("bad_tau: threshold must be >= 0");
    }
    double bad = 0.0;
    const auto n = for_each_error(est, gt, [&](double e, double) { bad += e > tau ? 1.0 : 0.0; });
    MetricReport r = finish("bad", bad, n, Unit::Percent, true);
    char name[48];
    std::snprintf(name, sizeof name, "bad_%g", tau);
    r.name = name;
    return r;
}

template <typename Field>
MetricReport pca_impl(const Field& est, const Field& gt, double tau)
{
    MetricReport r = bad_impl(est, gt, tau);
    r.value = 100.0 - r.value;
    char name[48];
    std::snprintf(name, sizeof name, "pca_%g", tau);
    r.name = name;
    return r;
}

template <typename Field>
MetricReport outlier_impl(const Field& est, const Field& gt, const char* name)
{
    double outliers = 0.0;
    const auto n = for_each_error(est, gt, [&](double e, double mag) {
        outliers += (e > 3.0 && e > 0.05 * mag) ? 1.0 : 0.0;
    });
    return finish(name, outliers, n, Unit::Percent, true);
}

} // namespace

const char* unit_name(Unit unit) noexcept
{
    switch (unit) {
    case Unit::Pixel:
        return "px";
    case Unit::Percent:
        return "%";
    case Unit::SceneUnits:
        return "scene";
    case Unit::Dimensionless:
        return "1";
    }
    return "?";
}

MetricReport epe(const DisplacementField& est, const DisplacementField& gt)
{
    return epe_impl(est, gt);
}

MetricReport epe(const DisparityMap& est, const DisparityMap& gt)
{
    return epe_impl(est, gt);
}

MetricReport bad_tau(const DisplacementField& est, const DisplacementField& gt, double tau)
{
    return bad_impl(est, gt, tau);
}

MetricReport bad_tau(const DisparityMap& est, const DisparityMap& gt, double tau)
{
    return bad_impl(est, gt, tau);
}

MetricReport pca_tau(const DisplacementField& est, const DisplacementField& gt, double tau)
{
    return pca_impl(est, gt, tau);
}

MetricReport pca_tau(const DisparityMap& est, const DisparityMap& gt, double tau)
{
    return pca_impl(est, gt, tau);
}

MetricReport d1_f1_all(const DisplacementField& est, const DisplacementField& gt)
{
    return outlier_impl(est, gt, "f1_all");
}

MetricReport d1_f1_all(const DisparityMap& est, const DisparityMap& gt)
{
    return outlier_impl(est, gt, "d1_all");
}

std::array<MetricReport, 4> depth_metrics(const DepthMap& est, const DepthMap& gt)
{
    require_same_grid(est, gt, "depth_metrics");
    double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, sq_log = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!est.valid_at(i) || !gt.valid_at(i)) {
            continue;
        }
        const double z = gt.values()[i];
        const double zh = est.values()[i];
        const double d = zh - z;
        abs_rel += std::abs(d) / z;
        sq_rel += d * d / z;
        sq += d * d;
        const double dl = std::log(zh) - std::log(z);
        sq_log += dl * dl;
        ++n;
    }
    if (n == 0) {
        throw EvaluationError("depth_metrics: no jointly valid pixels");
    }
    const double cnt = static_cast<double>(n);
    return {MetricReport{"abs_rel", abs_rel / cnt, Unit::Dimensionless, n},
            MetricReport{"sq_rel", sq_rel / cnt, Unit::SceneUnits, n},
            MetricReport{"rmse", std::sqrt(sq / cnt), Unit::SceneUnits, n},
            MetricReport{"rmse_log", std::sqrt(sq_log / cnt), Unit::Dimensionless, n}};
}

} // namespace corrkit
