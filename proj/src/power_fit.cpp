#include "outerlab/power_fit.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <string>

#include "outerlab/errors.hpp"

namespace outerlab {

ExponentFit fit_power_law_weighted(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> weights, std::size_t min_points) {
    if (x.size() != y.size() || x.size() != weights.size())
        throw DomainError("fit_power_law: abscissa, ordinate and weight lengths differ");
    if (x.size() < std::max<std::size_t>(min_points, 3))
        throw DomainError("fit_power_law: need at least " + std::to_string(std::max<std::size_t>(min_points, 3)) +
                          " points, got " + std::to_string(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !(weights[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw DomainError("fit_power_law: abscissae, ordinates and weights must be positive and finite");
    }
    const std::size_t k = x.size();
    double sw = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        sw += weights[i];
        mx += weights[i] * std::log(x[i]);
        my += weights[i] * std::log(y[i]);
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = std::log(x[i]) - mx;
        const double dy = std::log(y[i]) - my;
        sxx += weights[i] * dx * dx;
        sxy += weights[i] * dx * dy;
        syy += weights[i] * dy * dy;
    }
    if (!(sxx > 0.0)) throw DomainError("fit_power_law: abscissae must not all coincide");

    ExponentFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double r = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
        sse += weights[i] * r * r;
    }
    // Exact fits leave rounding-level residuals; treat them as zero.
    if (sse <= 1e-24 * std::max(1.0, syy)) sse = 0.0;
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : (sse == 0.0 ? 1.0 : 0.0);
    const double dof = static_cast<double>(k - 2);
    const double se_slope = std::sqrt(sse / dof / sxx);
    const boost::math::students_t dist(dof);
    fit.confidence_halfwidth = boost::math::quantile(boost::math::complement(dist, 0.025)) * se_slope;
    fit.radii.assign(x.begin(), x.end());
    fit.nu_values.assign(y.begin(), y.end());
    return fit;
}

ExponentFit fit_power_law(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
    const std::vector<double> ones(x.size(), 1.0);
    return fit_power_law_weighted(x, y, ones, min_points);
}

}  // namespace outerlab
