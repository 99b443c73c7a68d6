#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace outerlab {

/// Least-squares fit of log y = intercept + slope * log x.
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> radii;      // abscissae actually used
    std::vector<double> nu_values;  // ordinates actually used
    /// Two-sided 95% Student-t half-width of the slope.
    double confidence_halfwidth = 0.0;
};

/// Unweighted OLS on (log x, log y). Requires at least `min_points` pairs with x, y > 0.
ExponentFit fit_power_law(std::span<const double> x, std::span<const double> y, std::size_t min_points = 3);

/// Weighted variant; weights multiply squared residuals in log space.
ExponentFit fit_power_law_weighted(std::span<const double> x, std::span<const double> y,
                                   std::span<const double> weights, std::size_t min_points = 3);

}  // namespace outerlab
