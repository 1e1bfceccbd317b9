#pragma once

#include <span>
#include <string>

namespace sjko {

/// Least squares of log y against log x: y ~ C x^slope.
struct PowerFit {
    double slope = 0.0;
    double intercept = 0.0;  // log C
    double r2 = 0.0;
    int samples = 0;

    double constant() const;
    std::string to_json() const;
};

/// Pairs with a non-positive entry are skipped.
PowerFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace sjko
