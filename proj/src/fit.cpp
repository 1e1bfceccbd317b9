#include <cmath>
#include <vector>

#include <json.hpp>

#include "sjko/error.hpp"
#include "sjko/fit.hpp"

namespace sjko {

double PowerFit::constant() const { return std::exp(intercept); }

std::string PowerFit::to_json() const {
    nlohmann::json j{{"slope", slope}, {"constant", constant()}, {"r2", r2}, {"samples", samples}};
    return j.dump();
}

PowerFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit_power_law: size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    PowerFit f;
    f.samples = static_cast<int>(lx.size());
    if (f.samples < 2) return f;
    const double n = f.samples;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < f.samples; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < f.samples; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx <= 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

}  // namespace sjko
