#pragma once

#include <array>
#include <functional>

#include "sjko/measures.hpp"

namespace sjko::oracle {

/// Heat kernel for d_t rho = nu Lap rho from a Gaussian of variance s0^2:
/// exact cell averages, with mirror images on noflux walls and periodic images otherwise.
GridMeasure heat(const Domain& d, double s0, std::array<double, 2> center, double t, double nu = 1.0);

/// Barenblatt solution of d_t rho = Lap P(rho) for F = nu s^m, P = nu (m-1) s^m,
/// shifted by t0 so that it is compactly supported at t = 0. Unit mass, centered at c.
struct Barenblatt {
    int dim = 1;
    double m = 2.0;
    double nu = 1.0;
    double t0 = 0.1;
    std::array<double, 2> center{0.0, 0.0};

    double alpha() const;
    double beta() const;
    double k() const;
    double C() const;  // from unit mass
    double support_radius(double t) const;
    double operator()(double t, double x, double y = 0.0) const;
    GridMeasure on(const Domain& d, double t) const;
};

/// Normalized exp(-V0 / nu) on the grid (cell averages).
GridMeasure stationary(const Domain& d, const std::function<double(double, double)>& V0, double nu = 1.0);

/// Exact rigid rotation of f by angle omega t about c, wrapped onto a periodic box.
GridMeasure rotated(const Domain& d, const std::function<double(double, double)>& f, double omega,
                    std::array<double, 2> c, double t);

/// One JKO step of the 1D heat flow from N(0, s^2): the minimizer is N(0, s'^2)
/// with s' = (s + sqrt(s^2 + 4 h nu)) / 2.
double heat_jko_sigma(double s, double h, double nu = 1.0);

}  // namespace sjko::oracle
