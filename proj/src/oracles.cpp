#include <cmath>
#include <numbers>
#include <vector>

#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"
#include "sjko/oracles.hpp"

namespace sjko::oracle {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// mass of N(c, s^2) and its images in each cell along one axis
std::vector<double> axis_masses(const Domain& d, int axis, double c, double s) {
    const int n = d.cells[axis];
    const double lo = d.lo[axis], L = d.length(axis);
    std::vector<double> centers;
    const int K = 2 + static_cast<int>(std::ceil(10.0 * s / L));
    for (int j = -K; j <= K; ++j) {
        if (d.boundary == Boundary::periodic) {
            centers.push_back(c + j * L);
        } else {
            centers.push_back(c + 2.0 * j * L);
            centers.push_back(2.0 * lo - c + 2.0 * j * L);
        }
    }
    std::vector<double> m(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double a = d.face(axis, i), b = d.face(axis, i + 1);
        double acc = 0.0;
        for (double cc : centers) acc += normal_cdf((b - cc) / s) - normal_cdf((a - cc) / s);
        m[i] = acc;
    }
    return m;
}

}  // namespace

GridMeasure heat(const Domain& d, double s0, std::array<double, 2> center, double t, double nu) {
    require(s0 > 0.0 && t >= 0.0 && nu > 0.0, "heat oracle: need s0 > 0, t >= 0, nu > 0");
    const double s = std::sqrt(s0 * s0 + 2.0 * nu * t);
    const std::vector<double> mx = axis_masses(d, 0, center[0], s);
    const std::vector<double> my = d.dim == 2 ? axis_masses(d, 1, center[1], s) : std::vector<double>{1.0};
    std::vector<double> dens(d.size());
    for (int iy = 0; iy < d.ny(); ++iy)
        for (int ix = 0; ix < d.nx(); ++ix) dens[d.index(ix, iy)] = mx[ix] * my[iy] / d.cell_volume();
    return GridMeasure::from_density(d, std::move(dens));
}

double Barenblatt::alpha() const { return dim / (dim * (m - 1.0) + 2.0); }
double Barenblatt::beta() const { return alpha() / dim; }
double Barenblatt::k() const { return alpha() * (m - 1.0) / (2.0 * m * dim); }

double Barenblatt::C() const {
    require(m > 1.0 && (dim == 1 || dim == 2), "Barenblatt: need m > 1 and dim 1 or 2");
    const double p = 1.0 / (m - 1.0);
    // mass of (C - k|y|^2)_+^p is a * C^e
    double a, e;
    if (dim == 1) {
        a = std::sqrt(std::numbers::pi) * std::tgamma(p + 1.0) / std::tgamma(p + 1.5) / std::sqrt(k());
        e = p + 0.5;
    } else {
        a = std::numbers::pi / (k() * (p + 1.0));
        e = p + 1.0;
    }
    return std::pow(1.0 / a, 1.0 / e);
}

double Barenblatt::support_radius(double t) const {
    const double tau = nu * (m - 1.0) * (t + t0);
    return std::sqrt(C() / k()) * std::pow(tau, beta());
}

double Barenblatt::operator()(double t, double x, double y) const {
    const double tau = nu * (m - 1.0) * (t + t0);
    const double dx = x - center[0], dy = dim == 2 ? y - center[1] : 0.0;
    const double q = C() - k() * (dx * dx + dy * dy) * std::pow(tau, -2.0 * beta());
    if (q <= 0.0) return 0.0;
    return std::pow(tau, -alpha()) * std::pow(q, 1.0 / (m - 1.0));
}

GridMeasure Barenblatt::on(const Domain& d, double t) const {
    require(d.dim == dim, "Barenblatt: dimension mismatch");
    if (dim == 2) return GridMeasure::from_function(d, [&](double x, double y) { return (*this)(t, x, y); });
    // split the cells at the free boundary so the quadrature sees a smooth piece
    using GL = detail::GaussLegendre<5>;
    const double R = support_radius(t);
    const double cuts[2] = {center[0] - R, center[0] + R};
    std::vector<double> dens(d.nx());
    for (int i = 0; i < d.nx(); ++i) {
        std::vector<double> pts{d.face(0, i)};
        for (double c : cuts)
            if (c > pts.front() && c < d.face(0, i + 1)) pts.push_back(c);
        pts.push_back(d.face(0, i + 1));
        double acc = 0.0;
        for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
            const double len = pts[p + 1] - pts[p];
            for (int q = 0; q < 5; ++q) acc += GL::weights[q] * len * (*this)(t, pts[p] + GL::nodes[q] * len);
        }
        dens[i] = acc / d.dx(0);
    }
    return GridMeasure::from_density(d, std::move(dens));
}

GridMeasure stationary(const Domain& d, const std::function<double(double, double)>& V0, double nu) {
    require(nu > 0.0, "stationary oracle: nu must be positive");
    return GridMeasure::from_function(d, [&](double x, double y) { return std::exp(-V0(x, y) / nu); });
}

GridMeasure rotated(const Domain& d, const std::function<double(double, double)>& f, double omega,
                    std::array<double, 2> c, double t) {
    const double ca = std::cos(omega * t), sa = std::sin(omega * t);
    return GridMeasure::from_function(d, [&](double x, double y) {
        const double u = x - c[0], v = y - c[1];
        return f(c[0] + ca * u + sa * v, c[1] - sa * u + ca * v);
    });
}

double heat_jko_sigma(double s, double h, double nu) { return 0.5 * (s + std::sqrt(s * s + 4.0 * h * nu)); }

}  // namespace sjko::oracle
