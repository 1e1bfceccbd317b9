#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "sjko/helmholtz.hpp"

using namespace sjko;

namespace {

constexpr double kPi = std::numbers::pi;

using Fn2 = std::function<std::array<double, 2>(double, double)>;

VectorField sample(const Domain& d, const Fn2& f) {
    VectorField v = VectorField::zeros(d);
    for (std::size_t c = 0; c < d.size(); ++c) {
        const auto p = d.point(c);
        const auto u = f(p[0], p[1]);
        v.x[c] = u[0];
        v.y[c] = u[1];
    }
    v.fx.clear();
    v.fy.clear();
    return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double reconstruction_error(const HelmholtzSplit& s, const VectorField& U) {
    double m = 0.0;
    for (std::size_t c = 0; c < U.x.size(); ++c) {
        m = std::max(m, std::abs(-s.W.x[c] + s.gradV.x[c] - U.x[c]));
        if (!U.y.empty()) m = std::max(m, std::abs(-s.W.y[c] + s.gradV.y[c] - U.y[c]));
    }
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// V0 = sin x cos 2y, psi = cos x cos y on the 2 pi torus
std::array<double, 2> grad_v0(double x, double y) { return {std::cos(x) * std::cos(2 * y), -2 * std::sin(x) * std::sin(2 * y)}; }
std::array<double, 2> curl_psi(double x, double y) {
    // J grad psi with J(a, b) = (-b, a)
    return {std::cos(x) * std::sin(y), -std::sin(x) * std::cos(y)};
}

Domain torus(int n) { return Domain::box(0, 2 * kPi, n, 0, 2 * kPi, n, Boundary::periodic); }

}  // namespace

TEST_CASE("random smooth periodic field") {
    const Domain d = torus(64);
    std::mt19937 g(5);
    std::normal_distribution<double> a(0.0, 1.0);
    struct Mode {
        int kx, ky;
        double ax, bx, ay, by;
    };
    std::vector<Mode> modes;
    for (int kx = -3; kx <= 3; ++kx)
        for (int ky = -3; ky <= 3; ++ky) modes.push_back({kx, ky, a(g), a(g), a(g), a(g)});
    const VectorField U = sample(d, [&](double x, double y) {
        std::array<double, 2> u{0.0, 0.0};
        for (const auto& m : modes) {
            const double t = m.kx * x + m.ky * y;
            u[0] += m.ax * std::cos(t) + m.bx * std::sin(t);
            u[1] += m.ay * std::cos(t) + m.by * std::sin(t);
        }
        return u;
    });
    const HelmholtzSplit s = decompose(U);
    CHECK(reconstruction_error(s, U) <= 1e-8);
    CHECK(max_abs(divergence(s.W).values) <= 1e-10);
    CHECK(std::abs(inner_product(s.W, s.gradV)) <= 1e-8);
    CHECK(std::abs(mean(s.V.values)) <= 1e-12);

    SUBCASE("idempotent") {
        VectorField R = VectorField::zeros(d);
        for (std::size_t c = 0; c < d.size(); ++c) {
            R.x[c] = -s.W.x[c] + s.gradV.x[c];
            R.y[c] = -s.W.y[c] + s.gradV.y[c];
        }
        const HelmholtzSplit t = decompose(R);
        CHECK(max_diff(t.V.values, s.V.values) <= 1e-10);
        CHECK(max_diff(t.W.x, s.W.x) <= 1e-10);
        CHECK(max_diff(t.W.y, s.W.y) <= 1e-10);
    }
}

TEST_CASE("periodic constituents") {
    const Domain d = torus(48);
    SUBCASE("pure gradient") {
        const HelmholtzSplit s = decompose(sample(d, grad_v0));
        CHECK(max_abs(s.W.x) <= 1e-10);
        CHECK(max_abs(s.W.y) <= 1e-10);
        double m = 0.0;
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto p = d.point(c);
            m = std::max(m, std::abs(s.V.values[c] - std::sin(p[0]) * std::cos(2 * p[1])));
        }
        CHECK(m <= 1e-10);
    }
    SUBCASE("divergence free") {
        const VectorField U = sample(d, curl_psi);
        CHECK(max_abs(divergence(U).values) <= 1e-10);
        const HelmholtzSplit s = decompose(U);
        CHECK(max_abs(s.V.values) <= 1e-10);
        for (std::size_t c = 0; c < d.size(); ++c) {
            CHECK(s.W.x[c] == doctest::Approx(-U.x[c]).epsilon(1e-10));
            CHECK(s.W.y[c] == doctest::Approx(-U.y[c]).epsilon(1e-10));
        }
    }
    SUBCASE("sum") {
        const double w = 0.7;
        const HelmholtzSplit s = decompose(sample(d, [&](double x, double y) {
            const auto a = grad_v0(x, y), b = curl_psi(x, y);
            return std::array<double, 2>{a[0] + w * b[0], a[1] + w * b[1]};
        }));
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto p = d.point(c);
            const auto a = grad_v0(p[0], p[1]), b = curl_psi(p[0], p[1]);
            CHECK(std::abs(s.gradV.x[c] - a[0]) <= 1e-10);
            CHECK(std::abs(s.gradV.y[c] - a[1]) <= 1e-10);
            CHECK(std::abs(s.W.x[c] + w * b[0]) <= 1e-10);
            CHECK(std::abs(s.W.y[c] + w * b[1]) <= 1e-10);
        }
    }
}

TEST_CASE("noflux box") {
    // psi vanishes on the walls of [0,1]^2, so J grad psi is tangential
    const auto field = [](double x, double y) {
        const double gx = 2 * x * std::cos(3 * y), gy = -3 * x * x * std::sin(3 * y);
        const double px = kPi * std::cos(kPi * x) * std::sin(kPi * y), py = kPi * std::sin(kPi * x) * std::cos(kPi * y);
        return std::array<double, 2>{gx - py, gy + px};
    };
    double prev_err = INFINITY;
    for (int n : {32, 64}) {
        const Domain d = Domain::box(0, 1, n, 0, 1, n);
        const VectorField U = sample(d, field);
        const HelmholtzSplit s = decompose(U);
        const double dx = d.dx();
        const double err = reconstruction_error(s, U);
        const double div = max_abs(divergence(s.W).values);
        CHECK(err <= 50 * dx * dx);
        // face divergence of the projected field is exact up to the Poisson solve
        CHECK(div <= 1e-9);
        CHECK(std::abs(inner_product(s.W, s.gradV)) <= 10 * dx);
        CHECK(err < prev_err);
        prev_err = err;
        const int sx = n + 1;
        for (int iy = 0; iy < n; ++iy) {
            CHECK(s.W.fx[iy * sx] == 0.0);
            CHECK(s.W.fx[iy * sx + n] == 0.0);
        }
        for (int ix = 0; ix < n; ++ix) {
            CHECK(s.W.fy[ix] == 0.0);
            CHECK(s.W.fy[n * n + ix] == 0.0);
        }
    }
}

TEST_CASE("segments carry no divergence-free part") {
    double prev = INFINITY;
    for (int n : {100, 200}) {
        const Domain d = Domain::line(-2, 2, n);
        const VectorField U =
            sample(d, [](double x, double) { return std::array<double, 2>{std::sin(x) + x * x, 0.0}; });
        const HelmholtzSplit s = decompose(U);
        CHECK(s.W.is_zero());
        const double err = reconstruction_error(s, U);
        CHECK(err <= d.dx() * d.dx());
        CHECK(err < 0.3 * prev);
        prev = err;
    }
}

TEST_CASE("drift evaluation") {
    const Domain d = Domain::box(-2, 2, 20, -2, 2, 20);
    const GridMeasure rho = GridMeasure::from_function(d, [](double x, double y) {
        return std::exp(-((x - 0.3) * (x - 0.3) + 2 * (y + 0.2) * (y + 0.2)));
    });
    CHECK(evaluate_drift(DriftModel::zero(), rho).is_zero());

    SUBCASE("quadratic interaction is x - mean") {
        const VectorField U = evaluate_drift(DriftModel::interaction(KernelShape::quadratic, 1.0), rho);
        const auto m = mean_position(rho);
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto p = d.point(c);
            CHECK(U.x[c] == doctest::Approx(p[0] - m[0]).epsilon(1e-12));
            CHECK(U.y[c] == doctest::Approx(p[1] - m[1]).epsilon(1e-12));
        }
    }
    SUBCASE("gaussian interaction against direct quadrature") {
        const double w = 0.7;
        const VectorField U = evaluate_drift(DriftModel::interaction(KernelShape::gaussian, 1.5, w), rho);
        for (std::size_t c = 0; c < d.size(); c += 37) {
            const auto p = d.point(c);
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) {
                const auto q = d.point(j);
                const double rx = p[0] - q[0], ry = p[1] - q[1];
                // grad of -1.5 exp(-|r|^2 / (2 w^2))
                const double e = 1.5 * std::exp(-(rx * rx + ry * ry) / (2 * w * w)) / (w * w);
                gx += e * rx * rho[j] * d.cell_volume();
                gy += e * ry * rho[j] * d.cell_volume();
            }
            CHECK(U.x[c] == doctest::Approx(gx).epsilon(1e-10));
            CHECK(U.y[c] == doctest::Approx(gy).epsilon(1e-10));
        }
    }
    SUBCASE("rotation") {
        const double om = 1.3;
        const VectorField U = evaluate_drift(DriftModel::rotation(om), rho);
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto p = d.point(c);
            CHECK(U.x[c] == doctest::Approx(-om * p[1]));
            CHECK(U.y[c] == doctest::Approx(om * p[0]));
        }
    }
}

TEST_CASE("drift assumptions") {
    const Domain d = Domain::line(-4, 4, 128);
    std::vector<GridMeasure> probes;
    for (double c : {-1.0, 0.0, 0.5, 1.2})
        for (double s : {0.4, 0.8})
            probes.push_back(GridMeasure::from_function(
                d, [=](double x, double) { return std::exp(-(x - c) * (x - c) / (2 * s * s)); }));

    const DriftAssumptionReport z = check_drift_assumptions(DriftModel::zero(), probes);
    CHECK(z.grad_v_sup == 0.0);
    CHECK(z.semiconvexity == 0.0);
    CHECK(z.grad_v_l2 == 0.0);
    CHECK(z.lipschitz_v == 0.0);
    CHECK(z.lipschitz_w == 0.0);
    CHECK(z.w_growth == 0.0);

    // grad V[rho] - grad V[mu] = mean(mu) - mean(rho), bounded by W2
    const DriftAssumptionReport q = check_drift_assumptions(DriftModel::interaction(KernelShape::quadratic, 1.0), probes);
    CHECK(q.lipschitz_v > 0.0);
    CHECK(q.lipschitz_v <= 1.0 + 1e-6);
    CHECK(q.semiconvexity <= 1e-8);

    const Domain b = Domain::box(-2, 2, 24, -2, 2, 24, Boundary::periodic);
    std::vector<GridMeasure> p2{GridMeasure::from_function(
        b, [](double x, double y) { return std::exp(-((x - 0.5) * (x - 0.5) + y * y) / 0.18); })};
    const double om = 2.0;
    const DriftAssumptionReport r = check_drift_assumptions(DriftModel::rotation(om), p2);
    // |W| = om |x|, so |W| / (1 + |x|) stays below om and approaches it far out
    CHECK(r.w_growth <= om);
    CHECK(r.w_growth >= 0.5 * om);
}
