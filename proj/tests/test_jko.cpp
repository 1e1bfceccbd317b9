#include <cmath>

#include <doctest.h>

#include "sjko/error.hpp"
#include "sjko/jko.hpp"
#include "sjko/oracles.hpp"

using namespace sjko;

namespace {

ScalarField potential(const Domain& d, double k) {
    ScalarField V = ScalarField::zeros(d);
    for (std::size_t c = 0; c < d.size(); ++c) {
        const auto p = d.point(c);
        V.values[c] = 0.5 * k * (p[0] * p[0] + p[1] * p[1]);
    }
    return V;
}

double dist(const GridMeasure& a, const GridMeasure& b) { return std::sqrt(std::max(0.0, w2_squared(a, b))); }

JKOOptions backend(JKOBackend b) {
    JKOOptions o;
    o.backend = b;
    return o;
}

}  // namespace

TEST_CASE("vanishing step is the identity") {
    const Domain d = Domain::line(-4, 4, 128);
    const GridMeasure r = oracle::heat(d, 0.5, {0.3, 0.0}, 0.0);
    const JKOStepResult s = jko_step(r, ScalarField::zeros(d), EnergySpec::entropy(), 1e-8);
    CHECK(dist(s.rho, r) <= 1e-4);

    const Domain b = Domain::box(-3, 3, 24, -3, 3, 24);
    const GridMeasure q = oracle::heat(b, 0.6, {0.3, -0.2}, 0.0);
    const JKOStepResult t = jko_step(q, potential(b, 1.0), EnergySpec::entropy(), 1e-8);
    CHECK(dist(t.rho, q) <= 1e-4);
}

TEST_CASE("one heat step") {
    const double s = 0.5, h = 1e-2;
    double prev_jko = INFINITY;
    for (int n : {256, 512}) {
        const Domain d = Domain::line(-4, 4, n);
        const GridMeasure r = oracle::heat(d, s, {0.0, 0.0}, 0.0);
        const JKOStepResult st = jko_step(r, ScalarField::zeros(d), EnergySpec::entropy(), h);
        CHECK(st.converged);
        CHECK_FALSE(st.fell_back);
        const double dx = d.dx();
        // heat semigroup at time h: first order in h
        CHECK(dist(st.rho, oracle::heat(d, s, {0.0, 0.0}, h)) <= 2 * h * h + dx * dx);
        // exact JKO minimizer over Gaussians
        const double sj = oracle::heat_jko_sigma(s, h);
        const double e = dist(st.rho, oracle::heat(d, sj, {0.0, 0.0}, 0.0));
        CHECK(e <= dx * dx);
        CHECK(e < prev_jko);
        prev_jko = e;
    }
}

TEST_CASE("relaxation to the stationary gaussian") {
    const Domain d = Domain::line(-5, 5, 200);
    const ScalarField V = potential(d, 1.0);
    const GridMeasure target = oracle::stationary(d, [](double x, double y) { return 0.5 * (x * x + y * y); });
    GridMeasure rho = oracle::heat(d, 0.4, {1.5, 0.0}, 0.0);
    double prev = dist(rho, target);
    JKOWarmStart warm;
    for (int k = 0; k < 20; ++k) {
        const JKOStepResult s = jko_step(rho, V, EnergySpec::entropy(), 0.1, {}, &warm);
        CHECK(s.objective <= jko_objective(rho, rho, V, EnergySpec::entropy(), 0.1) + 1e-12);
        rho = s.rho;
        const double e = dist(rho, target);
        CHECK(e < prev);
        prev = e;
    }
    // each step maps the mean m to m / (1 + h) for the quadratic potential
    CHECK(mean_position(rho)[0] == doctest::Approx(1.5 * std::pow(1.1, -20)).epsilon(1e-3));
}

TEST_CASE("Euler-Lagrange residual") {
    SUBCASE("uniform density, small step") {
        const Domain d = Domain::line(-1, 1, 64);
        const GridMeasure u = GridMeasure::uniform(d);
        const ScalarField V = ScalarField::zeros(d);
        const JKOStepResult s = jko_step(u, V, EnergySpec::entropy(), 1e-6);
        CHECK(euler_lagrange_residual(s, u, V, EnergySpec::entropy(), 1e-6) <= 1e-6);
    }
    SUBCASE("stationary gaussian under refinement") {
        double prev = INFINITY;
        for (int n : {128, 256, 512}) {
            const Domain d = Domain::line(-4, 4, n);
            const ScalarField V = potential(d, 1.0);
            const GridMeasure g = oracle::stationary(d, [](double x, double) { return 0.5 * x * x; });
            const JKOStepResult s = jko_step(g, V, EnergySpec::entropy(), 0.05);
            const double r = euler_lagrange_residual(s, g, V, EnergySpec::entropy(), 0.05);
            const double dx = d.dx();
            CHECK(r <= 2 * dx * dx + 1e-6);
            CHECK(r <= 0.5 * prev);
            prev = r;
        }
    }
}

TEST_CASE("competitor gap") {
    const Domain d = Domain::line(-4, 4, 128);
    const GridMeasure r = oracle::heat(d, 0.5, {0.5, 0.0}, 0.0);
    const ScalarField V = potential(d, 1.0);
    const EnergySpec E = EnergySpec::entropy();
    const double h = 0.05;
    CHECK(competitor_gap(JKOStepResult(r), r, V, E, h) == 0.0);
    const JKOStepResult s = jko_step(r, V, E, h);
    CHECK(s.converged);
    CHECK(competitor_gap(s, r, V, E, h) <= 1e-8);
    // a worse candidate: far from rho_tilde at little energy gain
    const JKOStepResult bad(oracle::heat(d, 0.5, {-1.5, 0.0}, 0.0));
    CHECK(competitor_gap(bad, r, V, E, h) > 0.0);
}

TEST_CASE("porous medium step") {
    const Domain d = Domain::line(-4, 4, 256);
    const oracle::Barenblatt b{1, 2.0, 1.0, 0.1, {0.0, 0.0}};
    const GridMeasure r = b.on(d, 0.0);
    const double h = 1e-3;
    const JKOStepResult s = jko_step(r, ScalarField::zeros(d), EnergySpec::power(2.0), h);
    CHECK(s.converged);
    CHECK(std::abs(s.rho.mass() - 1.0) <= 1e-12);
    for (double v : s.rho.values()) CHECK(v >= 0.0);
    CHECK(dist(s.rho, b.on(d, h)) <= h);
}

TEST_CASE("backends agree in 1D") {
    const Domain d = Domain::line(-4, 4, 128);
    const GridMeasure r = oracle::heat(d, 0.6, {0.4, 0.0}, 0.0);
    const ScalarField V = potential(d, 1.0);
    const EnergySpec E = EnergySpec::entropy();
    const double h = 0.05;
    const JKOOptions qo = backend(JKOBackend::quantile_1d), eo = backend(JKOBackend::entropic_prox);
    const JKOStepResult q = jko_step(r, V, E, h, qo);
    const JKOStepResult e = jko_step(r, V, E, h, eo);
    CHECK(q.backend == JKOBackend::quantile_1d);
    CHECK(e.backend == JKOBackend::entropic_prox);
    const double eps = d.dx() * d.dx();
    CHECK(dist(q.rho, e.rho) <= 5 * (eps + eo.tol));
}

TEST_CASE("different starts reach the same minimizer") {
    const Domain d = Domain::line(-4, 4, 128);
    const GridMeasure r = oracle::heat(d, 0.6, {0.4, 0.0}, 0.0);
    const ScalarField V = potential(d, 1.0);
    const EnergySpec E = EnergySpec::entropy();
    const JKOStepResult cold = jko_step(r, V, E, 0.05);
    JKOWarmStart warm;
    // nodes from an unrelated problem
    jko_step(oracle::heat(d, 0.3, {-1.0, 0.0}, 0.0), V, E, 0.05, {}, &warm);
    const JKOStepResult hot = jko_step(r, V, E, 0.05, {}, &warm);
    CHECK(dist(cold.rho, hot.rho) <= 1e-6);
}

TEST_CASE("h0 guard") {
    const Domain d = Domain::line(-4, 4, 64);
    JKOOptions o;
    o.h0 = 0.1;
    const GridMeasure r = GridMeasure::uniform(d);
    CHECK_THROWS_AS(jko_step(r, ScalarField::zeros(d), EnergySpec::entropy(), 0.2, o), Error);
    CHECK_NOTHROW(jko_step(r, ScalarField::zeros(d), EnergySpec::entropy(), 0.05, o));
}
