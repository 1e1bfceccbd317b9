#include <cmath>
#include <vector>

#include <doctest.h>

#include "sjko/error.hpp"
#include "sjko/oracles.hpp"
#include "sjko/scheme.hpp"

using namespace sjko;

namespace {

double dist(const GridMeasure& a, const GridMeasure& b) { return std::sqrt(std::max(0.0, w2_squared(a, b))); }

double linf(const GridMeasure& a, const GridMeasure& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

SchemeConfig heat_config(double h, double T) {
    SchemeConfig c;
    c.h = h;
    c.T = T;
    return c;
}

}  // namespace

TEST_CASE("horizon is a whole number of steps") {
    SchemeConfig c = heat_config(0.03, 0.1);
    CHECK(c.steps() == 4);
    CHECK(c.horizon() == doctest::Approx(0.12));
    c.T = 0.09;
    CHECK(c.steps() == 3);
    c.h = -1.0;
    CHECK_THROWS_AS(c.steps(), Error);

    const Domain d = Domain::line(-4, 4, 64);
    const SchemeTrajectory tr = run_scheme(oracle::heat(d, 0.5, {0, 0}, 0.0), heat_config(0.03, 0.1));
    CHECK(tr.steps() == 4);
    CHECK(tr.T == doctest::Approx(0.12));
    CHECK(tr.rho.size() == 5);
    CHECK(tr.tilde.size() == 5);
}

TEST_CASE("heat flow tracks the heat kernel") {
    const Domain d = Domain::line(-4, 4, 256);
    const double T = 0.1;
    double prev = INFINITY;
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const SchemeTrajectory tr = run_scheme(oracle::heat(d, 0.5, {0, 0}, 0.0), heat_config(h, T));
        double err = 0.0;
        for (int k = 0; k <= tr.steps(); ++k) err = std::max(err, dist(tr.rho[k], oracle::heat(d, 0.5, {0, 0}, k * h)));
        for (const auto& r : tr.records) {
            CHECK(r.converged);
            CHECK_FALSE(r.fell_back);
            // U = 0: the transport half-step is the identity
            CHECK(r.w2_transport == 0.0);
            CHECK(r.energy_after <= r.energy_before + 1e-12);
        }
        CHECK(err <= 5 * h);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("rotation leaves a radial density in place") {
    const Domain d = Domain::box(-2, 2, 64, -2, 2, 64, Boundary::periodic);
    SchemeConfig c = heat_config(0.05, 0.5);
    c.drift = DriftModel::rotation(1.0);
    c.transport_only = true;
    c.record_transport_w2 = false;
    c.record_step_w2 = false;
    const GridMeasure r0 = oracle::heat(d, 0.5, {0, 0}, 0.0);
    const SchemeTrajectory tr = run_scheme(r0, c);
    const EnergySpec E = EnergySpec::entropy();
    CHECK(linf(tr.rho.back(), r0) <= 1e-3 * linf(r0, GridMeasure::uniform(d)));
    CHECK(std::abs(internal_energy(E, tr.rho.back()) - internal_energy(E, r0)) <= 1e-4);
    for (const auto& r : tr.records) CHECK(std::abs(r.mass_drift) <= 1e-6);
}

TEST_CASE("self-convergence in h") {
    // aggregation-diffusion without a closed form: compare against a fine-step run
    const Domain d = Domain::line(-4, 4, 128);
    const GridMeasure r0 = oracle::heat(d, 0.6, {0.5, 0}, 0.0);
    auto at_T = [&](double h) {
        SchemeConfig c = heat_config(h, 0.08);
        c.drift = DriftModel::interaction(KernelShape::quadratic, 1.0);
        c.record_transport_w2 = false;
        c.record_step_w2 = false;
        return run_scheme(r0, c).rho.back();
    };
    const GridMeasure ref = at_T(1e-3);
    const double e1 = dist(at_T(8e-3), ref), e2 = dist(at_T(4e-3), ref);
    CHECK(e2 < e1);
    CHECK(e2 <= 0.75 * e1);
}

TEST_CASE("a single-species system is the plain scheme") {
    const Domain d = Domain::line(-4, 4, 96);
    const GridMeasure r0 = oracle::heat(d, 0.5, {0.3, 0}, 0.0);
    SchemeConfig c = heat_config(0.01, 0.05);
    c.drift = DriftModel::interaction(KernelShape::gaussian, 0.5, 0.7);
    const SchemeTrajectory one = run_scheme(r0, c);
    SystemConfig sc;
    sc.base = c;
    sc.species = {SpeciesSpec{c.energy, c.drift}};
    const std::vector<GridMeasure> init{r0};
    const auto sys = run_scheme_system(init, sc);
    REQUIRE(sys.size() == 1);
    REQUIRE(sys[0].steps() == one.steps());
    for (int k = 0; k <= one.steps(); ++k) {
        CHECK(sys[0].rho[k].values() == one.rho[k].values());
        CHECK(sys[0].tilde[k].values() == one.tilde[k].values());
    }
}

TEST_CASE("decoupled species evolve on their own") {
    const Domain d = Domain::line(-4, 4, 96);
    const GridMeasure a = oracle::heat(d, 0.5, {-0.8, 0}, 0.0), b = oracle::heat(d, 0.7, {1.0, 0}, 0.0);
    SchemeConfig base = heat_config(0.01, 0.05);
    SystemConfig sc;
    sc.base = base;
    sc.species = {SpeciesSpec{EnergySpec::entropy(), DriftModel::interaction(KernelShape::quadratic, 1.0, 1.0, 0)},
                  SpeciesSpec{EnergySpec::power(2.0), DriftModel::zero()}};
    const std::vector<GridMeasure> init{a, b};
    const auto sys = run_scheme_system(init, sc);

    SchemeConfig ca = base;
    ca.drift = sc.species[0].drift;
    SchemeConfig cb = base;
    cb.energy = EnergySpec::power(2.0);
    const SchemeTrajectory ta = run_scheme(a, ca), tb = run_scheme(b, cb);
    CHECK(sys[0].rho.back().values() == ta.rho.back().values());
    CHECK(sys[1].rho.back().values() == tb.rho.back().values());
}

TEST_CASE("mirror symmetry is preserved") {
    const Domain d = Domain::line(-3, 3, 120);
    SchemeConfig c = heat_config(0.01, 0.1);
    c.drift = DriftModel::interaction(KernelShape::gaussian, 1.0, 0.8);
    c.record_transport_w2 = false;
    c.record_step_w2 = false;
    const GridMeasure r0 = GridMeasure::from_function(
        d, [](double x, double) { return std::exp(-4 * (x - 1) * (x - 1)) + std::exp(-4 * (x + 1) * (x + 1)); });
    const GridMeasure r = run_scheme(r0, c).rho.back();
    const int n = d.nx();
    double asym = 0.0;
    for (int i = 0; i < n; ++i) asym = std::max(asym, std::abs(r[i] - r[n - 1 - i]));
    CHECK(asym <= 1e-6 * linf(r, GridMeasure::uniform(d)));
}

TEST_CASE("interpolations") {
    const Domain d = Domain::box(-2, 2, 32, -2, 2, 32, Boundary::periodic);
    SchemeConfig c = heat_config(0.05, 0.15);
    c.drift = DriftModel::rotation(1.0);
    c.transport_only = true;
    const GridMeasure r0 = oracle::heat(d, 0.3, {0.6, 0}, 0.0);
    const SchemeTrajectory tr = run_scheme(r0, c);
    const double h = tr.h;

    for (auto which : {Interpolation::rho, Interpolation::tilde1, Interpolation::tilde2})
        CHECK(evaluate_interpolation(tr, 0.0, which).values() == r0.values());
    for (int k = 0; k < tr.steps(); ++k) {
        const double t = h * (k + 1);
        CHECK(evaluate_interpolation(tr, t, Interpolation::rho).values() == tr.rho[k + 1].values());
        CHECK(evaluate_interpolation(tr, t - 0.5 * h, Interpolation::rho).values() == tr.rho[k + 1].values());
        CHECK(evaluate_interpolation(tr, t - 0.5 * h, Interpolation::tilde1).values() == tr.tilde[k + 1].values());
        // the continuous interpolation reaches rho_tilde at the end of the step
        CHECK(linf(evaluate_interpolation(tr, t, Interpolation::tilde2), tr.tilde[k + 1]) <= 1e-12);
    }
    CHECK_THROWS_AS(evaluate_interpolation(tr, 1.0, Interpolation::rho), Error);

    SUBCASE("no drift: the continuous interpolation sits at rho^k") {
        const Domain l = Domain::line(-4, 4, 64);
        const GridMeasure q = oracle::heat(l, 0.5, {0, 0}, 0.0);
        const SchemeTrajectory ht = run_scheme(q, heat_config(0.02, 0.06));
        for (int k = 0; k < ht.steps(); ++k)
            CHECK(evaluate_interpolation(ht, ht.h * (k + 0.5), Interpolation::tilde2).values() == ht.rho[k].values());
    }
}

TEST_CASE("h0 limit") {
    CHECK(std::isinf(h0_limit(DriftModel::zero())));
    CHECK(std::isinf(h0_limit(DriftModel::interaction(KernelShape::quadratic, 1.0))));
    // D^2 of -a e^{-r^2/2w^2} bottoms out at -2a e^{-3/2} / w^2
    const double w = 0.5, a = 2.0;
    CHECK(h0_limit(DriftModel::interaction(KernelShape::gaussian, a, w)) ==
          doctest::Approx(w * w / (4 * a * std::exp(-1.5))));
}
