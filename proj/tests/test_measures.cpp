#include <cmath>
#include <sstream>

#include <doctest.h>

#include "sjko/error.hpp"
#include "sjko/measures.hpp"

using namespace sjko;

namespace {

GridMeasure gaussian(const Domain& d, double mx, double s, double my = 0.0) {
    return GridMeasure::from_function(d, [=](double x, double y) {
        return std::exp(-((x - mx) * (x - mx) + (y - my) * (y - my)) / (2 * s * s));
    });
}

double midpoint_moment(const GridMeasure& rho) {
    const Domain& d = rho.domain();
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const auto p = d.point(i);
        s += (p[0] * p[0] + p[1] * p[1]) * rho[i] * d.cell_volume();
    }
    return s;
}

}  // namespace

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(Domain::line(1.0, 0.0, 10).validate(), Error);
    CHECK_THROWS_AS(Domain::line(0.0, 1.0, 0).validate(), Error);
    const Domain d = Domain::box(-1, 1, 4, 0, 2, 8);
    CHECK(d.size() == 32);
    CHECK(d.dx(0) == doctest::Approx(0.5));
    CHECK(d.dx(1) == doctest::Approx(0.25));
    CHECK(d.point(d.index(1, 2))[1] == doctest::Approx(0.625));
}

TEST_CASE("grid measures are normalized and reject bad input") {
    const Domain d = Domain::line(-1, 1, 50);
    double before = 0.0;
    const GridMeasure r = GridMeasure::from_density(d, std::vector<double>(50, 3.0), &before);
    CHECK(r.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(before == doctest::Approx(6.0));
    std::vector<double> bad(50, 1.0);
    bad[3] = -1e-3;
    CHECK_THROWS_AS(GridMeasure::from_density(d, bad), Error);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(GridMeasure::from_density(d, bad), Error);
    CHECK_THROWS_AS(GridMeasure::from_density(d, std::vector<double>(50, 0.0)), Error);
    CHECK_THROWS_AS(GridMeasure::from_density(d, std::vector<double>(49, 1.0)), Error);
    CHECK(std::abs(mix(0.3, r, gaussian(d, 0.2, 0.3)).mass() - 1.0) <= 1e-12);
    CHECK(std::abs(gaussian(Domain::box(-2, 2, 24, -2, 2, 16), 0.3, 0.5).mass() - 1.0) <= 1e-12);
}

TEST_CASE("second moment") {
    SUBCASE("mass in the cell at the origin") {
        const Domain d = Domain::line(-1, 1, 41);
        std::vector<double> v(41, 0.0);
        v[20] = 1.0;
        const double dx = d.dx();
        CHECK(second_moment(GridMeasure::from_density(d, v)) <= dx * dx);
    }
    SUBCASE("uniform on [-1,1]") {
        for (int n : {64, 128}) {
            const Domain d = Domain::line(-1, 1, n);
            const double dx = d.dx();
            CHECK(std::abs(second_moment(GridMeasure::uniform(d)) - 1.0 / 3.0) <= dx * dx);
        }
    }
    SUBCASE("translation adds 2a.mean + |a|^2") {
        const Domain d = Domain::box(-3, 3, 60, -3, 3, 60);
        const GridMeasure r = gaussian(d, 0.0, 0.4);
        // shift by whole cells so the translate lives on the same grid
        const int sx = 5, sy = -3;
        const double ax = sx * d.dx(0), ay = sy * d.dx(1);
        std::vector<double> v(d.size(), 0.0);
        for (int iy = 0; iy < d.ny(); ++iy)
            for (int ix = 0; ix < d.nx(); ++ix) {
                const int jx = ix - sx, jy = iy - sy;
                if (jx >= 0 && jx < d.nx() && jy >= 0 && jy < d.ny()) v[d.index(ix, iy)] = r[d.index(jx, jy)];
            }
        const GridMeasure t = GridMeasure::from_density(d, v);
        const auto m = mean_position(r);
        const double expected = second_moment(r) + 2 * (ax * m[0] + ay * m[1]) + ax * ax + ay * ay;
        CHECK(second_moment(t) == doctest::Approx(expected).epsilon(1e-8));
        CHECK(second_moment(t) == doctest::Approx(midpoint_moment(t)).epsilon(1e-12));
    }
}

TEST_CASE("internal energy closed forms") {
    const double L = 2.0;
    const Domain d = Domain::line(-L, L, 100);
    const GridMeasure u = GridMeasure::uniform(d);
    CHECK(internal_energy(EnergySpec::entropy(), u) == doctest::Approx(std::log(1.0 / (2 * L))).epsilon(1e-12));
    CHECK(internal_energy(EnergySpec::power(2.0), u) == doctest::Approx(1.0 / (2 * L)).epsilon(1e-12));

    std::vector<double> v(100, 1.0);
    v[10] = 0.0;
    const GridMeasure z = GridMeasure::from_density(d, v);
    const double rho = z[0];
    const double expected = 99 * rho * std::log(rho) * d.dx();
    CHECK(internal_energy(EnergySpec::entropy(), z) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pressure field") {
    const Domain d = Domain::line(-2, 2, 64);
    std::vector<double> v(64);
    for (int i = 0; i < 64; ++i) v[i] = i % 7 == 0 ? 0.0 : 1.0 + 0.5 * std::sin(0.3 * i);
    const GridMeasure r = GridMeasure::from_density(d, v);
    const ScalarField pe = pressure_field(EnergySpec::entropy(), r);
    const ScalarField pp = pressure_field(EnergySpec::power(2.0), r);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(pe.values[i] == r[i]);
        CHECK(pp.values[i] == doctest::Approx(r[i] * r[i]).epsilon(1e-14));
        if (r[i] == 0.0) CHECK(pp.values[i] == 0.0);
    }
}

TEST_CASE("energy assumptions") {
    const auto s = geometric_samples(1e-6, 1e6);
    const auto ent = check_energy_assumptions(EnergySpec::entropy(), s);
    CHECK(ent.all_pass());
    const auto pm = check_energy_assumptions(EnergySpec::power(2.0), s);
    CHECK(pm.all_pass());
    CHECK(std::isfinite(pm.fitted_pressure_constant));
    CHECK(pm.fitted_pressure_constant <= 1.0 + 1e-9);

    const EnergySpec lin = EnergySpec::custom(
        "linear", [](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; });
    const auto l = check_energy_assumptions(lin, s);
    CHECK_FALSE(l.strictly_convex);
    CHECK_FALSE(l.all_pass());
}

TEST_CASE("energy is convex along mixtures") {
    const Domain d = Domain::line(-3, 3, 80);
    const GridMeasure a = gaussian(d, -0.7, 0.4), b = gaussian(d, 0.9, 0.8);
    for (const EnergySpec& E : {EnergySpec::entropy(), EnergySpec::power(2.0), EnergySpec::power(1.5)})
        for (double t : {0.1, 0.25, 0.5, 0.8}) {
            const double lhs = internal_energy(E, mix(t, a, b));
            const double rhs = t * internal_energy(E, a) + (1 - t) * internal_energy(E, b);
            CHECK(lhs <= rhs + 1e-10);
        }
}

TEST_CASE("snapshot round trip") {
    const Domain d = Domain::box(-1, 1, 6, 0, 3, 5);
    const GridMeasure r = gaussian(d, 0.1, 0.5, 1.4);
    std::stringstream ss;
    write_snapshot(ss, r, 0.125);
    const Snapshot s = read_snapshot(ss);
    CHECK(s.t == 0.125);
    CHECK(s.measure.domain() == d);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(s.measure[i] == doctest::Approx(r[i]).epsilon(1e-15));
}
