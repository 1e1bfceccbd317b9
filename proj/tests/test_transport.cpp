#include <cmath>
#include <numbers>

#include <doctest.h>

#include "sjko/error.hpp"
#include "sjko/oracles.hpp"
#include "sjko/transport.hpp"

using namespace sjko;

namespace {

constexpr double kPi = std::numbers::pi;

VectorField uniform_field(const Domain& d, double cx, double cy) {
    VectorField v = VectorField::zeros(d);
    for (std::size_t c = 0; c < d.size(); ++c) {
        v.x[c] = cx;
        v.y[c] = cy;
    }
    v.fx.clear();
    v.fy.clear();
    return v;
}

// W of the scheme for U = om (-y, x): W = -U
VectorField rotation_w(const Domain& d, double om) {
    return decompose(evaluate_drift(DriftModel::rotation(om), GridMeasure::uniform(d))).W;
}

GridMeasure blob(const Domain& d, double cx, double cy, double s) {
    return oracle::heat(d, s, {cx, cy}, 0.0);
}

double l1(const GridMeasure& a, const GridMeasure& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]) * a.domain().cell_volume();
    return s;
}

double wrap(double x, double lo, double L) { return x - L * std::floor((x - lo) / L); }

}  // namespace

TEST_CASE("flow map") {
    const Domain d = Domain::box(-2, 2, 32, -2, 2, 32, Boundary::periodic);
    SUBCASE("zero field") {
        const FlowMap f = integrate_flow(VectorField::zeros(d), 0.1);
        for (std::size_t c = 0; c < d.size(); ++c) {
            CHECK(f.forward[c] == d.point(c));
            CHECK(f.backward[c] == d.point(c));
        }
    }
    SUBCASE("constant field wraps") {
        const double h = 0.3;
        const FlowMap f = integrate_flow(uniform_field(d, 1.5, -0.5), h);
        for (std::size_t c = 0; c < d.size(); ++c) {
            const auto p = d.point(c);
            CHECK(f.forward[c][0] == doctest::Approx(wrap(p[0] + 1.5 * h, -2, 4)).epsilon(1e-12));
            CHECK(f.forward[c][1] == doctest::Approx(wrap(p[1] - 0.5 * h, -2, 4)).epsilon(1e-12));
        }
        CHECK(f.jacobian_defect <= 1e-10);
    }
    SUBCASE("rotation error is fourth order in the substep") {
        // W = -om (-y, x) sampled directly; bilinear interpolation of a linear field is exact.
        // Periodic so the corners may wrap; only the disc of radius 1 is checked.
        const Domain b = Domain::box(-4, 4, 64, -4, 4, 64, Boundary::periodic);
        const double om = 1.0, h = 0.5;
        VectorField W = VectorField::zeros(b);
        for (std::size_t c = 0; c < b.size(); ++c) {
            const auto p = b.point(c);
            W.x[c] = om * p[1];
            W.y[c] = -om * p[0];
        }
        W.fx.clear();
        W.fy.clear();
        double prev = INFINITY;
        for (int n : {2, 4, 8}) {
            const FlowMap f = integrate_flow(W, h, n);
            double err = 0.0;
            for (std::size_t c = 0; c < b.size(); ++c) {
                const auto p = b.point(c);
                if (p[0] * p[0] + p[1] * p[1] > 1.0) continue;
                // W = -U turns clockwise
                const double a = -om * h;
                const double ex = std::cos(a) * p[0] - std::sin(a) * p[1], ey = std::sin(a) * p[0] + std::cos(a) * p[1];
                err = std::max(err, std::hypot(f.forward[c][0] - ex, f.forward[c][1] - ey));
            }
            CHECK(err <= 1e-2 * std::pow(h / n, 4));
            if (std::isfinite(prev)) CHECK(err <= prev / 12.0);
            prev = err;
        }
    }
}

TEST_CASE("transport step") {
    const Domain d = Domain::box(-2, 2, 64, -2, 2, 64, Boundary::periodic);
    const GridMeasure rho = blob(d, 0.5, 0.0, 0.3);
    SUBCASE("zero field is the identity") {
        const GridMeasure t = transport_step(rho, VectorField::zeros(d), 0.1);
        for (std::size_t i = 0; i < rho.size(); ++i) CHECK(t[i] == rho[i]);
    }
    SUBCASE("full turn") {
        const GridMeasure t = transport_step(rho, rotation_w(d, 1.0), 2 * kPi);
        CHECK(std::abs(t.mass() - 1.0) <= 1e-12);
        CHECK(l1(t, rho) <= 0.05);
        CHECK(mean_position(t)[0] == doctest::Approx(0.5).epsilon(1e-3));
    }
    SUBCASE("energy and mass on 128^2") {
        const Domain f = Domain::box(-2, 2, 128, -2, 2, 128, Boundary::periodic);
        const GridMeasure rho = blob(f, 0.5, 0.0, 0.3);
        const TransportResult r = transport_step_detailed(rho, rotation_w(f, 1.0), 1e-2);
        const EnergySpec E = EnergySpec::entropy();
        CHECK(std::abs(internal_energy(E, r.rho) - internal_energy(E, rho)) <= 1e-6);
        CHECK(r.mass_drift <= 10 * f.dx() * f.dx());
        CHECK(std::abs(r.rho.mass() - 1.0) <= 1e-12);
    }
    SUBCASE("group property") {
        const VectorField W = rotation_w(d, 1.0);
        const double h = 0.05;
        const GridMeasure one = transport_step(rho, W, h);
        const GridMeasure twice = transport_step(one, W, h);
        const GridMeasure once = transport_step(rho, W, 2 * h);
        const GridMeasure exact = oracle::rotated(
            d, [](double x, double y) { return std::exp(-((x - 0.5) * (x - 0.5) + y * y) / 0.18); }, -1.0, {0, 0}, h);
        CHECK(l1(twice, once) <= 2 * l1(one, exact) + 1e-12);
    }
    SUBCASE("second moment growth") {
        // |W| <= |x| for unit rotation, so M(rho_tilde) <= (M(rho) + h) e^h with room to spare
        const double h = 0.1;
        const GridMeasure t = transport_step(rho, rotation_w(d, 1.0), h);
        CHECK(second_moment(t) <= (second_moment(rho) + h) * std::exp(h));
    }
}

TEST_CASE("1D energy conservation on 256 cells") {
    const Domain d = Domain::line(-4, 4, 256, Boundary::periodic);
    const GridMeasure rho = blob(d, 0.0, 0.0, 0.5);
    const TransportResult r = transport_step_detailed(rho, uniform_field(d, 0.7, 0.0), 1e-2);
    const EnergySpec E = EnergySpec::entropy();
    CHECK(std::abs(internal_energy(E, r.rho) - internal_energy(E, rho)) <= 1e-6);
}

TEST_CASE("CFL failure on a noflux box") {
    const Domain d = Domain::line(-1, 1, 32);
    VectorField W = uniform_field(d, 5.0, 0.0);
    const GridMeasure rho = GridMeasure::uniform(d);
    CHECK_THROWS_AS(transport_step(rho, W, 1.0), Error);
}

TEST_CASE("distance bound") {
    const Domain d = Domain::line(-4, 4, 400, Boundary::periodic);
    const GridMeasure rho = blob(d, 0.0, 0.0, 0.5);
    SUBCASE("zero field") {
        const auto r = transport_distance_bound(rho, transport_step(rho, VectorField::zeros(d), 0.1), 0.1, 0.0);
        CHECK(r.w2sq == 0.0);
    }
    SUBCASE("constant drift gives slope two") {
        const double c = 1.0;
        std::vector<TransportBoundRecord> recs;
        // whole-cell shifts keep the interpolation exact
        for (int cells : {1, 2, 4, 8, 16}) {
            const double h = cells * d.dx() / c;
            recs.push_back(transport_distance_bound(rho, transport_step(rho, uniform_field(d, c, 0.0), h), h, c));
            CHECK(recs.back().w2sq == doctest::Approx(c * c * h * h).epsilon(1e-3));
            CHECK(recs.back().within);
        }
        const auto ex = transport_exponent(recs);
        CHECK(ex.fit.slope == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(ex.exponent_ok);
        CHECK(ex.decade_covered);
    }
}
