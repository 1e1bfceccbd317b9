#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "sjko/error.hpp"
#include "sjko/ot.hpp"

using namespace sjko;

namespace {

GridMeasure gaussian(const Domain& d, double mx, double s, double my = 0.0) {
    return GridMeasure::from_function(d, [=](double x, double y) {
        return std::exp(-((x - mx) * (x - mx) + (y - my) * (y - my)) / (2 * s * s));
    });
}

double sq(double x) { return x * x; }

double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return sq(a[0] - b[0]) + sq(a[1] - b[1]);
}

std::vector<double> unit(std::vector<double> w) {
    const double t = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= t;
    return w;
}

// equal-weight matching by enumeration of all permutations
double best_permutation(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    std::vector<int> p(a.size());
    std::iota(p.begin(), p.end(), 0);
    double best = INFINITY;
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) c += a.weights[i] * dist2(a.points[i], b.points[p[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

void check_marginals(const OTResult& r, const DiscreteMeasure& a, const DiscreteMeasure& b, double tol,
                     bool plan_cost = true) {
    std::vector<double> ra(a.size(), 0.0), rb(b.size(), 0.0);
    double cost = 0.0;
    for (const auto& e : r.plan) {
        ra[e.i] += e.mass;
        rb[e.j] += e.mass;
        cost += e.mass * dist2(a.points[e.i], b.points[e.j]);
    }
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(ra[i] - a.weights[i]) <= tol);
    for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(rb[j] - b.weights[j]) <= tol);
    if (plan_cost) CHECK(std::abs(cost - r.cost) <= 1e-9);
}

DiscreteMeasure random_line(std::mt19937& g, int n) {
    std::uniform_real_distribution<double> x(-2.0, 2.0), w(0.1, 1.0);
    std::vector<double> p(n), m(n);
    for (int i = 0; i < n; ++i) {
        p[i] = x(g);
        m[i] = w(g);
    }
    return DiscreteMeasure::on_line(p, unit(m));
}

}  // namespace

TEST_CASE("brute force LP") {
    SUBCASE("single points") {
        auto a = DiscreteMeasure::in_plane({{0.0, 0.0}}, {1.0});
        auto b = DiscreteMeasure::in_plane({{3.0, 4.0}}, {1.0});
        CHECK(brute_force_lp(a, b).cost == doctest::Approx(25.0));
    }
    SUBCASE("two by two") {
        auto a = DiscreteMeasure::on_line({0.0, 1.0}, {0.5, 0.5});
        auto b = DiscreteMeasure::on_line({0.0, 2.0}, {0.5, 0.5});
        const OTResult r = brute_force_lp(a, b);
        CHECK(r.cost == doctest::Approx(0.5).epsilon(1e-12));
        check_marginals(r, a, b, 1e-12);
    }
    SUBCASE("permutations up to six points") {
        std::mt19937 g(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int n = 1; n <= 6; ++n)
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<std::array<double, 2>> p(n), q(n);
                for (int i = 0; i < n; ++i) {
                    p[i] = {u(g), u(g)};
                    q[i] = {u(g), u(g)};
                }
                auto a = DiscreteMeasure::in_plane(p, std::vector<double>(n, 1.0 / n));
                auto b = DiscreteMeasure::in_plane(q, std::vector<double>(n, 1.0 / n));
                CHECK(brute_force_lp(a, b).cost == doctest::Approx(best_permutation(a, b)).epsilon(1e-10));
            }
    }
    SUBCASE("too large") {
        std::vector<double> x(65, 0.0), w(65, 1.0);
        for (int i = 0; i < 65; ++i) x[i] = i;
        auto a = DiscreteMeasure::on_line(x, w);
        CHECK_THROWS_AS(brute_force_lp(a, a), Error);
    }
}

TEST_CASE("exact 1D solver") {
    SUBCASE("identical measures") {
        const Domain d = Domain::line(-3, 3, 120);
        const GridMeasure r = gaussian(d, 0.2, 0.5);
        const OTResult o = w2_exact_1d(r, r);
        CHECK(o.cost <= 1e-14);
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i] > 1e-8) CHECK(std::abs(o.map[i][0] - d.point(i)[0]) <= 1e-8);
        for (double v : kantorovich_potential(o)) CHECK(std::abs(v) <= 1e-8);
    }
    SUBCASE("translation converges to a^2") {
        const double a = 0.4;
        double prev = INFINITY;
        for (int n : {100, 200, 400}) {
            const Domain d = Domain::line(-4, 4, n);
            const double err = std::abs(w2_exact_1d(gaussian(d, 0.0, 0.5), gaussian(d, a, 0.5)).cost - a * a);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev <= 1e-4);
    }
    SUBCASE("two-cell measures embedded on a grid") {
        const Domain d = Domain::line(-0.5, 2.5, 3);
        const GridMeasure r = GridMeasure::from_density(d, {1.0, 1.0, 0.0});
        const GridMeasure m = GridMeasure::from_density(d, {1.0, 0.0, 1.0});
        const auto a = DiscreteMeasure::from_grid(r), b = DiscreteMeasure::from_grid(m);
        CHECK(w2_exact_1d(a, b).cost == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(brute_force_lp(a, b).cost == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("atoms agree with the LP") {
        std::mt19937 g(11);
        for (int n = 1; n <= 8; ++n)
            for (int m = 1; m <= 8; m += 3) {
                const auto a = random_line(g, n), b = random_line(g, m);
                const OTResult r = w2_exact_1d(a, b);
                CHECK(std::abs(r.cost - brute_force_lp(a, b).cost) <= 1e-9);
                check_marginals(r, a, b, 1e-12);
            }
    }
    SUBCASE("translation potential slope") {
        const Domain d = Domain::line(-4, 4, 400);
        const double a = 0.3;
        const GridMeasure r = gaussian(d, 0.0, 0.5);
        const OTResult o = w2_exact_1d(r, gaussian(d, a, 0.5));
        const auto phi = kantorovich_potential(o);
        for (int i = 150; i < 250; ++i) CHECK((phi[i + 1] - phi[i]) / d.dx() == doctest::Approx(-a).epsilon(1e-3));
    }
    SUBCASE("mismatched domains") {
        const GridMeasure r = GridMeasure::uniform(Domain::line(0, 1, 10));
        CHECK_THROWS_AS(w2_exact_1d(r, GridMeasure::uniform(Domain::line(0, 1, 12))), Error);
    }
}

TEST_CASE("Brenier identity on smooth 1D pairs") {
    const Domain d = Domain::line(-4, 4, 400);
    const GridMeasure r = gaussian(d, -0.3, 0.5);
    const GridMeasure m = GridMeasure::from_function(d, [](double x, double) {
        return std::exp(-(x - 0.4) * (x - 0.4) / 0.5) + 0.5 * std::exp(-(x + 0.8) * (x + 0.8) / 0.3);
    });
    const OTResult o = w2_exact_1d(r, m);
    const auto phi = kantorovich_potential(o);
    double s = 0.0;
    for (int i = 0; i < d.nx(); ++i) {
        // centered differences inside, one-sided at the ends
        const int a = std::max(i - 1, 0), b = std::min(i + 1, d.nx() - 1);
        const double g = (phi[b] - phi[a]) / ((b - a) * d.dx());
        s += g * g * r[i] * d.dx();
    }
    CHECK(s == doctest::Approx(o.cost).epsilon(0.01));
}

TEST_CASE("exact 1D metric properties") {
    const Domain d = Domain::line(-3, 3, 150);
    const GridMeasure a = gaussian(d, -0.5, 0.4), b = gaussian(d, 0.6, 0.7), c = gaussian(d, 0.1, 0.3);
    CHECK(std::abs(w2_exact_1d(a, b).cost - w2_exact_1d(b, a).cost) <= 1e-9);
    const double ab = std::sqrt(w2_exact_1d(a, b).cost), bc = std::sqrt(w2_exact_1d(b, c).cost),
                 ac = std::sqrt(w2_exact_1d(a, c).cost);
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(ab <= ac + bc + 1e-12);
}

TEST_CASE("entropic solver") {
    SUBCASE("identical measures") {
        const Domain d = Domain::box(-2, 2, 24, -2, 2, 24, Boundary::periodic);
        const GridMeasure r = gaussian(d, 0.2, 0.5);
        const OTResult o = w2_entropic(r, r);
        CHECK(o.converged);
        CHECK(std::abs(o.cost) <= o.epsilon * std::log(static_cast<double>(d.size())));
    }
    SUBCASE("products tensorize") {
        const Domain d1 = Domain::line(-3, 3, 40);
        const Domain d2 = Domain::box(-3, 3, 40, -3, 3, 40);
        const auto fx = [](double x) { return std::exp(-(x + 0.3) * (x + 0.3) / 0.5); };
        const auto gx = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / 0.8); };
        const auto fy = [](double y) { return std::exp(-(y - 0.2) * (y - 0.2) / 0.6); };
        const auto gy = [](double y) { return std::exp(-(y + 0.4) * (y + 0.4) / 0.3); };
        const GridMeasure a = GridMeasure::from_function(d2, [&](double x, double y) { return fx(x) * fy(y); });
        const GridMeasure b = GridMeasure::from_function(d2, [&](double x, double y) { return gx(x) * gy(y); });
        const double c1 = w2_exact_1d(GridMeasure::from_function(d1, [&](double x, double) { return fx(x); }),
                                      GridMeasure::from_function(d1, [&](double x, double) { return gx(x); }))
                              .cost;
        const double c2 = w2_exact_1d(GridMeasure::from_function(d1, [&](double y, double) { return fy(y); }),
                                      GridMeasure::from_function(d1, [&](double y, double) { return gy(y); }))
                              .cost;
        const OTResult o = w2_entropic(a, b);
        CHECK(o.converged);
        CHECK(o.cost == doctest::Approx(c1 + c2).epsilon(0.02));
    }
    SUBCASE("small supports against the LP") {
        std::mt19937 g(3);
        std::uniform_int_distribution<int> cell(0, 19);
        std::uniform_real_distribution<double> w(0.2, 1.0);
        const Domain d = Domain::box(0, 2, 20, 0, 2, 20);
        const double eps = d.dx() * d.dx();
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<std::array<double, 2>> p(5), q(5);
            std::vector<double> wa(5), wb(5);
            for (int i = 0; i < 5; ++i) {
                p[i] = d.point(d.index(cell(g), cell(g)));
                q[i] = d.point(d.index(cell(g), cell(g)));
                wa[i] = w(g);
                wb[i] = w(g);
            }
            const auto a = DiscreteMeasure::in_plane(p, unit(wa)), b = DiscreteMeasure::in_plane(q, unit(wb));
            EntropicOptions o;
            o.epsilon = eps;
            o.want_plan = true;
            const OTResult e = w2_entropic(a, b, o);
            CHECK(e.cost == doctest::Approx(brute_force_lp(a, b).cost).epsilon(0.01));
            check_marginals(e, a, b, 1e-6, false);  // the reported cost is debiased
        }
    }
    SUBCASE("symmetry and triangle") {
        const Domain d = Domain::box(-2, 2, 24, -2, 2, 24);
        const GridMeasure a = gaussian(d, -0.5, 0.4), b = gaussian(d, 0.6, 0.5, 0.3), c = gaussian(d, 0.1, 0.3, -0.4);
        const double ab = w2_entropic(a, b).cost, ba = w2_entropic(b, a).cost;
        CHECK(std::abs(ab - ba) <= 1e-6 * std::max(1.0, ab));
        const double bc = w2_entropic(b, c).cost, ac = w2_entropic(a, c).cost;
        CHECK(std::sqrt(ac) <= std::sqrt(ab) + std::sqrt(bc) + 1e-6);
    }
    SUBCASE("approaches the exact 1D cost as epsilon decreases") {
        const Domain d = Domain::box(-3, 3, 48, -0.5, 0.5, 1);
        const Domain line = Domain::line(-3, 3, 48);
        const auto f = [](double x) { return std::exp(-(x + 0.6) * (x + 0.6) / 0.4); };
        const auto g = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / 0.9); };
        const double exact = w2_exact_1d(GridMeasure::from_function(line, [&](double x, double) { return f(x); }),
                                         GridMeasure::from_function(line, [&](double x, double) { return g(x); }))
                                 .cost;
        const GridMeasure a = GridMeasure::from_function(d, [&](double x, double) { return f(x); });
        const GridMeasure b = GridMeasure::from_function(d, [&](double x, double) { return g(x); });
        double prev = INFINITY;
        for (double eps : {0.2, 0.05, 0.0125}) {
            EntropicOptions o;
            o.epsilon = eps;
            o.debias = false;
            const double err = std::abs(w2_entropic(a, b, o).cost - exact);
            CHECK(err < prev);
            prev = err;
        }
    }
}

TEST_CASE("dispatch") {
    const Domain d = Domain::line(-2, 2, 64);
    const GridMeasure a = gaussian(d, -0.3, 0.4), b = gaussian(d, 0.3, 0.4);
    CHECK(w2(a, b).epsilon == 0.0);
    CHECK(w2_squared(a, b) == w2_exact_1d(a, b).cost);
    const Domain p = Domain::line(-2, 2, 64, Boundary::periodic);
    CHECK(w2(gaussian(p, -0.3, 0.4), gaussian(p, 0.3, 0.4)).epsilon > 0.0);
}
