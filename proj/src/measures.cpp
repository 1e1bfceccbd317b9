#include "sjko/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"

namespace sjko {

std::string to_string(Boundary b) {
    return b == Boundary::periodic ? "periodic" : "noflux";
}

Domain Domain::line(double a, double b, int n, Boundary bc) {
    Domain d;
    d.dim = 1;
    d.lo = {a, 0.0};
    d.hi = {b, 1.0};
    d.cells = {n, 1};
    d.boundary = bc;
    d.validate();
    return d;
}

Domain Domain::box(double x0, double x1, int nx, double y0, double y1, int ny, Boundary bc) {
    Domain d;
    d.dim = 2;
    d.lo = {x0, y0};
    d.hi = {x1, y1};
    d.cells = {nx, ny};
    d.boundary = bc;
    d.validate();
    return d;
}

void Domain::validate() const {
    require(dim == 1 || dim == 2, "domain dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
        require(cells[a] > 0, "cells per axis must be positive");
        require(std::isfinite(lo[a]) && std::isfinite(hi[a]) && hi[a] > lo[a],
                "domain extent must be a nonempty finite interval");
    }
}

double Domain::diameter() const {
    const double lx = length(0);
    const double ly = dim == 2 ? length(1) : 0.0;
    return std::sqrt(lx * lx + ly * ly);
}

GridMeasure GridMeasure::from_density(Domain domain, std::vector<double> density,
                                      double* mass_before) {
    domain.validate();
    require(density.size() == domain.size(), "density size does not match the domain");
    for (double v : density) {
        if (!std::isfinite(v)) fail(ErrorKind::non_finite, "density has a non-finite entry");
        require(v >= 0.0, "density must be nonnegative");
    }
    const double mass = detail::pairwise_sum(density) * domain.cell_volume();
    require(mass > 0.0, "density has zero total mass");
    if (mass_before) *mass_before = mass;
    if (mass != 1.0) {
        const double inv = 1.0 / mass;
        for (double& v : density) v *= inv;
    }
    return GridMeasure(std::move(domain), std::move(density));
}

std::vector<double> cell_averages(const Domain& domain,
                                  const std::function<double(double, double)>& f) {
    using GL = detail::GaussLegendre<4>;
    std::vector<double> out(domain.size());
    const double hx = domain.dx(0);
    const double hy = domain.dim == 2 ? domain.dx(1) : 0.0;
    for (int iy = 0; iy < domain.ny(); ++iy) {
        for (int ix = 0; ix < domain.nx(); ++ix) {
            const double x0 = domain.face(0, ix);
            double acc = 0.0;
            if (domain.dim == 1) {
                for (int q = 0; q < 4; ++q) acc += GL::weights[q] * f(x0 + GL::nodes[q] * hx, 0.0);
            } else {
                const double y0 = domain.face(1, iy);
                for (int q = 0; q < 4; ++q)
                    for (int r = 0; r < 4; ++r)
                        acc += GL::weights[q] * GL::weights[r] *
                               f(x0 + GL::nodes[q] * hx, y0 + GL::nodes[r] * hy);
            }
            out[domain.index(ix, iy)] = acc;
        }
    }
    return out;
}

GridMeasure GridMeasure::from_function(const Domain& domain,
                                       const std::function<double(double, double)>& f) {
    return from_density(domain, cell_averages(domain, f));
}

GridMeasure GridMeasure::uniform(const Domain& domain) {
    return from_density(domain, std::vector<double>(domain.size(), 1.0));
}

double GridMeasure::mass() const {
    return detail::pairwise_sum(rho_) * domain_.cell_volume();
}

std::vector<double> GridMeasure::cell_masses() const {
    std::vector<double> m(rho_);
    const double v = domain_.cell_volume();
    for (double& x : m) x *= v;
    return m;
}

GridMeasure mix(double t, const GridMeasure& a, const GridMeasure& b) {
    require(a.domain() == b.domain(), "mix: measures live on different domains");
    require(t >= 0.0 && t <= 1.0, "mix: weight must lie in [0, 1]");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = t * a[i] + (1.0 - t) * b[i];
    return GridMeasure::from_density(a.domain(), std::move(out));
}

double second_moment(const GridMeasure& rho) {
    const Domain& d = rho.domain();
    std::vector<double> terms(rho.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto p = d.point(i);
        terms[i] = (p[0] * p[0] + p[1] * p[1]) * rho[i];
    }
    return detail::pairwise_sum(terms) * d.cell_volume();
}

std::array<double, 2> mean_position(const GridMeasure& rho) {
    const Domain& d = rho.domain();
    std::vector<double> tx(rho.size()), ty(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const auto p = d.point(i);
        tx[i] = p[0] * rho[i];
        ty[i] = p[1] * rho[i];
    }
    const double v = d.cell_volume();
    return {detail::pairwise_sum(tx) * v, detail::pairwise_sum(ty) * v};
}

double integrate(const ScalarField& f, const GridMeasure& rho) {
    require(f.values.size() == rho.size(), "integrate: field size mismatch");
    std::vector<double> terms(rho.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = f.values[i] * rho[i];
    return detail::pairwise_sum(terms) * rho.domain().cell_volume();
}

// ---------------------------------------------------------------------------
// EnergySpec

EnergySpec EnergySpec::entropy(double nu) {
    require(nu > 0.0, "entropy coefficient must be positive");
    EnergySpec e;
    e.kind_ = Kind::entropy;
    e.name_ = "entropy";
    e.nu_ = nu;
    e.m_ = 1.0;
    return e;
}

EnergySpec EnergySpec::power(double m, double nu) {
    require(m > 1.0, "power energy needs m > 1");
    require(nu > 0.0, "power energy coefficient must be positive");
    EnergySpec e;
    e.kind_ = Kind::power;
    e.name_ = "power";
    e.m_ = m;
    e.nu_ = nu;
    return e;
}

EnergySpec EnergySpec::custom(std::string name, Fn F, Fn dF, Fn d2F) {
    require(F && dF && d2F, "custom energy needs F, F' and F''");
    EnergySpec e;
    e.kind_ = Kind::custom;
    e.name_ = std::move(name);
    e.F_ = std::move(F);
    e.dF_ = std::move(dF);
    e.d2F_ = std::move(d2F);
    return e;
}

double EnergySpec::F(double s) const {
    if (s <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::entropy: return nu_ * s * std::log(s);
        case Kind::power: return nu_ * std::pow(s, m_);
        case Kind::custom: return F_(s);
    }
    return 0.0;
}

double EnergySpec::dF(double s) const {
    switch (kind_) {
        case Kind::entropy:
            return s > 0.0 ? nu_ * (std::log(s) + 1.0) : -std::numeric_limits<double>::infinity();
        case Kind::power: return s > 0.0 ? nu_ * m_ * std::pow(s, m_ - 1.0) : 0.0;
        case Kind::custom: return dF_(s);
    }
    return 0.0;
}

double EnergySpec::d2F(double s) const {
    switch (kind_) {
        case Kind::entropy: return nu_ / s;
        case Kind::power: return nu_ * m_ * (m_ - 1.0) * std::pow(s, m_ - 2.0);
        case Kind::custom: return d2F_(s);
    }
    return 0.0;
}

double EnergySpec::pressure(double s) const {
    if (s <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::entropy: return nu_ * s;
        case Kind::power: return nu_ * (m_ - 1.0) * std::pow(s, m_);
        case Kind::custom: return s * dF_(s) - F_(s);
    }
    return 0.0;
}

double EnergySpec::prox_kl(double sigma, double v, double log_p) const {
    if (log_p == -std::numeric_limits<double>::infinity()) return 0.0;
    if (kind_ == Kind::entropy) {
        // sigma*nu*(log r + 1) + sigma*v + log r - log p = 0
        return std::exp((log_p - sigma * (nu_ + v)) / (1.0 + sigma * nu_));
    }
    // Solve g(u) = sigma*F'(e^u) + sigma*v + u - log p = 0 in u = log r.
    // g is increasing; for the power law it is also convex, so Newton started
    // to the right of the root converges monotonically.
    double u = log_p - sigma * v;
    if (kind_ == Kind::power) {
        for (int it = 0; it < 50; ++it) {
            const double e = std::exp((m_ - 1.0) * u);
            const double g = sigma * nu_ * m_ * e + sigma * v + u - log_p;
            const double dg = sigma * nu_ * m_ * (m_ - 1.0) * e + 1.0;
            const double step = g / dg;
            u -= step;
            if (std::abs(step) <= 1e-13 * (1.0 + std::abs(u))) break;
        }
        return std::exp(u);
    }
    // custom: bracketed Newton on u
    auto g = [&](double uu) { return sigma * dF_(std::exp(uu)) + sigma * v + uu - log_p; };
    double a = u - 1.0, b = u + 1.0;
    while (g(a) > 0.0) a -= 2.0 * (b - a);
    while (g(b) < 0.0) b += 2.0 * (b - a);
    u = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double gu = g(u);
        if (gu > 0.0) b = u; else a = u;
        const double r = std::exp(u);
        const double dg = sigma * d2F_(r) * r + 1.0;
        double next = u - gu / dg;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - u) <= 1e-13 * (1.0 + std::abs(u))) { u = next; break; }
        u = next;
    }
    return std::exp(u);
}

double internal_energy(const EnergySpec& e, const GridMeasure& rho) {
    std::vector<double> terms(rho.size());
    for (std::size_t i = 0; i < terms.size(); ++i) {
        terms[i] = e.F(rho[i]);
        if (!std::isfinite(terms[i]))
            fail(ErrorKind::non_finite, "internal energy is not finite in cell " + std::to_string(i));
    }
    return detail::pairwise_sum(terms) * rho.domain().cell_volume();
}

ScalarField pressure_field(const EnergySpec& e, const GridMeasure& rho) {
    ScalarField p{rho.domain(), std::vector<double>(rho.size())};
    for (std::size_t i = 0; i < rho.size(); ++i) p.values[i] = e.pressure(rho[i]);
    return p;
}

std::vector<double> geometric_samples(double lo, double hi, int per_decade) {
    require(lo > 0.0 && hi > lo && per_decade > 0, "geometric_samples: bad range");
    std::vector<double> s;
    const double step = std::pow(10.0, 1.0 / per_decade);
    for (double x = lo; x <= hi * (1.0 + 1e-12); x *= step) s.push_back(x);
    return s;
}

EnergyAssumptionReport check_energy_assumptions(const EnergySpec& e,
                                                std::span<const double> samples) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    require(s.size() >= 8 && s.front() > 0.0, "need at least 8 positive samples");
    require(s.back() / s.front() >= 1e3, "samples must cover several decades");

    EnergyAssumptionReport rep;
    if (std::abs(e.F(0.0)) > 1e-14) {
        rep.zero_at_origin = false;
        rep.violations.push_back("F(0)=0");
    }

    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double left = (e.F(s[i]) - e.F(s[i - 1])) / (s[i] - s[i - 1]);
        const double right = (e.F(s[i + 1]) - e.F(s[i])) / (s[i + 1] - s[i]);
        if (!(right - left > 1e-9 * (std::abs(left) + std::abs(right) + 1e-300))) {
            rep.strictly_convex = false;
            rep.violations.push_back("strict convexity");
            break;
        }
    }

    // F(s)/s must keep increasing across the top decades.
    std::vector<double> top;
    for (double x : s)
        if (x >= s.back() / 1e3) top.push_back(e.F(x) / x);
    for (std::size_t i = 1; i < top.size(); ++i) {
        if (!(top[i] > top[i - 1])) {
            rep.superlinear = false;
            break;
        }
    }
    if (rep.superlinear && !(top.back() - top.front() > 1e-8 * (1.0 + std::abs(top.front()))))
        rep.superlinear = false;
    if (!rep.superlinear) rep.violations.push_back("superlinearity");

    // P(s) <= C (s + F(s)) on the large-density range s >= 1.
    double c_all = 0.0, c_top = 0.0, c_below = 0.0;
    bool finite = true;
    for (double x : s) {
        if (x < 1.0) continue;
        const double denom = x + e.F(x);
        if (!(denom > 0.0)) {
            finite = false;
            break;
        }
        const double ratio = e.pressure(x) / denom;
        c_all = std::max(c_all, ratio);
        if (x >= s.back() / 10.0) c_top = std::max(c_top, ratio);
        else if (x >= s.back() / 100.0) c_below = std::max(c_below, ratio);
    }
    rep.fitted_pressure_constant = c_all;
    if (!finite || !std::isfinite(c_all) || c_top > 1.05 * c_below + 1e-12) {
        rep.pressure_bound = false;
        rep.violations.push_back("pressure bound P <= C(s + F)");
    }
    return rep;
}

}  // namespace sjko
