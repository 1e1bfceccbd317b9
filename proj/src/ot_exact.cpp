#include <algorithm>
#include <cmath>
#include <numeric>

#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"
#include "sjko/ot.hpp"

namespace sjko {

DiscreteMeasure DiscreteMeasure::on_line(const std::vector<double>& x, std::vector<double> w) {
    DiscreteMeasure m;
    m.dim = 1;
    m.points.reserve(x.size());
    for (double v : x) m.points.push_back({v, 0.0});
    m.weights = std::move(w);
    m.validate();
    return m;
}

DiscreteMeasure DiscreteMeasure::in_plane(std::vector<std::array<double, 2>> p,
                                          std::vector<double> w) {
    DiscreteMeasure m;
    m.dim = 2;
    m.points = std::move(p);
    m.weights = std::move(w);
    m.validate();
    return m;
}

DiscreteMeasure DiscreteMeasure::from_grid(const GridMeasure& rho) {
    DiscreteMeasure m;
    m.dim = rho.domain().dim;
    m.weights = rho.cell_masses();
    m.points.resize(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) m.points[i] = rho.domain().point(i);
    return m;
}

double DiscreteMeasure::total() const { return detail::pairwise_sum(weights); }

void DiscreteMeasure::validate() const {
    require(dim == 1 || dim == 2, "discrete measure dimension must be 1 or 2");
    require(points.size() == weights.size() && !weights.empty(),
            "discrete measure needs one weight per point");
    for (double w : weights) {
        if (!std::isfinite(w)) fail(ErrorKind::non_finite, "discrete measure weight is not finite");
        require(w >= 0.0, "discrete measure weights must be nonnegative");
    }
    require(total() > 0.0, "discrete measure has zero mass");
}

namespace {

// Cumulative distribution at the faces, pinned to [0, 1].
std::vector<double> face_cdf(const std::vector<double>& m) {
    std::vector<double> F(m.size() + 1, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) F[i + 1] = std::min(1.0, F[i] + m[i]);
    F.back() = 1.0;
    return F;
}

std::vector<double> unit_masses(const GridMeasure& r) {
    std::vector<double> m = r.cell_masses();
    const double s = detail::pairwise_sum(m);
    for (double& v : m) v /= s;
    return m;
}

// Quantile of a piecewise-constant density at level u.
double quantile(const Domain& d, const std::vector<double>& F, const std::vector<double>& m,
                double u) {
    const int n = d.nx();
    auto it = std::upper_bound(F.begin() + 1, F.end(), u);
    int j = static_cast<int>(it - F.begin()) - 1;
    j = std::clamp(j, 0, n - 1);
    while (j > 0 && m[j] <= 0.0) --j;
    while (j < n - 1 && m[j] <= 0.0) ++j;
    const double frac = m[j] > 0.0 ? std::clamp((u - F[j]) / m[j], 0.0, 1.0) : 0.5;
    return d.face(0, j) + frac * d.dx(0);
}

}  // namespace

OTResult w2_exact_1d(const GridMeasure& rho, const GridMeasure& mu) {
    const Domain& d = rho.domain();
    if (!(d == mu.domain())) fail(ErrorKind::domain_mismatch, "w2_exact_1d: measures live on different domains");
    if (d.dim != 1) fail(ErrorKind::domain_mismatch, "w2_exact_1d: needs a 1D domain");
    if (d.boundary != Boundary::noflux)
        fail(ErrorKind::domain_mismatch, "w2_exact_1d: periodic lines need the entropic solver");

    const int n = d.nx();
    const double dx = d.dx(0);
    const std::vector<double> ma = unit_masses(rho), mb = unit_masses(mu);
    const std::vector<double> Fa = face_cdf(ma), Fb = face_cdf(mb);

    OTResult r;
    std::vector<double> terms;
    int i = 0, j = 0;
    double u = 0.0;
    while (i < n && j < n) {
        if (ma[i] <= 0.0) { ++i; continue; }
        if (mb[j] <= 0.0) { ++j; continue; }
        const double endA = Fa[i + 1], endB = Fb[j + 1];
        const double u1 = std::min(endA, endB);
        if (u1 > u) {
            const double x0 = d.face(0, i) + (u - Fa[i]) / ma[i] * dx;
            const double x1 = d.face(0, i) + (u1 - Fa[i]) / ma[i] * dx;
            const double y0 = d.face(0, j) + (u - Fb[j]) / mb[j] * dx;
            const double y1 = d.face(0, j) + (u1 - Fb[j]) / mb[j] * dx;
            const double d0 = x0 - y0, d1 = x1 - y1;
            terms.push_back((d0 * d0 + d0 * d1 + d1 * d1) / 3.0 * (u1 - u));
            r.plan.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), u1 - u});
            u = u1;
        }
        if (endA <= u1) ++i;
        if (endB <= u1) ++j;
    }
    r.cost = detail::pairwise_sum(terms);

    // Monotone rearrangement at the cell centers and phi' = x - T(x).
    r.map.resize(n);
    r.potential.assign(n, 0.0);
    std::vector<double> dphi(n);
    for (int c = 0; c < n; ++c) {
        const double level = Fa[c] + 0.5 * ma[c];
        const double t = quantile(d, Fb, mb, level);
        r.map[c] = {t, 0.0};
        dphi[c] = d.center(0, c) - t;
    }
    for (int c = 1; c < n; ++c) r.potential[c] = r.potential[c - 1] + 0.5 * dx * (dphi[c - 1] + dphi[c]);
    r.source_weights = ma;
    return r;
}

OTResult w2_exact_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    a.validate();
    b.validate();
    require(a.dim == 1 && b.dim == 1, "w2_exact_1d: atoms must be 1D");
    const double ta = a.total(), tb = b.total();
    require(std::abs(ta - tb) <= 1e-9 * ta, "w2_exact_1d: total masses differ");

    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> ia(n), ib(m);
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), 0);
    std::stable_sort(ia.begin(), ia.end(), [&](auto p, auto q) { return a.points[p][0] < a.points[q][0]; });
    std::stable_sort(ib.begin(), ib.end(), [&](auto p, auto q) { return b.points[p][0] < b.points[q][0]; });

    OTResult r;
    r.source_weights = a.weights;
    r.dual_f.assign(n, 0.0);
    r.dual_g.assign(m, 0.0);
    std::vector<double> ra(n), rb(m);
    for (std::size_t k = 0; k < n; ++k) ra[k] = a.weights[ia[k]] / ta;
    for (std::size_t k = 0; k < m; ++k) rb[k] = b.weights[ib[k]] / ta;

    // Northwest corner on sorted supports; duals propagate along the staircase.
    std::vector<double> terms;
    std::vector<char> fa(n, 0), fb(m, 0);
    std::vector<double> ymass(n, 0.0);
    std::size_t p = 0, q = 0;
    bool first = true;
    while (p < n && q < m) {
        const std::size_t si = ia[p], tj = ib[q];
        const double dd = a.points[si][0] - b.points[tj][0];
        const double c = dd * dd;
        if (first) {
            r.dual_f[si] = 0.0;
            r.dual_g[tj] = c;
            fa[si] = fb[tj] = 1;
            first = false;
        } else if (fa[si] && !fb[tj]) {
            r.dual_g[tj] = c - r.dual_f[si];
            fb[tj] = 1;
        } else if (!fa[si] && fb[tj]) {
            r.dual_f[si] = c - r.dual_g[tj];
            fa[si] = 1;
        }
        const double t = std::min(ra[p], rb[q]);
        if (t > 0.0) {
            terms.push_back(t * c);
            r.plan.push_back({si, tj, t * ta});
            ymass[si] += t * b.points[tj][0];
        }
        ra[p] -= t;
        rb[q] -= t;
        // a tie leaves a zero-mass basis edge, which still fixes the next dual
        if (ra[p] <= 1e-15) ++p;
        else ++q;
    }
    r.cost = detail::pairwise_sum(terms) * ta;

    r.map.resize(n);
    r.potential.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = a.weights[k] / ta;
        r.map[k] = {w > 0.0 ? ymass[k] / w : a.points[k][0], 0.0};
        r.potential[k] = 0.5 * r.dual_f[k];
    }
    return r;
}

std::vector<double> kantorovich_potential(const OTResult& r) {
    require(!r.potential.empty() && r.potential.size() == r.source_weights.size(),
            "kantorovich_potential: result carries no potential");
    double wsum = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < r.potential.size(); ++i) {
        if (r.source_weights[i] <= kVacuum) continue;
        wsum += r.source_weights[i];
        acc += r.source_weights[i] * r.potential[i];
    }
    require(wsum > 0.0, "kantorovich_potential: source is vacuum everywhere");
    std::vector<double> phi(r.potential);
    const double mean = acc / wsum;
    for (double& v : phi) v -= mean;
    return phi;
}

OTResult w2(const GridMeasure& rho, const GridMeasure& mu, const OTOptions& opt) {
    OTBackend b = opt.backend;
    if (b == OTBackend::automatic)
        b = (rho.domain().dim == 1 && rho.domain().boundary == Boundary::noflux) ? OTBackend::exact_1d
                                                                                 : OTBackend::entropic;
    if (b == OTBackend::exact_1d) return w2_exact_1d(rho, mu);
    return w2_entropic(rho, mu, opt.entropic);
}

double w2_squared(const GridMeasure& rho, const GridMeasure& mu, const OTOptions& opt) {
    OTOptions o = opt;
    o.entropic.want_map = false;
    o.entropic.want_plan = false;
    return w2(rho, mu, o).cost;
}

}  // namespace sjko
