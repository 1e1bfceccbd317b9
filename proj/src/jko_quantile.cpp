#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "sjko/detail/interp1d.hpp"
#include "sjko/error.hpp"
#include "sjko/jko.hpp"

// Lagrangian form of the 1D step. The unknowns are the new positions X_i of
// the faces of rho_tilde; interval c keeps its mass m_c, so the candidate is
// piecewise constant with density m_c / (X_{c+1} - X_c). On each interval the
// displacement X - Y is linear in the mass coordinate, which makes the W2 term
// an exact quadratic. The objective is strictly convex and we minimize it with
// damped Newton on a tridiagonal Hessian.

namespace sjko::detail {

namespace {

struct Problem {
    int n = 0;  // intervals
    double lo = 0.0, hi = 1.0, h = 0.0;
    std::vector<double> m, y, w;
    std::vector<char> active, free;
    const EnergySpec* E = nullptr;
    const CubicProfile* V = nullptr;

    double objective(const std::vector<double>& x) const {
        double w2 = 0.0, en = 0.0, pot = 0.0;
        for (int c = 0; c < n; ++c) {
            if (m[c] <= 0.0) continue;
            const double len = x[c + 1] - x[c];
            if (!(len > 0.0)) return std::numeric_limits<double>::infinity();
            const double dl = x[c] - y[c], dr = x[c + 1] - y[c + 1];
            w2 += m[c] * (dl * dl + dl * dr + dr * dr) / 3.0;
            en += len * E->F(m[c] / len);
        }
        for (int i = 0; i <= n; ++i)
            if (active[i]) pot += w[i] * (*V)(x[i]);
        return w2 + 2.0 * h * (en + pot);
    }

    // gradient and tridiagonal Hessian; pinned rows become identity
    void derivatives(const std::vector<double>& x, std::vector<double>& g, std::vector<double>& diag,
                     std::vector<double>& off) const {
        g.assign(n + 1, 0.0);
        diag.assign(n + 1, 0.0);
        off.assign(n, 0.0);
        for (int c = 0; c < n; ++c) {
            if (m[c] <= 0.0) continue;
            const double len = x[c + 1] - x[c], s = m[c] / len;
            const double dl = x[c] - y[c], dr = x[c + 1] - y[c + 1];
            const double P = E->pressure(s);
            const double k = 2.0 * h * s * s * E->d2F(s) / len;
            g[c] += m[c] * (2 * dl + dr) / 3.0 + 2.0 * h * P;
            g[c + 1] += m[c] * (dl + 2 * dr) / 3.0 - 2.0 * h * P;
            diag[c] += 2 * m[c] / 3.0 + k;
            diag[c + 1] += 2 * m[c] / 3.0 + k;
            off[c] = m[c] / 3.0 - k;
        }
        for (int i = 0; i <= n; ++i) {
            if (!active[i]) continue;
            double f, d1, d2;
            V->eval(x[i], f, d1, d2);
            g[i] += 2.0 * h * w[i] * d1;
            diag[i] += 2.0 * h * w[i] * std::max(0.0, d2);
        }
        for (int i = 0; i <= n; ++i) {
            if (free[i]) continue;
            g[i] = 0.0;
            diag[i] = 1.0;
            if (i > 0) off[i - 1] = 0.0;
            if (i < n) off[i] = 0.0;
        }
    }

    // largest step along dx keeping the active nodes ordered; the box is handled by projection
    double max_step(const std::vector<double>& x, const std::vector<double>& dx) const {
        double amax = std::numeric_limits<double>::infinity();
        int prev = -1;
        for (int i = 0; i <= n; ++i) {
            if (!active[i]) continue;
            if (prev >= 0) {
                const double closing = dx[prev] - dx[i];
                if (closing > 0.0) amax = std::min(amax, (x[i] - x[prev]) / closing);
            }
            prev = i;
        }
        return amax;
    }
};

// symmetric tridiagonal solve (Thomas)
void solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    double b = diag[0];
    rhs[0] /= b;
    for (std::size_t i = 1; i < n; ++i) {
        c[i - 1] = off[i - 1] / b;
        b = diag[i] - off[i - 1] * c[i - 1];
        rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / b;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace

JKOStepResult jko_quantile(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                           const JKOOptions& opt, JKOWarmStart* warm) {
    const Domain& d = rho_tilde.domain();
    if (d.dim != 1 || d.boundary != Boundary::noflux)
        fail(ErrorKind::domain_mismatch, "jko: the quantile backend needs a 1D noflux line");
    require(V.domain == d, "jko: potential lives on a different domain");

    Problem p;
    p.n = d.nx();
    p.lo = d.lo[0];
    p.hi = d.hi[0];
    p.h = h;
    p.E = &E;
    p.m = rho_tilde.cell_masses();
    const CubicProfile prof(d.lo[0], d.dx(0), V.values);
    p.V = &prof;
    const int n = p.n;
    p.y.resize(n + 1);
    for (int i = 0; i <= n; ++i) p.y[i] = d.face(0, i);
    p.y[n] = d.hi[0];
    // cells below the vacuum level hand their mass to the nearest heavy cell: a sliver of mass
    // next to a full cell is squeezed to rounding-level length by the exact minimizer
    const double tail = kVacuum * d.dx(0);
    for (int c = 0; c < n;) {
        if (p.m[c] >= tail) {
            ++c;
            continue;
        }
        int e = c;
        double run = 0.0;
        while (e < n && p.m[e] < tail) run += std::exchange(p.m[e++], 0.0);
        if (c > 0) p.m[c - 1] += run;
        else if (e < n) p.m[e] += run;
        c = e;
    }
    p.w.assign(n + 1, 0.0);
    p.active.assign(n + 1, 0);
    p.free.assign(n + 1, 0);
    for (int c = 0; c < n; ++c) {
        if (p.m[c] <= 0.0) continue;
        p.w[c] += 0.5 * p.m[c];
        p.w[c + 1] += 0.5 * p.m[c];
        p.active[c] = p.active[c + 1] = 1;
    }
    for (int i = 1; i < n; ++i) p.free[i] = p.active[i];
    const std::vector<char> movable = p.free;

    std::vector<double> x = p.y;
    bool warmed = false;
    if (warm && warm->nodes.size() == static_cast<std::size_t>(n + 1)) {
        std::vector<double> cand = p.y;
        for (int i = 0; i <= n; ++i)
            if (p.free[i]) cand[i] = warm->nodes[i];
        bool ok = true;
        int prev = -1;
        for (int i = 0; i <= n && ok; ++i) {
            if (!p.active[i]) continue;
            ok = std::isfinite(cand[i]) && cand[i] >= p.lo && cand[i] <= p.hi && (prev < 0 || cand[i] > cand[prev]);
            prev = i;
        }
        if (ok) {
            x = cand;
            warmed = true;
        }
    }

    JKOStepResult r{rho_tilde};
    r.backend = JKOBackend::quantile_1d;

    std::vector<double> g, diag, off, step(n + 1), trial(n + 1);
    double J = 0.0, decrement = 0.0;
    const int cap = std::min(opt.max_iters, 200);
    int it = 0;
    auto newton = [&] {
        J = p.objective(x);
        decrement = std::numeric_limits<double>::infinity();
        for (it = 0; it < cap; ++it) {
            // nodes resting on a wall and pushed outward are held there for this iteration
            p.free = movable;
            p.derivatives(x, g, diag, off);
            bool held = false;
            for (int i = 0; i <= n; ++i)
                if (p.free[i] && ((x[i] <= p.lo && g[i] > 0.0) || (x[i] >= p.hi && g[i] < 0.0))) {
                    p.free[i] = 0;
                    held = true;
                }
            if (held) p.derivatives(x, g, diag, off);
            for (int i = 0; i <= n; ++i) step[i] = -g[i];
            solve_tridiagonal(diag, off, step);
            double gd = 0.0;
            for (int i = 0; i <= n; ++i) gd += g[i] * step[i];
            if (!(gd < 0.0)) {
                // pivots lost to cancellation (squeezed cells make k huge); diagonal step instead
                gd = 0.0;
                for (int i = 0; i <= n; ++i) {
                    step[i] = -g[i] / diag[i];
                    gd += g[i] * step[i];
                }
            }
            const double prev = decrement;
            decrement = std::max(0.0, -gd);
            if (decrement <= 1e-4 * opt.tol * opt.tol * 2.0 * h) break;
            // stalled at the rounding floor
            if (decrement < opt.tol * opt.tol * 2.0 * h && decrement > 0.25 * prev) break;

            const double amax = p.max_step(x, step);
            double alpha = std::min(1.0, 0.99 * amax);
            // near the optimum objective differences are rounding noise; take the plain step
            const bool tiny = decrement < 1e-20 * (std::abs(J) + 2.0 * h);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (int i = 0; i <= n; ++i) trial[i] = std::clamp(x[i] + alpha * step[i], p.lo, p.hi);
                const double Jt = p.objective(trial);
                if (std::isfinite(Jt) && (tiny || Jt <= J + 1e-4 * alpha * gd)) {
                    x.swap(trial);
                    J = Jt;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
        }
    };
    newton();
    if (warmed && !(std::sqrt(decrement / (2.0 * h)) <= opt.tol && std::isfinite(J))) {
        x = p.y;
        newton();
    }
    r.iterations = it + 1;
    r.residual = std::sqrt(decrement / (2.0 * h));
    r.converged = r.residual <= opt.tol && std::isfinite(J);

    LagrangianNodes& L = r.nodes;
    L.x = x;
    L.y = p.y;
    L.mass = p.m;
    L.weight = p.w;
    L.free = p.free;
    L.pressure.assign(n, 0.0);
    L.dV.assign(n + 1, 0.0);
    for (int c = 0; c < n; ++c)
        if (p.m[c] > 0.0) L.pressure[c] = E.pressure(p.m[c] / (x[c + 1] - x[c]));
    for (int i = 0; i <= n; ++i) {
        if (!p.active[i]) continue;
        double f, d1, d2;
        prof.eval(x[i], f, d1, d2);
        L.dV[i] = d1;
    }
    if (warm) warm->nodes = x;

    // back to the grid: monotone Hermite interpolation of the cumulative mass
    std::vector<double> cx, cm;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        if (i > 0) acc += p.m[i - 1];
        if (!p.active[i]) continue;
        if (cx.empty() && x[i] > p.lo) {
            cx.push_back(p.lo);
            cm.push_back(0.0);
        }
        cx.push_back(x[i]);
        cm.push_back(acc);
    }
    if (cx.back() < p.hi) {
        cx.push_back(p.hi);
        cm.push_back(acc);
    }
    std::vector<double> slopes = monotone_slopes(cx, cm);
    const Hermite cdf(std::move(cx), std::move(cm), std::move(slopes));
    std::vector<double> dens(n);
    double left = 0.0;
    for (int c = 0; c < n; ++c) {
        const double right = c + 1 == n ? acc : cdf(d.face(0, c + 1));
        dens[c] = std::max(0.0, right - left) / d.dx(0);
        left = right;
    }
    r.rho = GridMeasure::from_density(d, std::move(dens));
    return r;
}

}  // namespace sjko::detail
