#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "sjko/detail/numerics.hpp"
#include "sjko/diagnostics.hpp"
#include "sjko/error.hpp"

namespace sjko {

double TestFunction::eta(double t) const {
    if (t >= t_cut) return 0.0;
    const double u = 1.0 - (t / t_cut) * (t / t_cut);
    return u * u * u;
}

double TestFunction::eta_dot(double t) const {
    if (t >= t_cut) return 0.0;
    const double u = 1.0 - (t / t_cut) * (t / t_cut);
    return -6.0 * u * u * t / (t_cut * t_cut);
}

namespace {

double offset_q(const TestFunction& f, double x, double y, double& dx, double& dy) {
    dx = x - f.center[0];
    dy = f.dim == 2 ? y - f.center[1] : 0.0;
    return 1.0 - (dx * dx + dy * dy) / (f.radius * f.radius);
}

}  // namespace

double TestFunction::bump(double x, double y) const {
    double dx, dy;
    const double q = offset_q(*this, x, y, dx, dy);
    return q > 0.0 ? q * q * q : 0.0;
}

std::array<double, 2> TestFunction::bump_gradient(double x, double y) const {
    double dx, dy;
    const double q = offset_q(*this, x, y, dx, dy);
    if (q <= 0.0) return {0.0, 0.0};
    const double s = -6.0 * q * q / (radius * radius);
    return {s * dx, s * dy};
}

double TestFunction::bump_laplacian(double x, double y) const {
    double dx, dy;
    const double q = offset_q(*this, x, y, dx, dy);
    if (q <= 0.0) return 0.0;
    const double r2 = radius * radius;
    return 24.0 * q * (dx * dx + dy * dy) / (r2 * r2) - 6.0 * dim * q * q / r2;
}

// radial eigenvalue (24q - 30q^2)/r^2, tangential -6q^2/r^2; both peak in size at 6/r^2
double TestFunction::hessian_sup() const { return 6.0 / (radius * radius); }

TestFunctionBasis TestFunctionBasis::standard(const Domain& d, double T, int per_axis) {
    require(per_axis >= 1, "test functions: per_axis must be positive");
    require(T > 0.0, "test functions: T must be positive");
    TestFunctionBasis b;
    std::array<double, 2> lo{}, sp{};
    for (int a = 0; a < d.dim; ++a) {
        const double margin = 2.0 * d.dx(a);
        lo[a] = d.lo[a] + margin;
        sp[a] = (d.length(a) - 2.0 * margin) / per_axis;
    }
    const double r = 0.5 * (d.dim == 2 ? std::min(sp[0], sp[1]) : sp[0]);
    const int ny = d.dim == 2 ? per_axis : 1;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < per_axis; ++i) {
            TestFunction f;
            f.dim = d.dim;
            f.radius = r;
            f.t_cut = T;
            f.center = {lo[0] + (i + 0.5) * sp[0], d.dim == 2 ? lo[1] + (j + 0.5) * sp[1] : 0.0};
            b.functions.push_back(f);
        }
    return b;
}

std::string WeakResidual::to_json() const {
    nlohmann::json j{{"index", index},
                     {"identity_available", identity_available},
                     {"initial", initial},
                     {"transport", transport},
                     {"pressure", pressure},
                     {"drift", drift},
                     {"remainder", remainder},
                     {"remainder_bound", remainder_bound},
                     {"projection", projection},
                     {"galerkin", galerkin},
                     {"imbalance", imbalance},
                     {"continuum", continuum}};
    return j.dump();
}

namespace {

using GL4 = detail::GaussLegendre<4>;
using GL5 = detail::GaussLegendre<5>;

// int_a^b g(x) dx with g smooth between the breakpoints (exact for piecewise degree <= 9)
template <class G>
double integrate_pieces(double a, double b, const std::array<double, 2>& breaks, G&& g) {
    if (!(b > a)) return 0.0;
    double cuts[4] = {a, 0.0, 0.0, b};
    int n = 1;
    for (double c : breaks)
        if (c > a && c < b) cuts[n++] = c;
    cuts[n] = b;
    if (n == 3 && cuts[1] > cuts[2]) std::swap(cuts[1], cuts[2]);
    double s = 0.0;
    for (int p = 0; p < n; ++p) {
        const double l = cuts[p], len = cuts[p + 1] - cuts[p];
        for (int q = 0; q < 5; ++q) s += GL5::weights[q] * len * g(l + GL5::nodes[q] * len);
    }
    return s;
}

// sum_c b(x_c) m_c
double grid_pairing(const std::vector<double>& b, const GridMeasure& rho) {
    std::vector<double> t(rho.size());
    const double vol = rho.domain().cell_volume();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = b[i] * rho[i] * vol;
    return detail::pairwise_sum(t);
}

struct OnGrid {
    std::vector<double> b, gx, gy, lap;
};

OnGrid sample(const TestFunction& f, const Domain& d) {
    OnGrid o;
    const std::size_t n = d.size();
    o.b.resize(n);
    o.gx.resize(n);
    o.gy.resize(n);
    o.lap.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = d.point(i);
        o.b[i] = f.bump(p[0], p[1]);
        const auto g = f.bump_gradient(p[0], p[1]);
        o.gx[i] = g[0];
        o.gy[i] = g[1];
        o.lap[i] = f.bump_laplacian(p[0], p[1]);
    }
    return o;
}

// Lagrangian pieces of one step, for phi = b (the time factor is applied by the caller)
struct StepTerms {
    double qx = 0.0, qy = 0.0;  // int b d(rho_L), int b d(rho_tilde)
    double a = 0.0;             // sum_i b'(X_i) int (X - Y) psi_i dm
    double exact = 0.0;         // int (Y - X) b'(X(u)) du
    double pressure = 0.0, drift = 0.0, w2 = 0.0;
};

StepTerms lagrangian_terms(const TestFunction& f, const LagrangianNodes& L) {
    StepTerms s;
    const std::array<double, 2> br{f.center[0] - f.radius, f.center[0] + f.radius};
    auto db = [&](double x) { return f.bump_gradient(x)[0]; };
    const std::size_t n = L.mass.size();
    std::vector<double> qx(n, 0.0), qy(n, 0.0), a(n, 0.0), ex(n, 0.0), pr(n, 0.0), w2(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const double m = L.mass[c];
        if (m <= 0.0) continue;
        const double x0 = L.x[c], x1 = L.x[c + 1], y0 = L.y[c], y1 = L.y[c + 1];
        const double lx = x1 - x0, ly = y1 - y0;
        const double dl = x0 - y0, dr = x1 - y1;
        auto b = [&](double x) { return f.bump(x); };
        qx[c] = m / lx * integrate_pieces(x0, x1, br, b);
        qy[c] = m / ly * integrate_pieces(y0, y1, br, b);
        const double bl = db(x0), brr = db(x1);
        a[c] = m * (bl * (2 * dl + dr) + brr * (dl + 2 * dr)) / 6.0;
        ex[c] = m / lx * integrate_pieces(x0, x1, br, [&](double x) {
                    const double u = (x - x0) / lx;
                    return -((1 - u) * dl + u * dr) * db(x);
                });
        pr[c] = -L.pressure[c] * (brr - bl);
        w2[c] = m * (dl * dl + dl * dr + dr * dr) / 3.0;
    }
    s.qx = detail::pairwise_sum(qx);
    s.qy = detail::pairwise_sum(qy);
    s.a = detail::pairwise_sum(a);
    s.exact = detail::pairwise_sum(ex);
    s.pressure = detail::pairwise_sum(pr);
    s.w2 = detail::pairwise_sum(w2);
    std::vector<double> v(L.x.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (L.weight[i] > 0.0) v[i] = L.weight[i] * L.dV[i] * db(L.x[i]);
    s.drift = detail::pairwise_sum(v);
    return s;
}

}  // namespace

std::vector<WeakResidual> weak_residual(const SchemeTrajectory& traj, const TestFunctionBasis& basis,
                                        const EnergySpec& E, const DriftModel& drift) {
    const int N = traj.steps();
    require(N >= 1 && traj.rho.size() == static_cast<std::size_t>(N + 1), "weak_residual: incomplete trajectory");
    const Domain& d = traj.rho.front().domain();
    const double h = traj.h;

    bool lagrangian = d.dim == 1 && !traj.transport_only && traj.nodes.size() == static_cast<std::size_t>(N);
    for (int k = 0; lagrangian && k < N; ++k)
        if (traj.nodes[k].empty() || traj.records[k].fell_back || !traj.W[k].is_zero()) lagrangian = false;

    // the continuum residual needs U[rho^{k+1}] and P(rho^{k+1}) once per step
    std::vector<VectorField> U;
    std::vector<ScalarField> P;
    U.reserve(N);
    P.reserve(N);
    for (int k = 0; k < N; ++k) {
        U.push_back(drift.is_zero() ? VectorField::zeros(d) : evaluate_drift(drift, traj.rho[k + 1]));
        P.push_back(pressure_field(E, traj.rho[k + 1]));
    }
    // tilde2 at the Gauss nodes of each step; plain rho^k when W vanishes
    std::vector<std::array<GridMeasure const*, 4>> t2(N);
    std::vector<GridMeasure> t2store;
    t2store.reserve(static_cast<std::size_t>(4 * N));
    for (int k = 0; k < N; ++k)
        for (int q = 0; q < 4; ++q) {
            if (traj.W[k].is_zero()) {
                t2[k][q] = &traj.rho[k];
            } else {
                t2store.push_back(transport_step(traj.rho[k], traj.W[k], GL4::nodes[q] * h, traj.transport));
                t2[k][q] = &t2store.back();
            }
        }

    const double vol = d.cell_volume();
    std::vector<WeakResidual> out;
    for (std::size_t j = 0; j < basis.functions.size(); ++j) {
        const TestFunction& f = basis.functions[j];
        const OnGrid g = sample(f, d);
        WeakResidual w;
        w.index = static_cast<int>(j);
        w.identity_available = lagrangian;
        w.initial = f.eta(0.0) * grid_pairing(g.b, traj.rho.front());

        std::vector<double> transport(N), cont(N), pterm(N, 0.0), vterm(N, 0.0), rem(N, 0.0), gal(N, 0.0),
            proj(N, 0.0), w2(N, 0.0);
        for (int k = 0; k < N; ++k) {
            const double t0 = k * h;
            double tr = 0.0, eta_int = 0.0;
            for (int q = 0; q < 4; ++q) {
                const double t = t0 + GL4::nodes[q] * h;
                const double e = f.eta(t), ed = f.eta_dot(t);
                const VectorField& W = traj.W[k];
                std::vector<double> integrand(d.size());
                for (std::size_t i = 0; i < d.size(); ++i) {
                    double v = ed * g.b[i];
                    if (!W.x.empty()) v += e * (W.x[i] * g.gx[i] + (W.y.empty() ? 0.0 : W.y[i] * g.gy[i]));
                    integrand[i] = v;
                }
                tr += GL4::weights[q] * h * grid_pairing(integrand, *t2[k][q]);
                eta_int += GL4::weights[q] * h * e;
            }
            transport[k] = tr;

            // continuum: int (rho phi_t - rho U . grad phi + P lap phi) over the step
            const double e1 = f.eta(t0 + h), e0 = f.eta(t0);
            std::vector<double> ug(d.size()), pl(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                ug[i] = U[k].x[i] * g.gx[i] + (U[k].y.empty() ? 0.0 : U[k].y[i] * g.gy[i]);
                pl[i] = P[k].values[i] * g.lap[i] * vol;
            }
            cont[k] = (e1 - e0) * grid_pairing(g.b, traj.rho[k + 1]) -
                      eta_int * grid_pairing(ug, traj.rho[k + 1]) + eta_int * detail::pairwise_sum(pl);

            if (!lagrangian || e1 == 0.0) continue;
            const StepTerms s = lagrangian_terms(f, traj.nodes[k]);
            const double qrho = grid_pairing(g.b, traj.rho[k + 1]);
            const double qtil = grid_pairing(g.b, traj.tilde[k + 1]);
            pterm[k] = e1 * s.pressure;
            vterm[k] = e1 * s.drift;
            rem[k] = e1 * (s.qy - s.qx - s.exact);
            gal[k] = e1 * (s.exact + s.a);
            proj[k] = e1 * ((qrho - s.qx) - (qtil - s.qy));
            w2[k] = s.w2;
        }
        w.transport = detail::pairwise_sum(transport);
        w.continuum = w.initial + detail::pairwise_sum(cont);
        if (lagrangian) {
            w.pressure = h * detail::pairwise_sum(pterm);
            w.drift = h * detail::pairwise_sum(vterm);
            w.remainder = detail::pairwise_sum(rem);
            w.galerkin = detail::pairwise_sum(gal);
            w.projection = detail::pairwise_sum(proj);
            w.remainder_bound = 0.5 * f.hessian_sup() * detail::pairwise_sum(w2);
            w.imbalance = w.initial + w.transport + w.projection - w.pressure - w.drift - w.remainder - w.galerkin;
        } else {
            w.imbalance = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(w);
    }
    return out;
}

}  // namespace sjko
