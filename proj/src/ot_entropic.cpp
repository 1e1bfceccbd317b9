#include <algorithm>
#include <cmath>
#include <limits>

#include "sjko/detail/numerics.hpp"
#include "sjko/detail/sinkhorn.hpp"
#include "sjko/error.hpp"
#include "sjko/ot.hpp"

namespace sjko::detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// exp(-40) is far below double resolution relative to the leading term
constexpr double kCut = 40.0;

inline double lse_raw(const double* v, std::size_t n) {
    double m = kNegInf;
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, v[k]);
    if (m == kNegInf) return kNegInf;
    const double cut = m - kCut;
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (v[k] > cut) s += std::exp(v[k] - m);
    return m + std::log(s);
}

void axis_tables(const Domain& d, int axis, std::vector<double>& c, std::vector<double>& disp) {
    const int n = axis == 0 ? d.nx() : d.ny();
    c.assign(static_cast<std::size_t>(n) * n, 0.0);
    disp.assign(static_cast<std::size_t>(n) * n, 0.0);
    if (axis == 1 && d.dim == 1) return;
    const double L = d.length(axis);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double dd = d.center(axis, j) - d.center(axis, i);
            if (d.boundary == Boundary::periodic) dd -= L * std::round(dd / L);
            c[i * n + j] = dd * dd;
            disp[i * n + j] = dd;
        }
}

}  // namespace

double log_sum_exp(std::span<const double> args) { return lse_raw(args.data(), args.size()); }

GridGibbs::GridGibbs(const Domain& d) : d_(d), n_(d.size()), nx_(d.nx()), ny_(d.ny()) {
    axis_tables(d, 0, cx_, dx_);
    axis_tables(d, 1, cy_, dy_);
    max_cost_ = *std::max_element(cx_.begin(), cx_.end()) + *std::max_element(cy_.begin(), cy_.end());
}

double GridGibbs::cost(std::size_t i, std::size_t j) const {
    const std::size_t ix = i % nx_, iy = i / nx_, jx = j % nx_, jy = j / nx_;
    return cx_[ix * nx_ + jx] + cy_[iy * ny_ + jy];
}

namespace {

// -log-sum-exp over j of v[j] - c[j] * inv for one row of a same-grid axis.
// Terms below max - kCut are dropped, and since the zero-cost diagonal bounds
// the max from below only a window around i can survive; scan just that.
double lse_row(const double* v, const double* c, double inv, std::size_t n, std::size_t i, double vmax,
               double step2, bool periodic, double* buf) {
    const double m0 = v[i];
    if (m0 > kNegInf) {
        const double r = std::floor(std::sqrt((vmax - m0 + kCut) / step2));
        if (2 * r + 1 < static_cast<double>(n)) {
            const long R = static_cast<long>(r), ni = static_cast<long>(n), ii = static_cast<long>(i);
            const long a = periodic ? ii - R : std::max(0L, ii - R);
            const long b = periodic ? ii + R : std::min(ni - 1, ii + R);
            std::size_t cnt = 0;
            for (long jj = a; jj <= b; ++jj) {
                const std::size_t j = static_cast<std::size_t>(jj < 0 ? jj + ni : (jj >= ni ? jj - ni : jj));
                buf[cnt++] = v[j] - c[j] * inv;
            }
            return lse_raw(buf, cnt);
        }
    }
    for (std::size_t j = 0; j < n; ++j) buf[j] = v[j] - c[j] * inv;
    return lse_raw(buf, n);
}

}  // namespace

void GridGibbs::softmin_rows(std::span<const double> h, double eps, std::span<double> out) const {
    const double inv = 1.0 / eps;
    const std::size_t nx = nx_, ny = ny_;
    const bool per = d_.boundary == Boundary::periodic;
    const double sx = d_.dx(0) * d_.dx(0) * inv;
    std::vector<double> args(std::max(nx, ny));
    if (ny == 1) {
        scratch_.resize(nx);
        double vmax = kNegInf;
        for (std::size_t jx = 0; jx < nx; ++jx) {
            scratch_[jx] = h[jx] * inv;
            vmax = std::max(vmax, scratch_[jx]);
        }
        for (std::size_t ix = 0; ix < nx; ++ix)
            out[ix] = -eps * lse_row(scratch_.data(), &cx_[ix * nx], inv, nx, ix, vmax, sx, per, args.data());
        return;
    }
    const double sy = d_.dx(1) * d_.dx(1) * inv;
    scratch_.resize(n_);
    stage_.resize(n_);
    for (std::size_t jy = 0; jy < ny; ++jy)
        for (std::size_t jx = 0; jx < nx; ++jx) scratch_[jx * ny + jy] = h[jy * nx + jx] * inv;
    for (std::size_t jx = 0; jx < nx; ++jx) {
        const double* hv = &scratch_[jx * ny];
        const double vmax = *std::max_element(hv, hv + ny);
        for (std::size_t iy = 0; iy < ny; ++iy)
            stage_[iy * nx + jx] = lse_row(hv, &cy_[iy * ny], inv, ny, iy, vmax, sy, per, args.data());
    }
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double* st = &stage_[iy * nx];
        const double vmax = *std::max_element(st, st + nx);
        for (std::size_t ix = 0; ix < nx; ++ix)
            out[iy * nx + ix] = -eps * lse_row(st, &cx_[ix * nx], inv, nx, ix, vmax, sx, per, args.data());
    }
}

void GridGibbs::mean_displacement(std::span<const double> h, double eps,
                                  std::vector<std::array<double, 2>>& out) const {
    const double inv = 1.0 / eps;
    const std::size_t nx = nx_, ny = ny_;
    out.assign(n_, {0.0, 0.0});
    std::vector<double> args(std::max(nx, ny));
    // second-stage inputs: log-mass and conditional mean of dy per (iy, jx)
    std::vector<double> B(n_), Ey(n_, 0.0);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t jx = 0; jx < nx; ++jx) {
            if (ny == 1) {
                B[jx] = h[jx] * inv;
                continue;
            }
            const double* c = &cy_[iy * ny];
            double m = kNegInf;
            for (std::size_t jy = 0; jy < ny; ++jy) {
                args[jy] = (h[jy * nx + jx] - c[jy]) * inv;
                m = std::max(m, args[jy]);
            }
            if (m == kNegInf) {
                B[iy * nx + jx] = kNegInf;
                continue;
            }
            double s = 0.0, sy = 0.0;
            for (std::size_t jy = 0; jy < ny; ++jy) {
                if (args[jy] <= m - kCut) continue;
                const double w = std::exp(args[jy] - m);
                s += w;
                sy += w * dy_[iy * ny + jy];
            }
            B[iy * nx + jx] = m + std::log(s);
            Ey[iy * nx + jx] = sy / s;
        }
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double* c = &cx_[ix * nx];
            double m = kNegInf;
            for (std::size_t jx = 0; jx < nx; ++jx) {
                args[jx] = B[iy * nx + jx] - c[jx] * inv;
                m = std::max(m, args[jx]);
            }
            double s = 0.0, sx = 0.0, sy = 0.0;
            for (std::size_t jx = 0; jx < nx; ++jx) {
                if (args[jx] <= m - kCut) continue;
                const double w = std::exp(args[jx] - m);
                s += w;
                sx += w * dx_[ix * nx + jx];
                sy += w * Ey[iy * nx + jx];
            }
            out[iy * nx + ix] = {sx / s, sy / s};
        }
}

DenseGibbs::DenseGibbs(const std::vector<std::array<double, 2>>& x,
                       const std::vector<std::array<double, 2>>& y)
    : x_(x), y_(y), n_(x.size()), m_(y.size()), c_(n_ * m_) {
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < m_; ++j) {
            const double a = x[i][0] - y[j][0], b = x[i][1] - y[j][1];
            c_[i * m_ + j] = a * a + b * b;
            max_cost_ = std::max(max_cost_, c_[i * m_ + j]);
        }
}

void DenseGibbs::softmin_rows(std::span<const double> h, double eps, std::span<double> out) const {
    std::vector<double> args(m_);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) args[j] = (h[j] - c_[i * m_ + j]) / eps;
        out[i] = -eps * lse_raw(args.data(), m_);
    }
}

void DenseGibbs::softmin_cols(std::span<const double> h, double eps, std::span<double> out) const {
    std::vector<double> args(n_);
    for (std::size_t j = 0; j < m_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) args[i] = (h[i] - c_[i * m_ + j]) / eps;
        out[j] = -eps * lse_raw(args.data(), n_);
    }
}

void DenseGibbs::mean_displacement(std::span<const double> h, double eps,
                                   std::vector<std::array<double, 2>>& out) const {
    out.assign(n_, {0.0, 0.0});
    std::vector<double> args(m_);
    for (std::size_t i = 0; i < n_; ++i) {
        double m = kNegInf;
        for (std::size_t j = 0; j < m_; ++j) {
            args[j] = (h[j] - c_[i * m_ + j]) / eps;
            m = std::max(m, args[j]);
        }
        double s = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < m_; ++j) {
            if (args[j] <= m - kCut) continue;
            const double w = std::exp(args[j] - m);
            s += w;
            sx += w * (y_[j][0] - x_[i][0]);
            sy += w * (y_[j][1] - x_[i][1]);
        }
        out[i] = {sx / s, sy / s};
    }
}

std::vector<double> eps_schedule(double eps, double start, const EntropicOptions& opt) {
    std::vector<double> s;
    if (opt.eps_scaling && start > eps) {
        const double q = std::clamp(opt.scaling_factor, 0.05, 0.95);
        for (double e = start; e > eps; e *= q) s.push_back(e);
    }
    s.push_back(eps);
    return s;
}

namespace {

std::vector<double> logs(std::span<const double> w) {
    std::vector<double> l(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) l[i] = w[i] > 0.0 ? std::log(w[i]) : kNegInf;
    return l;
}

double weighted_sum(std::span<const double> w, const std::vector<double>& v) {
    std::vector<double> t(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) t[i] = w[i] * v[i];
    return pairwise_sum(t);
}

double marginal_gap(std::span<const double> a, const std::vector<double>& f,
                    const std::vector<double>& fnew, double eps) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > 0.0) err += a[i] * std::abs(1.0 - std::exp((f[i] - fnew[i]) / eps));
    return err;
}

}  // namespace

SinkhornState sinkhorn(const GibbsOperator& K, std::span<const double> a, std::span<const double> b,
                       double eps, const EntropicOptions& opt, const SinkhornState* warm) {
    const std::size_t n = K.rows(), m = K.cols();
    const std::vector<double> la = logs(a), lb = logs(b);
    SinkhornState st;
    st.f = warm && warm->f.size() == n ? warm->f : std::vector<double>(n, 0.0);
    st.g.assign(m, 0.0);
    std::vector<double> ha(n), hb(m), fnew(n);

    const auto schedule = eps_schedule(eps, warm ? eps : K.max_cost(), opt);
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const double e = schedule[s];
        const bool last = s + 1 == schedule.size();
        const double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-2);
        const int cap = last ? opt.max_iters : 200;
        const double omega = last ? opt.over_relaxation : 1.0;
        for (int it = 0; it < cap && st.iterations < opt.max_iters; ++it) {
            for (std::size_t i = 0; i < n; ++i) ha[i] = st.f[i] + e * la[i];
            K.softmin_cols(ha, e, st.g);
            for (std::size_t j = 0; j < m; ++j) hb[j] = st.g[j] + e * lb[j];
            K.softmin_rows(hb, e, fnew);
            st.marginal_error = marginal_gap(a, st.f, fnew, e);
            for (std::size_t i = 0; i < n; ++i)
                st.f[i] = (a[i] > 0.0 && omega != 1.0) ? (1.0 - omega) * st.f[i] + omega * fnew[i] : fnew[i];
            ++st.iterations;
            if (st.marginal_error < stage_tol) break;
        }
    }
    st.converged = st.marginal_error < opt.tol;
    st.value = weighted_sum(a, st.f) + weighted_sum(b, st.g);
    return st;
}

SinkhornState sinkhorn_symmetric(const GibbsOperator& K, std::span<const double> a, double eps,
                                 const EntropicOptions& opt) {
    const std::size_t n = K.rows();
    const std::vector<double> la = logs(a);
    SinkhornState st;
    st.f.assign(n, 0.0);
    std::vector<double> ha(n), t(n);
    const auto schedule = eps_schedule(eps, K.max_cost(), opt);
    for (std::size_t s = 0; s < schedule.size(); ++s) {
        const double e = schedule[s];
        const bool last = s + 1 == schedule.size();
        const double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-2);
        const int cap = last ? opt.max_iters : 200;
        for (int it = 0; it < cap && st.iterations < opt.max_iters; ++it) {
            for (std::size_t i = 0; i < n; ++i) ha[i] = st.f[i] + e * la[i];
            K.softmin_rows(ha, e, t);
            st.marginal_error = marginal_gap(a, st.f, t, e);
            for (std::size_t i = 0; i < n; ++i) st.f[i] = 0.5 * (st.f[i] + t[i]);
            ++st.iterations;
            if (st.marginal_error < stage_tol) break;
        }
    }
    st.converged = st.marginal_error < opt.tol;
    st.value = 2.0 * weighted_sum(a, st.f);
    return st;
}

}  // namespace sjko::detail

namespace sjko {

namespace {

std::vector<double> unit(std::vector<double> w) {
    const double s = detail::pairwise_sum(w);
    for (double& v : w) v /= s;
    return w;
}

OTResult finish(const detail::GibbsOperator& K, const detail::GibbsOperator& Kaa,
                const detail::GibbsOperator& Kbb, const std::vector<double>& a,
                const std::vector<double>& b, double eps, const EntropicOptions& opt,
                const Domain* periodic_domain) {
    const detail::SinkhornState st = detail::sinkhorn(K, a, b, eps, opt);
    OTResult r;
    r.epsilon = eps;
    r.iterations = st.iterations;
    r.marginal_error = st.marginal_error;
    r.converged = st.converged;
    r.cost = st.value;
    if (opt.debias) {
        const auto sa = detail::sinkhorn_symmetric(Kaa, a, eps, opt);
        const auto sb = detail::sinkhorn_symmetric(Kbb, b, eps, opt);
        r.cost -= 0.5 * (sa.value + sb.value);
        r.iterations += sa.iterations + sb.iterations;
        r.marginal_error = std::max({r.marginal_error, sa.marginal_error, sb.marginal_error});
        r.converged = r.converged && sa.converged && sb.converged;
    }
    r.cost = std::max(0.0, r.cost);
    r.dual_f = st.f;
    r.dual_g = st.g;
    r.source_weights = a;
    r.potential.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.potential[i] = 0.5 * st.f[i];

    std::vector<double> hb(b.size());
    for (std::size_t j = 0; j < b.size(); ++j)
        hb[j] = b[j] > 0.0 ? st.g[j] + eps * std::log(b[j]) : -std::numeric_limits<double>::infinity();
    if (opt.want_map) {
        std::vector<std::array<double, 2>> disp;
        K.mean_displacement(hb, eps, disp);
        r.map.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto p = K.source_point(i);
            p[0] += disp[i][0];
            p[1] += disp[i][1];
            if (periodic_domain) {
                for (int ax = 0; ax < periodic_domain->dim; ++ax) {
                    const double L = periodic_domain->length(ax);
                    p[ax] -= L * std::floor((p[ax] - periodic_domain->lo[ax]) / L);
                }
            }
            r.map[i] = p;
        }
    }
    if (opt.want_plan) {
        require(a.size() * b.size() <= (std::size_t{1} << 24), "w2_entropic: plan too large to materialize");
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] <= 0.0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (b[j] <= 0.0) continue;
                const double v = a[i] * b[j] * std::exp((st.f[i] + st.g[j] - K.cost(i, j)) / eps);
                if (v > 1e-16) r.plan.push_back({i, j, v});
            }
        }
    }
    return r;
}

}  // namespace

OTResult w2_entropic(const GridMeasure& rho, const GridMeasure& mu, const EntropicOptions& opt) {
    const Domain& d = rho.domain();
    if (!(d == mu.domain())) fail(ErrorKind::domain_mismatch, "w2_entropic: measures live on different domains");
    double eps = opt.epsilon;
    if (eps <= 0.0) {
        const double h = d.dim == 2 ? std::max(d.dx(0), d.dx(1)) : d.dx(0);
        eps = h * h;
    }
    const detail::GridGibbs K(d);
    const std::vector<double> a = unit(rho.cell_masses()), b = unit(mu.cell_masses());
    return finish(K, K, K, a, b, eps, opt, d.boundary == Boundary::periodic ? &d : nullptr);
}

OTResult w2_entropic(const DiscreteMeasure& a, const DiscreteMeasure& b, const EntropicOptions& opt) {
    a.validate();
    b.validate();
    require(opt.epsilon > 0.0, "w2_entropic: atoms need an explicit epsilon");
    require(std::abs(a.total() - b.total()) <= 1e-9 * a.total(), "w2_entropic: total masses differ");
    const detail::DenseGibbs K(a.points, b.points), Kaa(a.points, a.points), Kbb(b.points, b.points);
    const double scale = a.total();
    OTResult r = finish(K, Kaa, Kbb, unit(a.weights), unit(b.weights), opt.epsilon, opt, nullptr);
    r.cost *= scale;
    for (auto& e : r.plan) e.mass *= scale;
    r.source_weights = a.weights;
    return r;
}

}  // namespace sjko
