#include "sjko/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <json.hpp>

#include "sjko/detail/fft.hpp"
#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"

namespace sjko {

VectorField VectorField::zeros(const Domain& d) {
    VectorField v;
    v.domain = d;
    v.x.assign(d.size(), 0.0);
    v.y.assign(d.size(), 0.0);
    if (d.boundary == Boundary::noflux) {
        v.fx.assign(static_cast<std::size_t>(d.nx() + 1) * d.ny(), 0.0);
        if (d.dim == 2) v.fy.assign(static_cast<std::size_t>(d.nx()) * (d.ny() + 1), 0.0);
    }
    return v;
}

double VectorField::max_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::hypot(x[i], y[i]));
    return m;
}

bool VectorField::is_zero() const {
    auto zero = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double a) { return a == 0.0; });
    };
    return zero(x) && zero(y) && zero(fx) && zero(fy);
}

void VectorField::validate() const {
    require(x.size() == domain.size() && y.size() == domain.size(), "vector field size mismatch");
    for (const auto* v : {&x, &y, &fx, &fy})
        for (double a : *v)
            if (!std::isfinite(a)) fail(ErrorKind::non_finite, "vector field has a non-finite entry");
}

namespace {

HelmholtzSplit decompose_periodic(const VectorField& U) {
    const Domain& d = U.domain;
    const int nx = d.nx(), ny = d.ny();
    detail::RealFFT fft(ny, nx);
    std::vector<std::complex<double>> Ux, Uy, Vh, Gx, Gy;
    fft.forward(U.x, Ux);
    if (d.dim == 2) fft.forward(U.y, Uy);
    const int hx = nx / 2 + 1;
    Vh.assign(Ux.size(), 0.0);
    Gx.assign(Ux.size(), 0.0);
    Gy.assign(Ux.size(), 0.0);
    const std::complex<double> I(0.0, 1.0);
    for (int jy = 0; jy < ny; ++jy) {
        const double ky = d.dim == 2 ? detail::wavenumber(jy, ny, d.length(1)) : 0.0;
        for (int jx = 0; jx < hx; ++jx) {
            const double kx = detail::wavenumber(jx, nx, d.length(0));
            const double k2 = kx * kx + ky * ky;
            if (k2 == 0.0) continue;
            const std::size_t k = static_cast<std::size_t>(jy) * hx + jx;
            const std::complex<double> kU = kx * Ux[k] + (d.dim == 2 ? ky * Uy[k] : 0.0);
            Vh[k] = -I * kU / k2;
            Gx[k] = kx * kU / k2;
            Gy[k] = ky * kU / k2;
        }
    }
    const double inv = 1.0 / static_cast<double>(d.size());
    HelmholtzSplit s;
    s.V.domain = d;
    s.gradV = VectorField::zeros(d);
    fft.inverse(Vh, s.V.values);
    fft.inverse(Gx, s.gradV.x);
    if (d.dim == 2) fft.inverse(Gy, s.gradV.y);
    for (double& v : s.V.values) v *= inv;
    for (double& v : s.gradV.x) v *= inv;
    for (double& v : s.gradV.y) v *= inv;
    s.W = VectorField::zeros(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        s.W.x[i] = s.gradV.x[i] - U.x[i];
        s.W.y[i] = s.gradV.y[i] - U.y[i];
    }
    return s;
}

// Normal components at the faces of one axis. Interior faces average the
// adjacent cells; wall faces extrapolate linearly.
std::vector<double> face_values(const Domain& d, const std::vector<double>& c, int axis) {
    const int nx = d.nx(), ny = d.ny();
    const int na = axis == 0 ? nx : ny;
    std::vector<double> f(axis == 0 ? static_cast<std::size_t>(nx + 1) * ny
                                    : static_cast<std::size_t>(nx) * (ny + 1));
    auto cell = [&](int along, int across) {
        return axis == 0 ? c[d.index(along, across)] : c[d.index(across, along)];
    };
    auto face = [&](int along, int across) -> double& {
        return axis == 0 ? f[static_cast<std::size_t>(across) * (nx + 1) + along]
                         : f[static_cast<std::size_t>(along) * nx + across];
    };
    const int nacross = axis == 0 ? ny : nx;
    for (int q = 0; q < nacross; ++q) {
        for (int i = 1; i < na; ++i) face(i, q) = 0.5 * (cell(i - 1, q) + cell(i, q));
        if (na >= 2) {
            face(0, q) = 1.5 * cell(0, q) - 0.5 * cell(1, q);
            face(na, q) = 1.5 * cell(na - 1, q) - 0.5 * cell(na - 2, q);
        } else {
            face(0, q) = face(1, q) = cell(0, q);
        }
    }
    return f;
}

HelmholtzSplit decompose_noflux(const VectorField& U) {
    const Domain& d = U.domain;
    const int nx = d.nx(), ny = d.ny();
    const double hx = d.dx(0), hy = d.dim == 2 ? d.dx(1) : 1.0;
    const std::size_t sx = static_cast<std::size_t>(nx + 1);

    std::vector<double> ux = U.has_faces() ? U.fx : face_values(d, U.x, 0);
    std::vector<double> uy;
    if (d.dim == 2) uy = (U.has_faces() && !U.fy.empty()) ? U.fy : face_values(d, U.y, 1);

    // L_N V = div of the face field with the wall faces removed
    std::vector<double> rhs(d.size(), 0.0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const double right = ix + 1 < nx ? ux[iy * sx + ix + 1] : 0.0;
            const double left = ix > 0 ? ux[iy * sx + ix] : 0.0;
            double r = (right - left) / hx;
            if (d.dim == 2) {
                const double top = iy + 1 < ny ? uy[static_cast<std::size_t>(iy + 1) * nx + ix] : 0.0;
                const double bot = iy > 0 ? uy[static_cast<std::size_t>(iy) * nx + ix] : 0.0;
                r += (top - bot) / hy;
            }
            rhs[d.index(ix, iy)] = r;
        }

    detail::CosineTransform dct(ny, nx);
    std::vector<double> spec, V;
    dct.forward(rhs, spec);
    for (int ky = 0; ky < ny; ++ky) {
        const double ly = d.dim == 2 ? (2.0 * std::cos(std::numbers::pi * ky / ny) - 2.0) / (hy * hy) : 0.0;
        for (int kx = 0; kx < nx; ++kx) {
            const double lx = (2.0 * std::cos(std::numbers::pi * kx / nx) - 2.0) / (hx * hx);
            const std::size_t k = d.index(kx, ky);
            spec[k] = (kx == 0 && ky == 0) ? 0.0 : spec[k] / (lx + ly);
        }
    }
    dct.inverse(spec, V);
    const double scale = 1.0 / dct.round_trip_scale();
    for (double& v : V) v *= scale;

    HelmholtzSplit s;
    s.V = {d, V};
    s.gradV = VectorField::zeros(d);
    s.W = VectorField::zeros(d);
    for (int iy = 0; iy < ny; ++iy)
        for (int i = 0; i <= nx; ++i) {
            const std::size_t f = iy * sx + i;
            const double g = (i == 0 || i == nx) ? ux[f] : (V[d.index(i, iy)] - V[d.index(i - 1, iy)]) / hx;
            s.gradV.fx[f] = g;
            s.W.fx[f] = (i == 0 || i == nx) ? 0.0 : g - ux[f];
        }
    if (d.dim == 2) {
        for (int j = 0; j <= ny; ++j)
            for (int ix = 0; ix < nx; ++ix) {
                const std::size_t f = static_cast<std::size_t>(j) * nx + ix;
                const double g = (j == 0 || j == ny) ? uy[f] : (V[d.index(ix, j)] - V[d.index(ix, j - 1)]) / hy;
                s.gradV.fy[f] = g;
                s.W.fy[f] = (j == 0 || j == ny) ? 0.0 : g - uy[f];
            }
    }
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t c = d.index(ix, iy);
            s.gradV.x[c] = 0.5 * (s.gradV.fx[iy * sx + ix] + s.gradV.fx[iy * sx + ix + 1]);
            s.W.x[c] = 0.5 * (s.W.fx[iy * sx + ix] + s.W.fx[iy * sx + ix + 1]);
            if (d.dim == 2) {
                s.gradV.y[c] = 0.5 * (s.gradV.fy[static_cast<std::size_t>(iy) * nx + ix] +
                                      s.gradV.fy[static_cast<std::size_t>(iy + 1) * nx + ix]);
                s.W.y[c] = 0.5 * (s.W.fy[static_cast<std::size_t>(iy) * nx + ix] +
                                  s.W.fy[static_cast<std::size_t>(iy + 1) * nx + ix]);
            }
        }
    // the only tangential divergence-free field on a segment is zero
    if (d.dim == 1) s.W = VectorField::zeros(d);
    return s;
}

}  // namespace

HelmholtzSplit decompose(const VectorField& U) {
    U.validate();
    HelmholtzSplit s = U.domain.boundary == Boundary::periodic ? decompose_periodic(U) : decompose_noflux(U);
    for (double v : s.V.values)
        if (!std::isfinite(v)) fail(ErrorKind::solver_failure, "Poisson solve produced non-finite values");
    return s;
}

ScalarField divergence(const VectorField& F) {
    const Domain& d = F.domain;
    const int nx = d.nx(), ny = d.ny();
    ScalarField out = ScalarField::zeros(d);
    if (d.boundary == Boundary::periodic) {
        detail::RealFFT fft(ny, nx);
        std::vector<std::complex<double>> Fx, Fy;
        fft.forward(F.x, Fx);
        if (d.dim == 2) fft.forward(F.y, Fy);
        const int hx = nx / 2 + 1;
        const std::complex<double> I(0.0, 1.0);
        for (int jy = 0; jy < ny; ++jy) {
            const double ky = d.dim == 2 ? detail::wavenumber(jy, ny, d.length(1)) : 0.0;
            for (int jx = 0; jx < hx; ++jx) {
                const std::size_t k = static_cast<std::size_t>(jy) * hx + jx;
                const double kx = detail::wavenumber(jx, nx, d.length(0));
                Fx[k] = I * (kx * Fx[k] + (d.dim == 2 ? ky * Fy[k] : 0.0));
            }
        }
        fft.inverse(Fx, out.values);
        for (double& v : out.values) v /= static_cast<double>(d.size());
        return out;
    }
    const double hx = d.dx(0), hy = d.dim == 2 ? d.dx(1) : 1.0;
    if (F.has_faces()) {
        const std::size_t sx = nx + 1;
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                double r = (F.fx[iy * sx + ix + 1] - F.fx[iy * sx + ix]) / hx;
                if (d.dim == 2)
                    r += (F.fy[static_cast<std::size_t>(iy + 1) * nx + ix] -
                          F.fy[static_cast<std::size_t>(iy) * nx + ix]) / hy;
                out.values[d.index(ix, iy)] = r;
            }
        return out;
    }
    const VectorField gx = centered_gradient({d, F.x});
    out.values = gx.x;
    if (d.dim == 2) {
        const VectorField gy = centered_gradient({d, F.y});
        for (std::size_t i = 0; i < d.size(); ++i) out.values[i] += gy.y[i];
    }
    return out;
}

VectorField centered_gradient(const ScalarField& f) {
    const Domain& d = f.domain;
    require(f.values.size() == d.size(), "centered_gradient: size mismatch");
    VectorField g = VectorField::zeros(d);
    g.fx.clear();
    g.fy.clear();
    const bool per = d.boundary == Boundary::periodic;
    for (int axis = 0; axis < d.dim; ++axis) {
        const int n = axis == 0 ? d.nx() : d.ny();
        const double h = d.dx(axis);
        auto& out = axis == 0 ? g.x : g.y;
        for (int iy = 0; iy < d.ny(); ++iy)
            for (int ix = 0; ix < d.nx(); ++ix) {
                const int i = axis == 0 ? ix : iy;
                auto at = [&](int k) { return axis == 0 ? f.values[d.index(k, iy)] : f.values[d.index(ix, k)]; };
                double v;
                if (n == 1) v = 0.0;
                else if (per) v = (at(detail::wrap_index(i + 1, n)) - at(detail::wrap_index(i - 1, n))) / (2 * h);
                else if (i == 0) v = (at(1) - at(0)) / h;
                else if (i == n - 1) v = (at(n - 1) - at(n - 2)) / h;
                else v = (at(i + 1) - at(i - 1)) / (2 * h);
                out[d.index(ix, iy)] = v;
            }
    }
    return g;
}

double inner_product(const VectorField& F, const VectorField& G) {
    require(F.domain == G.domain, "inner_product: domain mismatch");
    std::vector<double> t(F.x.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = F.x[i] * G.x[i] + F.y[i] * G.y[i];
    return detail::pairwise_sum(t) * F.domain.cell_volume();
}

std::string DriftAssumptionReport::to_json() const {
    nlohmann::json j{{"probes", probes},
                     {"grad_v_sup", grad_v_sup},
                     {"semiconvexity", semiconvexity},
                     {"v_lower_linear", v_lower_linear},
                     {"grad_v_l2", grad_v_l2},
                     {"lipschitz_v", lipschitz_v},
                     {"lipschitz_w", lipschitz_w},
                     {"w_growth", w_growth}};
    return j.dump(2);
}

namespace {

double semiconvexity_estimate(const ScalarField& V) {
    const Domain& d = V.domain;
    const bool per = d.boundary == Boundary::periodic;
    const int nx = d.nx(), ny = d.ny();
    double worst = 0.0;
    auto val = [&](int ix, int iy, bool& ok) {
        if (per) return V.values[d.index(detail::wrap_index(ix, nx), detail::wrap_index(iy, ny))];
        ok = ok && ix >= 0 && ix < nx && iy >= 0 && iy < ny;
        return ok ? V.values[d.index(ix, iy)] : 0.0;
    };
    const double hx = d.dx(0), hy = d.dim == 2 ? d.dx(1) : 0.0;
    const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    const int ndir = d.dim == 2 ? 4 : 1;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            for (int k = 0; k < ndir; ++k) {
                bool ok = true;
                const int ax = dirs[k][0], ay = dirs[k][1];
                const double a = val(ix + ax, iy + ay, ok), b = val(ix - ax, iy - ay, ok);
                if (!ok) continue;
                const double len2 = ax * ax * hx * hx + ay * ay * hy * hy;
                const double sd = (a - 2.0 * V.values[d.index(ix, iy)] + b) / len2;
                worst = std::max(worst, -sd);
            }
    return worst;
}

}  // namespace

DriftAssumptionReport check_drift_assumptions(const DriftModel& model, std::span<const GridMeasure> probes,
                                              const OTOptions& ot) {
    DriftAssumptionReport r;
    r.probes = static_cast<int>(probes.size());
    if (probes.empty()) return r;
    std::vector<HelmholtzSplit> splits;
    for (const auto& p : probes) splits.push_back(decompose(evaluate_drift(model, p)));
    const Domain& d = probes[0].domain();
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const auto& s = splits[k];
        std::vector<double> l2(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto p = d.point(i);
            bool inner = true;
            for (int a = 0; a < d.dim; ++a) {
                const double mid = 0.5 * (d.lo[a] + d.hi[a]);
                inner = inner && std::abs(p[a] - mid) <= 0.25 * d.length(a);
            }
            const double g = std::hypot(s.gradV.x[i], s.gradV.y[i]);
            if (inner) r.grad_v_sup = std::max(r.grad_v_sup, g);
            const double rad = std::hypot(p[0], p[1]);
            r.v_lower_linear = std::max(r.v_lower_linear, -s.V.values[i] / (1.0 + rad));
            r.w_growth = std::max(r.w_growth, std::hypot(s.W.x[i], s.W.y[i]) / (1.0 + rad));
            l2[i] = g * g * probes[k][i];
        }
        r.grad_v_l2 = std::max(r.grad_v_l2, detail::pairwise_sum(l2) * d.cell_volume());
        r.semiconvexity = std::max(r.semiconvexity, semiconvexity_estimate(s.V));
    }
    for (std::size_t p = 0; p < probes.size(); ++p)
        for (std::size_t q = 0; q < probes.size(); ++q) {
            if (p == q) continue;
            const double w = w2_squared(probes[p], probes[q], ot);
            if (w < 1e-14) continue;
            std::vector<double> dv(d.size()), dw(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) {
                const double ax = splits[p].gradV.x[i] - splits[q].gradV.x[i];
                const double ay = splits[p].gradV.y[i] - splits[q].gradV.y[i];
                const double bx = splits[p].W.x[i] - splits[q].W.x[i];
                const double by = splits[p].W.y[i] - splits[q].W.y[i];
                dv[i] = (ax * ax + ay * ay) * probes[p][i];
                dw[i] = (bx * bx + by * by) * probes[p][i];
            }
            const double v = d.cell_volume();
            r.lipschitz_v = std::max(r.lipschitz_v, detail::pairwise_sum(dv) * v / w);
            r.lipschitz_w = std::max(r.lipschitz_w, detail::pairwise_sum(dw) * v / w);
        }
    return r;
}

}  // namespace sjko
