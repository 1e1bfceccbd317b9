#include "sjko/transport.hpp"

#include <algorithm>
#include <cmath>

#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"

namespace sjko {

namespace {

using Point = std::array<double, 2>;

double lerp(double a, double b, double t) { return a + t * (b - a); }

// Fractional index along an axis of cell-centered data.
void locate_center(const Domain& d, int axis, double x, int& i0, double& t) {
    const double s = (x - d.lo[axis]) / d.dx(axis) - 0.5;
    i0 = static_cast<int>(std::floor(s));
    t = s - i0;
}

// Clamped bilinear lookup on a node lattice of size n0 x n1 (x fastest).
double lattice_bilinear(const std::vector<double>& v, int n0, int n1, double s0, double s1) {
    s0 = std::clamp(s0, 0.0, static_cast<double>(n0 - 1));
    s1 = std::clamp(s1, 0.0, static_cast<double>(n1 - 1));
    const int i = std::min(static_cast<int>(s0), std::max(n0 - 2, 0));
    const int j = std::min(static_cast<int>(s1), std::max(n1 - 2, 0));
    const double tx = n0 > 1 ? s0 - i : 0.0, ty = n1 > 1 ? s1 - j : 0.0;
    auto at = [&](int a, int b) {
        return v[static_cast<std::size_t>(std::min(b, n1 - 1)) * n0 + std::min(a, n0 - 1)];
    };
    return lerp(lerp(at(i, j), at(i + 1, j), tx), lerp(at(i, j + 1), at(i + 1, j + 1), tx), ty);
}

double centered_sample(const Domain& d, const std::vector<double>& v, double x, double y,
                       VelocityInterpolation mode) {
    const bool per = d.boundary == Boundary::periodic;
    int ix, iy = 0;
    double tx, ty = 0.0;
    locate_center(d, 0, x, ix, tx);
    if (d.dim == 2) locate_center(d, 1, y, iy, ty);
    const int nx = d.nx(), ny = d.ny();
    auto idx = [&](int i, int n) { return per ? detail::wrap_index(i, n) : std::clamp(i, 0, n - 1); };
    if (mode == VelocityInterpolation::bicubic) {
        const auto wx = detail::cubic_weights(tx);
        const auto wy = d.dim == 2 ? detail::cubic_weights(ty) : std::array<double, 4>{0.0, 1.0, 0.0, 0.0};
        double acc = 0.0;
        for (int b = 0; b < 4; ++b) {
            if (wy[b] == 0.0) continue;
            const int jj = d.dim == 2 ? idx(iy - 1 + b, ny) : 0;
            for (int a = 0; a < 4; ++a) acc += wx[a] * wy[b] * v[d.index(idx(ix - 1 + a, nx), jj)];
        }
        return acc;
    }
    if (!per) {
        // clamp onto the center lattice
        const double s0 = ix + tx, s1 = iy + ty;
        return lattice_bilinear(v, nx, ny, s0, s1);
    }
    const int i1 = idx(ix + 1, nx), i0 = idx(ix, nx);
    if (d.dim == 1) return lerp(v[i0], v[i1], tx);
    const int j0 = idx(iy, ny), j1 = idx(iy + 1, ny);
    return lerp(lerp(v[d.index(i0, j0)], v[d.index(i1, j0)], tx), lerp(v[d.index(i0, j1)], v[d.index(i1, j1)], tx), ty);
}

}  // namespace

std::array<double, 2> sample_velocity(const VectorField& W, double x, double y, VelocityInterpolation mode) {
    const Domain& d = W.domain;
    if (d.boundary == Boundary::periodic || !W.has_faces())
        return {centered_sample(d, W.x, x, y, mode), d.dim == 2 ? centered_sample(d, W.y, x, y, mode) : 0.0};
    // staggered lookup: x-velocity on x-faces, y-velocity on y-faces
    const int nx = d.nx(), ny = d.ny();
    const double sxf = (x - d.lo[0]) / d.dx(0), sxc = sxf - 0.5;
    if (d.dim == 1) return {lattice_bilinear(W.fx, nx + 1, 1, sxf, 0.0), 0.0};
    const double syf = (y - d.lo[1]) / d.dx(1), syc = syf - 0.5;
    return {lattice_bilinear(W.fx, nx + 1, ny, sxf, syc), lattice_bilinear(W.fy, nx, ny + 1, sxc, syf)};
}

namespace {

int auto_substeps(const VectorField& W, double h, int requested, const TransportOptions& opt) {
    if (requested > 0) return requested;
    const Domain& d = W.domain;
    double vmax = W.max_norm();
    for (double v : W.fx) vmax = std::max(vmax, std::abs(v));
    for (double v : W.fy) vmax = std::max(vmax, std::abs(v));
    const double dxmin = d.dim == 2 ? std::min(d.dx(0), d.dx(1)) : d.dx(0);
    const int s = static_cast<int>(std::ceil(vmax * std::abs(h) / (opt.cfl * dxmin)));
    return std::max({s, opt.min_substeps, 1});
}

// RK4 from the cell centers over signed time t; positions stay unwrapped.
std::vector<Point> characteristics(const VectorField& W, double t, int substeps, const TransportOptions& opt) {
    const Domain& d = W.domain;
    const double dt = t / substeps;
    std::vector<Point> out(d.size());
    auto vel = [&](const Point& p) { return sample_velocity(W, p[0], p[1], opt.velocity); };
    for (std::size_t c = 0; c < d.size(); ++c) {
        Point p = d.point(c);
        for (int s = 0; s < substeps; ++s) {
            const Point k1 = vel(p);
            const Point k2 = vel({p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1]});
            const Point k3 = vel({p[0] + 0.5 * dt * k2[0], p[1] + 0.5 * dt * k2[1]});
            const Point k4 = vel({p[0] + dt * k3[0], p[1] + dt * k3[1]});
            p[0] += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
            p[1] += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        }
        out[c] = p;
    }
    return out;
}

void settle(const Domain& d, std::vector<Point>& pts, const TransportOptions& opt) {
    for (auto& p : pts)
        for (int a = 0; a < d.dim; ++a) {
            if (d.boundary == Boundary::periodic) {
                const double L = d.length(a);
                p[a] -= L * std::floor((p[a] - d.lo[a]) / L);
                continue;
            }
            const double margin = opt.safety_cells * d.dx(a);
            if (p[a] < d.lo[a] - margin || p[a] > d.hi[a] + margin)
                fail(ErrorKind::cfl_violation, "characteristic left the box; reduce h or raise substeps");
            p[a] = std::clamp(p[a], d.lo[a], d.hi[a]);
        }
}

double jacobian_defect(const Domain& d, const std::vector<Point>& X) {
    const int nx = d.nx(), ny = d.ny();
    auto disp = [&](int ix, int iy, int a) {
        const std::size_t c = d.index(ix, iy);
        return X[c][a] - d.point(c)[a];
    };
    double worst = 0.0;
    const double hx = d.dx(0), hy = d.dim == 2 ? d.dx(1) : 1.0;
    for (int iy = d.dim == 2 ? 1 : 0; iy < (d.dim == 2 ? ny - 1 : 1); ++iy)
        for (int ix = 1; ix < nx - 1; ++ix) {
            const double a11 = 1.0 + (disp(ix + 1, iy, 0) - disp(ix - 1, iy, 0)) / (2 * hx);
            double det = a11;
            if (d.dim == 2) {
                const double a12 = (disp(ix, iy + 1, 0) - disp(ix, iy - 1, 0)) / (2 * hy);
                const double a21 = (disp(ix + 1, iy, 1) - disp(ix - 1, iy, 1)) / (2 * hx);
                const double a22 = 1.0 + (disp(ix, iy + 1, 1) - disp(ix, iy - 1, 1)) / (2 * hy);
                det = a11 * a22 - a12 * a21;
            }
            worst = std::max(worst, std::abs(det - 1.0));
        }
    return worst;
}

}  // namespace

FlowMap integrate_flow(const VectorField& W, double h, int substeps, const TransportOptions& opt) {
    require(h > 0.0 && std::isfinite(h), "integrate_flow: h must be positive");
    W.validate();
    FlowMap f;
    f.domain = W.domain;
    f.t = h;
    f.substeps = auto_substeps(W, h, substeps, opt);
    f.forward = characteristics(W, h, f.substeps, opt);
    f.backward = characteristics(W, -h, f.substeps, opt);
    f.jacobian_defect = jacobian_defect(W.domain, f.forward);
    settle(W.domain, f.forward, opt);
    settle(W.domain, f.backward, opt);
    return f;
}

double sample_density(const GridMeasure& rho, double x, double y, DensityInterpolation mode) {
    const Domain& d = rho.domain();
    const bool per = d.boundary == Boundary::periodic;
    auto idx = [&](int i, int n) { return per ? detail::wrap_index(i, n) : detail::reflect_index(i, n); };
    int ix, iy = 0;
    double tx, ty = 0.0;
    locate_center(d, 0, x, ix, tx);
    if (d.dim == 2) locate_center(d, 1, y, iy, ty);
    const auto& v = rho.values();
    if (mode == DensityInterpolation::quintic) {
        const auto wx = detail::quintic_weights(tx);
        if (d.dim == 1) {
            double acc = 0.0;
            for (int a = 0; a < 6; ++a) acc += wx[a] * v[idx(ix - 2 + a, d.nx())];
            return acc;
        }
        const auto wy = detail::quintic_weights(ty);
        double acc = 0.0;
        for (int b = 0; b < 6; ++b) {
            const int jj = idx(iy - 2 + b, d.ny());
            double row = 0.0;
            for (int a = 0; a < 6; ++a) row += wx[a] * v[d.index(idx(ix - 2 + a, d.nx()), jj)];
            acc += wy[b] * row;
        }
        return acc;
    }
    const auto wx = detail::cubic_weights(tx);
    if (d.dim == 1) {
        double acc = 0.0;
        for (int a = 0; a < 4; ++a) acc += wx[a] * v[idx(ix - 1 + a, d.nx())];
        return acc;
    }
    const auto wy = detail::cubic_weights(ty);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int jj = idx(iy - 1 + b, d.ny());
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * v[d.index(idx(ix - 1 + a, d.nx()), jj)];
        acc += wy[b] * row;
    }
    return acc;
}

TransportResult transport_step_detailed(const GridMeasure& rho, const VectorField& W, double h,
                                        const TransportOptions& opt) {
    require(h >= 0.0 && std::isfinite(h), "transport_step: h must be nonnegative");
    if (!(rho.domain() == W.domain)) fail(ErrorKind::domain_mismatch, "transport_step: field on another domain");
    if (h == 0.0 || W.is_zero()) return {rho, 0, 0.0, 0.0};
    const Domain& d = rho.domain();
    const int s = auto_substeps(W, h, 0, opt);
    std::vector<Point> feet = characteristics(W, -h, s, opt);
    settle(d, feet, opt);
    std::vector<double> out(d.size());
    double clamped = 0.0;
    for (std::size_t c = 0; c < d.size(); ++c) {
        double v = sample_density(rho, feet[c][0], feet[c][1], opt.density);
        if (v < 0.0) {
            clamped -= v;
            v = 0.0;
        }
        out[c] = v;
    }
    double mass = 0.0;
    TransportResult r{GridMeasure::from_density(d, std::move(out), &mass), s, 0.0, clamped * d.cell_volume()};
    r.mass_drift = std::abs(mass - 1.0);
    return r;
}

GridMeasure transport_step(const GridMeasure& rho, const VectorField& W, double h, const TransportOptions& opt) {
    return transport_step_detailed(rho, W, h, opt).rho;
}

TransportBoundRecord transport_distance_bound(const GridMeasure& rho, const GridMeasure& rho_t, double h,
                                              double growth_constant, const OTOptions& ot) {
    require(h > 0.0, "transport_distance_bound: h must be positive");
    TransportBoundRecord r;
    r.h = h;
    r.w2sq = w2_squared(rho_t, rho, ot);
    const double C = growth_constant;
    const double Mh = (second_moment(rho) + 1.0 / 3.0) * std::exp(3.0 * C * h) - 1.0 / 3.0;
    r.bound = 2.0 * C * C * h * h * (1.0 + Mh);
    r.ratio = r.w2sq / (h * h);
    r.within = r.w2sq <= r.bound * (1.0 + 1e-9) + 1e-12;
    return r;
}

TransportExponentCheck transport_exponent(const std::vector<TransportBoundRecord>& records) {
    TransportExponentCheck c;
    std::vector<double> hs, ws;
    double hmin = 0.0, hmax = 0.0;
    for (const auto& r : records) {
        if (r.w2sq <= 0.0) continue;
        hs.push_back(r.h);
        ws.push_back(r.w2sq);
        c.fitted_constant = std::max(c.fitted_constant, r.ratio);
        hmin = hmin == 0.0 ? r.h : std::min(hmin, r.h);
        hmax = std::max(hmax, r.h);
    }
    c.fit = fit_power_law(hs, ws);
    c.decade_covered = hmin > 0.0 && hmax / hmin >= 10.0 * (1.0 - 1e-9);
    c.exponent_ok = c.fit.samples >= 2 && std::abs(c.fit.slope - 2.0) <= 0.2;
    return c;
}

}  // namespace sjko
