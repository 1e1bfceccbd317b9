#include <cmath>
#include <complex>

#include "sjko/detail/fft.hpp"
#include "sjko/error.hpp"
#include "sjko/helmholtz.hpp"

namespace sjko {

DriftModel DriftModel::zero() { return {}; }

DriftModel DriftModel::interaction(KernelShape s, double strength, double width, int source) {
    require(width > 0.0, "kernel width must be positive");
    DriftTerm t;
    t.kind = DriftTerm::Kind::interaction;
    t.shape = s;
    t.strength = strength;
    t.width = width;
    t.source = source;
    return {{t}};
}

DriftModel DriftModel::hamiltonian(KernelShape s, double strength, double width, int source) {
    DriftModel m = interaction(s, strength, width, source);
    m.terms[0].kind = DriftTerm::Kind::hamiltonian;
    return m;
}

DriftModel DriftModel::rotation(double omega, std::array<double, 2> center) {
    DriftTerm t;
    t.kind = DriftTerm::Kind::rotation;
    t.strength = omega;
    t.center = center;
    return {{t}};
}

DriftModel DriftModel::external(std::function<double(double, double)> V0,
                                std::function<std::array<double, 2>(double, double)> gradV0,
                                double semiconvexity) {
    require(static_cast<bool>(gradV0), "external drift needs the gradient of its potential");
    DriftTerm t;
    t.kind = DriftTerm::Kind::external;
    t.potential = std::move(V0);
    t.potential_gradient = std::move(gradV0);
    t.semiconvexity = semiconvexity;
    return {{t}};
}

DriftModel DriftModel::sampled(VectorField U) {
    U.validate();
    DriftTerm t;
    t.kind = DriftTerm::Kind::sampled;
    t.field = std::move(U);
    return {{t}};
}

DriftModel& DriftModel::add(const DriftModel& other) {
    terms.insert(terms.end(), other.terms.begin(), other.terms.end());
    return *this;
}

bool DriftModel::is_zero() const {
    for (const auto& t : terms) {
        if (t.kind == DriftTerm::Kind::zero) continue;
        if (t.kind == DriftTerm::Kind::sampled && t.field.is_zero()) continue;
        if (t.strength == 0.0 && t.kind != DriftTerm::Kind::external && t.kind != DriftTerm::Kind::sampled)
            continue;
        return false;
    }
    return true;
}

std::optional<double> DriftModel::known_semiconvexity() const {
    double c = 0.0;
    for (const auto& t : terms) {
        switch (t.kind) {
            case DriftTerm::Kind::zero:
            case DriftTerm::Kind::hamiltonian:
            case DriftTerm::Kind::rotation:
                break;
            case DriftTerm::Kind::interaction:
                if (t.shape == KernelShape::quadratic) {
                    c += std::max(0.0, -t.strength);
                } else {
                    // min eigenvalue of D^2(-e^{-r^2/2w^2}) is -2e^{-3/2}/w^2, of D^2 e^{..} is -1/w^2
                    const double w2 = t.width * t.width;
                    c += t.strength >= 0.0 ? t.strength * 2.0 * std::exp(-1.5) / w2 : -t.strength / w2;
                }
                break;
            case DriftTerm::Kind::external:
                if (t.semiconvexity < 0.0) return std::nullopt;
                c += t.semiconvexity;
                break;
            case DriftTerm::Kind::sampled:
                return std::nullopt;
        }
    }
    return c;
}

namespace {

// grad(K) * rho at cell centers, by FFT. Noflux axes are zero padded to a
// linear convolution; periodic axes use the nearest-image offset.
void kernel_gradient_convolution(const DriftTerm& t, const GridMeasure& rho,
                                 std::vector<double>& gx, std::vector<double>& gy) {
    const Domain& d = rho.domain();
    const bool per = d.boundary == Boundary::periodic;
    const int nx = d.nx(), ny = d.ny();
    const int px = per ? nx : 2 * nx;
    const int py = d.dim == 2 ? (per ? ny : 2 * ny) : 1;
    const double hx = d.dx(0), hy = d.dim == 2 ? d.dx(1) : 0.0;

    auto offset = [&](int o, int P, double h, bool& half) {
        half = per && P % 2 == 0 && o == P / 2;
        return (o < (P + 1) / 2 ? o : o - P) * h;
    };

    const std::size_t np = static_cast<std::size_t>(px) * py;
    std::vector<double> rpad(np, 0.0), kx(np, 0.0), ky(np, 0.0);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) rpad[static_cast<std::size_t>(iy) * px + ix] = rho[d.index(ix, iy)];
    const double w2 = t.width * t.width;
    for (int oy = 0; oy < py; ++oy)
        for (int ox = 0; ox < px; ++ox) {
            bool hxh = false, hyh = false;
            const double dxo = offset(ox, px, hx, hxh);
            const double dyo = d.dim == 2 ? offset(oy, py, hy, hyh) : 0.0;
            double s = t.strength;
            if (t.shape == KernelShape::gaussian) s *= std::exp(-(dxo * dxo + dyo * dyo) / (2.0 * w2)) / w2;
            const std::size_t k = static_cast<std::size_t>(oy) * px + ox;
            kx[k] = hxh ? 0.0 : s * dxo;
            ky[k] = hyh ? 0.0 : s * dyo;
        }

    detail::RealFFT fft(py, px);
    std::vector<std::complex<double>> R, K;
    std::vector<double> out;
    fft.forward(rpad, R);
    const double scale = d.cell_volume() / static_cast<double>(np);
    auto apply = [&](const std::vector<double>& kern, std::vector<double>& dst) {
        fft.forward(kern, K);
        for (std::size_t k = 0; k < K.size(); ++k) K[k] *= R[k];
        fft.inverse(K, out);
        dst.assign(d.size(), 0.0);
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
                dst[d.index(ix, iy)] = out[static_cast<std::size_t>(iy) * px + ix] * scale;
    };
    apply(kx, gx);
    if (d.dim == 2) apply(ky, gy);
    else gy.assign(d.size(), 0.0);
}

}  // namespace

VectorField evaluate_drift(const DriftModel& model, std::span<const GridMeasure> species) {
    require(!species.empty(), "evaluate_drift: no density given");
    const Domain& d = species[0].domain();
    for (const auto& s : species)
        if (!(s.domain() == d)) fail(ErrorKind::domain_mismatch, "evaluate_drift: species on different domains");
    VectorField U = VectorField::zeros(d);
    U.fx.clear();
    U.fy.clear();
    std::vector<double> gx, gy;
    for (const auto& t : model.terms) {
        switch (t.kind) {
            case DriftTerm::Kind::zero:
                break;
            case DriftTerm::Kind::rotation:
                require(d.dim == 2, "rotation drift needs a 2D domain");
                for (std::size_t i = 0; i < d.size(); ++i) {
                    const auto p = d.point(i);
                    U.x[i] += -t.strength * (p[1] - t.center[1]);
                    U.y[i] += t.strength * (p[0] - t.center[0]);
                }
                break;
            case DriftTerm::Kind::external:
                for (std::size_t i = 0; i < d.size(); ++i) {
                    const auto p = d.point(i);
                    const auto g = t.potential_gradient(p[0], p[1]);
                    U.x[i] += g[0];
                    if (d.dim == 2) U.y[i] += g[1];
                }
                break;
            case DriftTerm::Kind::sampled:
                if (!(t.field.domain == d)) fail(ErrorKind::domain_mismatch, "sampled drift lives on another domain");
                for (std::size_t i = 0; i < d.size(); ++i) {
                    U.x[i] += t.field.x[i];
                    U.y[i] += t.field.y[i];
                }
                break;
            case DriftTerm::Kind::interaction:
            case DriftTerm::Kind::hamiltonian: {
                require(t.source >= 0 && static_cast<std::size_t>(t.source) < species.size(),
                        "drift term reads a species that does not exist");
                if (t.strength == 0.0) break;
                kernel_gradient_convolution(t, species[t.source], gx, gy);
                if (t.kind == DriftTerm::Kind::interaction) {
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        U.x[i] += gx[i];
                        U.y[i] += gy[i];
                    }
                } else {
                    require(d.dim == 2, "hamiltonian drift needs a 2D domain");
                    for (std::size_t i = 0; i < d.size(); ++i) {
                        U.x[i] += -gy[i];
                        U.y[i] += gx[i];
                    }
                }
                break;
            }
        }
    }
    U.validate();
    return U;
}

VectorField evaluate_drift(const DriftModel& model, const GridMeasure& rho) {
    return evaluate_drift(model, std::span<const GridMeasure>(&rho, 1));
}

}  // namespace sjko
