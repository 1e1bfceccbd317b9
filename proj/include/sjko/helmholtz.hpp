#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sjko/measures.hpp"
#include "sjko/ot.hpp"

namespace sjko {

/// Cell-centered vector field. On noflux boxes the normal components at the
/// faces are carried as well (MAC layout): fx has (nx+1)*ny entries indexed
/// iy*(nx+1)+i, fy has nx*(ny+1) entries indexed j*nx+ix.
struct VectorField {
    Domain domain;
    std::vector<double> x, y;
    std::vector<double> fx, fy;

    static VectorField zeros(const Domain& d);
    bool has_faces() const { return !fx.empty(); }
    double max_norm() const;
    bool is_zero() const;
    void validate() const;
};

/// U = -W + grad V.
struct HelmholtzSplit {
    ScalarField V;
    VectorField W;
    VectorField gradV;
};

HelmholtzSplit decompose(const VectorField& U);

/// Spectral divergence on periodic grids, face divergence on noflux boxes.
ScalarField divergence(const VectorField& F);
/// Centered differences; one-sided rows at noflux walls.
VectorField centered_gradient(const ScalarField& f);
/// Integral of F.G over the domain (cell centers).
double inner_product(const VectorField& F, const VectorField& G);

enum class KernelShape { quadratic, gaussian };

struct DriftTerm {
    enum class Kind { zero, interaction, hamiltonian, rotation, external, sampled };
    Kind kind = Kind::zero;
    int source = 0;  // species whose density enters the term
    KernelShape shape = KernelShape::quadratic;
    double strength = 1.0;  // kernel prefactor or angular speed
    double width = 1.0;     // gaussian length scale
    std::array<double, 2> center{0.0, 0.0};
    std::function<double(double, double)> potential;
    std::function<std::array<double, 2>(double, double)> potential_gradient;
    double semiconvexity = -1.0;  // external terms: D^2 V0 >= -value, < 0 if unknown
    VectorField field;
};

/// Sum of drift terms; U[rho] is their sum.
///   interaction: grad(K * rho)          with K = strength * k(x)
///   hamiltonian: J grad(K * rho)        J(a, b) = (-b, a)
///   rotation:    strength * (-(y-cy), x-cx)
///   external:    grad V0
/// k(x) = |x|^2/2 (quadratic) or -exp(-|x|^2/(2 width^2)) (gaussian).
struct DriftModel {
    std::vector<DriftTerm> terms;

    static DriftModel zero();
    static DriftModel interaction(KernelShape s, double strength, double width = 1.0, int source = 0);
    static DriftModel hamiltonian(KernelShape s, double strength, double width = 1.0, int source = 0);
    static DriftModel rotation(double omega, std::array<double, 2> center = {0.0, 0.0});
    static DriftModel external(std::function<double(double, double)> V0,
                               std::function<std::array<double, 2>(double, double)> gradV0,
                               double semiconvexity = -1.0);
    static DriftModel sampled(VectorField U);

    DriftModel& add(const DriftModel& other);
    bool is_zero() const;
    /// Upper bound on the semiconvexity constant of V when it is known in closed form.
    std::optional<double> known_semiconvexity() const;
};

VectorField evaluate_drift(const DriftModel& model, const GridMeasure& rho);
/// Multi-species evaluation: each term reads species[term.source].
VectorField evaluate_drift(const DriftModel& model, std::span<const GridMeasure> species);

struct DriftAssumptionReport {
    int probes = 0;
    double grad_v_sup = 0.0;          // sup |grad V| over the inner half of the box
    double semiconvexity = 0.0;       // C with D^2 V >= -C
    double v_lower_linear = 0.0;      // C with V >= -C(1 + |x|)
    double grad_v_l2 = 0.0;           // max int |grad V|^2 drho
    double lipschitz_v = 0.0;         // max int |gradV[r]-gradV[m]|^2 dr / W2^2(r, m)
    double lipschitz_w = 0.0;
    double w_growth = 0.0;            // max |W| / (1 + |x|)
    std::string to_json() const;
};

DriftAssumptionReport check_drift_assumptions(const DriftModel& model,
                                              std::span<const GridMeasure> probes,
                                              const OTOptions& ot = {});

}  // namespace sjko
