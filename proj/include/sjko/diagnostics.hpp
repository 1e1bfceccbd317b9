#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "sjko/fit.hpp"
#include "sjko/helmholtz.hpp"
#include "sjko/measures.hpp"
#include "sjko/ot.hpp"
#include "sjko/scheme.hpp"

namespace sjko {

/// phi(t, x) = eta(t) b(x) with b = (1 - |x-c|^2/r^2)^3 on the ball and
/// eta = (1 - (t/Tc)^2)^3 on [0, Tc], both zero outside.
struct TestFunction {
    std::array<double, 2> center{0.0, 0.0};
    double radius = 1.0;
    double t_cut = 1.0;
    int dim = 1;

    double eta(double t) const;
    double eta_dot(double t) const;
    double bump(double x, double y = 0.0) const;
    std::array<double, 2> bump_gradient(double x, double y = 0.0) const;
    double bump_laplacian(double x, double y = 0.0) const;
    /// sup over space-time of the spectral norm of D^2 phi
    double hessian_sup() const;
    double value(double t, double x, double y = 0.0) const { return eta(t) * bump(x, y); }
};

struct TestFunctionBasis {
    std::vector<TestFunction> functions;

    /// `per_axis` bumps per axis whose supports stay at least two cells away
    /// from the walls, all cut off at time T.
    static TestFunctionBasis standard(const Domain& d, double T, int per_axis = 4);
};

struct WeakResidual {
    int index = 0;
    bool identity_available = false;  // needs the Lagrangian nodes of the 1D backend
    double initial = 0.0;        // int phi(0) rho0
    double transport = 0.0;      // int int rho_tilde^2 (phi_t + W . grad phi)
    double pressure = 0.0;       // h sum int grad P . grad phi
    double drift = 0.0;          // h sum int grad V . grad phi rho
    double remainder = 0.0;      // sum int R[phi] dgamma
    double remainder_bound = 0.0;  // 1/2 |D^2 phi| sum W2^2(rho^{k+1}, rho_tilde^{k+1})
    double projection = 0.0;     // grid vs Lagrangian quadrature of both measures
    double galerkin = 0.0;       // hat-function projection of grad phi in the Euler-Lagrange sum
    double imbalance = 0.0;      // zero up to rounding when the identity holds
    double continuum = 0.0;      // weak residual of the PDE on the piecewise-constant interpolation

    std::string to_json() const;
};

/// Discrete weak identity and continuum weak residual of a completed run.
std::vector<WeakResidual> weak_residual(const SchemeTrajectory& traj, const TestFunctionBasis& basis,
                                        const EnergySpec& E, const DriftModel& drift);

/// One run at one h.
struct EstimateRecord {
    double h = 0.0;
    double sup_energy = 0.0;      // sup_k |F(rho^k)|
    double sup_moment = 0.0;      // sup_k M(rho^k)
    double sum_w2_jko = 0.0;      // sum_k W2^2(rho_tilde^{k+1}, rho^{k+1})
    double sum_w2_step = 0.0;     // sum_k W2^2(rho^k, rho^{k+1})
    double holder_constant = 0.0; // max W2(rho_h(t), rho_h(s)) / sqrt(|t-s| + h)
    double bv_total = 0.0;        // int_0^T int |grad P(rho_h)|
};

struct EstimateReport {
    std::vector<EstimateRecord> runs;  // sorted by decreasing h
    PowerFit sum_w2_jko_fit, sum_w2_step_fit;
    bool energy_stable = false, moment_stable = false, holder_stable = false, bv_stable = false;
    bool telescoping_ok = false;  // slope >= 0.8 with R^2 >= 0.95 (needs >= 3 runs)

    std::string to_json() const;
};

/// Holder probes are the common multiples of the coarsest h, at most `probes` of them.
EstimateReport estimate_report(const std::vector<SchemeTrajectory>& runs, const std::vector<EnergySpec>& energies,
                               const OTOptions& ot = {}, int probes = 8);

/// C_{h/2} <= 1.1 C_h along a sequence ordered by decreasing h.
bool constants_stable(const std::vector<double>& c, double slack = 1.1);

struct TightnessRecord {
    double radius = 0.0;
    double lhs = 0.0;  // int int_A |grad P|
    double mass = 0.0; // int int_A rho
    double constant = 0.0;  // lhs / ((1 + sqrt h) sqrt(mass))
};

struct BVPressureReport {
    double total = 0.0;   // int_0^T int |grad P(rho_h)|
    double per_time = 0.0;  // total / T
    std::vector<TightnessRecord> tightness;  // space-time cylinders [0,T] x B(c, r)
    double tightness_constant = 0.0;

    std::string to_json() const;
};

BVPressureReport bv_pressure_report(const SchemeTrajectory& traj, const EnergySpec& E,
                                    std::vector<double> radii = {});

enum class Reference { analytic, finest };

struct ConvergenceRow {
    double h = 0.0;
    double sup_error = 0.0;       // sup_t W2(rho_h(t), reference(t))
    double rho_tilde1 = 0.0;      // sup_t W2(rho_h, rho_tilde_h^1)
    double rho_tilde2 = 0.0;      // sup over probes of W2(rho_h, rho_tilde_h^2)
    double tilde1_tilde2 = 0.0;
    double sum_w2_jko = 0.0;
};

struct ConvergenceStudy {
    Reference reference = Reference::analytic;
    std::vector<ConvergenceRow> rows;  // decreasing h
    PowerFit order;
    bool monotone = false;
    std::vector<std::string> warnings;

    std::string to_json() const;
    std::string to_csv() const;
    std::string to_dat() const;
};

/// reference(t) is used when given; otherwise the finest run is the reference
/// (and is excluded from the fit). Errors are taken at the multiples of the
/// coarsest h up to the shortest horizon; max_times > 0 thins them evenly.
ConvergenceStudy convergence_study(const std::vector<SchemeTrajectory>& runs,
                                   const std::function<GridMeasure(double)>& reference, const OTOptions& ot = {},
                                   int tilde2_probes = 8, int max_times = 0);

struct InterpolationAgreement {
    double h = 0.0;
    double rho_tilde1 = 0.0;
    double rho_tilde2 = 0.0;
    double tilde1_tilde2 = 0.0;
    double sup = 0.0;
    double constant = 0.0;  // sup / sqrt(h)
};

/// tilde2 is probed at t = t_k + h/2 and at t_k + h on up to `probes` evenly spread steps.
InterpolationAgreement interpolation_agreement(const SchemeTrajectory& traj, const OTOptions& ot = {},
                                               int probes = 8);

}  // namespace sjko
