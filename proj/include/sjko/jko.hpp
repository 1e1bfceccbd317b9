#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "sjko/measures.hpp"
#include "sjko/ot.hpp"

namespace sjko {

enum class JKOBackend { automatic, quantile_1d, entropic_prox };

std::string to_string(JKOBackend b);

struct JKOOptions {
    JKOBackend backend = JKOBackend::automatic;
    double tol = 1e-7;
    int max_iters = 5000;
    // entropic prox: epsilon (<= 0 picks dx^2), scaling schedule and so on
    EntropicOptions entropic{};
    // subtract (eps/2) * Ent(rho) so the entropic blur does not act as extra diffusion
    bool bias_correction = true;
    // fall back to rho_tilde only if the objective exceeds the competitor's by more than 2h * slack;
    // the remap to the grid alone costs about dx^4
    double fallback_slack = 1e-6;
    // refuse h >= h0
    double h0 = std::numeric_limits<double>::infinity();
};

/// Optional solver state carried from one step to the next, or used to
/// start from a chosen point (node positions for the quantile backend, dual
/// potentials for the entropic one).
struct JKOWarmStart {
    std::vector<double> nodes;
    std::vector<double> f, g;
};

/// Solution of the 1D quantile backend before it is remapped to the grid.
/// Node i sits at face i of rho_tilde; interval c spans nodes c and c+1.
struct LagrangianNodes {
    std::vector<double> x;         // new node positions
    std::vector<double> y;         // old node positions (faces of rho_tilde)
    std::vector<double> mass;      // per interval
    std::vector<double> pressure;  // per interval, P(mass / length), 0 in vacuum
    std::vector<double> weight;    // per node, half the adjacent masses
    std::vector<double> dV;        // V'(x) per node as seen by the solver
    std::vector<char> free;        // node moved by the solver (not pinned at a wall or in vacuum)

    bool empty() const { return x.empty(); }
};

struct JKOStepResult {
    explicit JKOStepResult(GridMeasure r) : rho(std::move(r)) {}

    GridMeasure rho;
    double objective = 0.0;       // W2^2 + 2h (F + potential)
    double w2_term = 0.0;         // W2^2(rho, rho_tilde)
    double energy_term = 0.0;     // F(rho)
    double potential_term = 0.0;  // int V drho
    std::vector<double> phi;      // Kantorovich potential from rho to rho_tilde, zero mean
    std::vector<std::array<double, 2>> map;  // T(x) with grad phi = x - T(x)
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    bool fell_back = false;
    JKOBackend backend = JKOBackend::automatic;
    LagrangianNodes nodes;  // quantile backend only

    std::string to_json(int step) const;
};

/// argmin W2^2(rho, rho_tilde) + 2h (F(rho) + int V drho).
JKOStepResult jko_step(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                       const JKOOptions& opt = {}, JKOWarmStart* warm = nullptr);

/// Grid-model objective of a candidate.
double jko_objective(const GridMeasure& rho, const GridMeasure& rho_tilde, const ScalarField& V,
                     const EnergySpec& E, double h, const OTOptions& ot = {});

/// W2^2(rho, rho_tilde)/(2h) - [F(rho_tilde) - F(rho) + int V (rho_tilde - rho)],
/// recomputed from result.rho. Nonpositive for a genuine minimizer.
double competitor_gap(const JKOStepResult& result, const GridMeasure& rho_tilde, const ScalarField& V,
                      const EnergySpec& E, double h, const OTOptions& ot = {});

/// L1 norm over non-vacuum cells of h(grad V rho + grad P(rho)) + grad phi rho, divided by h.
double euler_lagrange_residual(const JKOStepResult& result, const GridMeasure& rho_tilde, const ScalarField& V,
                               const EnergySpec& E, double h);

/// OT options matching the backend a JKO configuration uses on this domain.
OTOptions ot_options_for(const Domain& d, const JKOOptions& opt);

namespace detail {
JKOStepResult jko_quantile(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                           const JKOOptions& opt, JKOWarmStart* warm);
JKOStepResult jko_entropic(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                           const JKOOptions& opt, JKOWarmStart* warm);
}  // namespace detail

}  // namespace sjko
