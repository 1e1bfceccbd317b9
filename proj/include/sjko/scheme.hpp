#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sjko/helmholtz.hpp"
#include "sjko/jko.hpp"
#include "sjko/measures.hpp"
#include "sjko/ot.hpp"
#include "sjko/transport.hpp"

namespace sjko {

struct SchemeConfig {
    double h = 1e-2;
    double T = 1.0;
    EnergySpec energy = EnergySpec::entropy();
    DriftModel drift = DriftModel::zero();
    JKOOptions jko{};
    TransportOptions transport{};
    OTOptions ot{};               // used by the per-step W2 records
    bool transport_only = false;  // skip the JKO half-step
    bool record_transport_w2 = true;  // W2^2(rho_tilde^{k+1}, rho^k)
    bool record_step_w2 = true;       // W2^2(rho^k, rho^{k+1})
    std::function<void(int, int)> progress;  // (k, N) after each step

    int steps() const;              // ceil(T / h)
    double horizon() const { return steps() * h; }
};

struct SpeciesSpec {
    EnergySpec energy = EnergySpec::entropy();
    DriftModel drift = DriftModel::zero();  // terms read any species through DriftTerm::source
};

struct SystemConfig {
    SchemeConfig base;
    std::vector<SpeciesSpec> species;
};

struct StepRecord {
    int k = 0;          // step k -> k+1
    double t = 0.0;     // h (k+1)
    double w2_transport = 0.0;  // W2^2(rho_tilde^{k+1}, rho^k)
    double w2_jko = 0.0;        // W2^2(rho_tilde^{k+1}, rho^{k+1})
    double w2_step = 0.0;       // W2^2(rho^k, rho^{k+1})
    double energy_before = 0.0; // F(rho^k)
    double energy_tilde = 0.0;  // F(rho_tilde^{k+1})
    double energy_after = 0.0;  // F(rho^{k+1})
    double energy_drift = 0.0;  // |F(rho_tilde^{k+1}) - F(rho^k)|
    double second_moment = 0.0; // M(rho^{k+1})
    double grad_pressure_l1 = 0.0;  // int |grad P(rho^{k+1})|
    double mass_drift = 0.0;
    double clamped_mass = 0.0;
    int substeps = 0;
    double objective = 0.0;
    double potential_term = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double gap = 0.0;  // competitor gap, <= 0 for a genuine minimizer
    double el_residual = 0.0;  // Euler-Lagrange residual of the JKO step
    bool converged = true;
    bool fell_back = false;

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

/// rho[k] = rho_h^k and tilde[k] = rho_tilde_h^k for k = 0..N (tilde[0] = rho0).
/// W[k] and V[k] are the fields used in step k -> k+1.
struct SchemeTrajectory {
    double h = 0.0;
    double T = 0.0;  // N h
    int species = 0;
    bool transport_only = false;
    TransportOptions transport{};
    std::vector<GridMeasure> rho, tilde;
    std::vector<VectorField> W;
    std::vector<ScalarField> V;
    std::vector<LagrangianNodes> nodes;
    std::vector<StepRecord> records;

    int steps() const { return static_cast<int>(records.size()); }
};

SchemeTrajectory run_scheme(const GridMeasure& rho0, const SchemeConfig& cfg);

/// Species are transported by W_i[rho^k] and then minimized independently with
/// V_i[rho_tilde^{k+1}], both evaluated on the frozen joint state.
std::vector<SchemeTrajectory> run_scheme_system(std::span<const GridMeasure> rho0, const SystemConfig& cfg);

enum class Interpolation { rho, tilde1, tilde2 };

std::string to_string(Interpolation which);

/// Piecewise-constant interpolations return the step k+1 measure on
/// (hk, h(k+1)]; tilde2 transports rho^k by W[rho^k] for time t - hk.
GridMeasure evaluate_interpolation(const SchemeTrajectory& traj, double t, Interpolation which);

/// The h0 limit from the drift's semiconvexity (infinity when unknown or zero).
double h0_limit(const DriftModel& drift);

}  // namespace sjko
