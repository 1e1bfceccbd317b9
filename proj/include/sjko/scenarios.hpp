#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sjko/helmholtz.hpp"
#include "sjko/measures.hpp"
#include "sjko/scheme.hpp"

namespace sjko {

struct EnergyParams {
    std::string kind = "entropy";  // entropy | power
    double m = 2.0;
    double nu = 1.0;

    EnergySpec build() const;
};

struct DriftParams {
    std::string kind = "zero";  // zero | interaction | hamiltonian | rotation | confinement
    std::string shape = "quadratic";  // interaction kernels: quadratic | gaussian
    double strength = 1.0;  // kernel prefactor, angular speed or confinement stiffness
    double width = 1.0;
    std::array<double, 2> center{0.0, 0.0};
    int source = 0;

    DriftModel build() const;
};

struct InitialParams {
    std::string kind = "gaussian";  // gaussian | barenblatt | stationary | uniform
    std::array<double, 2> center{0.0, 0.0};
    double sigma = 0.5;
    double t0 = 0.1;  // barenblatt time shift
};

struct SpeciesParams {
    EnergyParams energy;
    std::vector<DriftParams> drift;
    InitialParams initial;
};

/// Everything a run needs, as plain values. Presets fill it; configs override it.
struct ScenarioParams {
    std::string name = "custom";
    int dim = 1;
    std::array<double, 2> lo{-4.0, -4.0}, hi{4.0, 4.0};
    std::array<int, 2> cells{256, 256};
    Boundary boundary = Boundary::noflux;
    double h = 1e-3;
    double T = 0.25;
    std::vector<double> h_list;  // sweep values
    std::vector<SpeciesParams> species{SpeciesParams{}};
    bool transport_only = false;
    JKOOptions jko{};
    TransportOptions transport{};
    double ot_epsilon = 0.0;  // entropic W2 records, <= 0 picks dx^2
    double growth_constant = 0.0;  // sup |W| / (1 + |x|) when known, for the transport bound
    bool record_w2 = true;  // per-step W2 records (one OT solve each)

    Domain domain() const;
};

struct Scenario {
    ScenarioParams params;
    Domain domain;
    SchemeConfig scheme;
    std::vector<SpeciesSpec> species;
    std::vector<GridMeasure> rho0;
    /// Closed-form solution for species 0, when there is one.
    std::function<GridMeasure(double)> reference;
    std::string reference_name;
};

std::vector<std::string> scenario_names();
/// Preset parameters; throws a config error naming the known presets.
ScenarioParams preset(const std::string& name);
Scenario build_scenario(const ScenarioParams& p);

}  // namespace sjko
