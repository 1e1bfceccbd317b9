#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "sjko/scenarios.hpp"

namespace sjko {

enum class StudyMode { single, sweep, assumptions };

std::string to_string(StudyMode m);

/// Pass/fail thresholds. A threshold <= 0 disables its check.
struct CheckThresholds {
    double energy_step = 1e-6;     // transport-only: per-step |F(rho_tilde) - F(rho)|
    double energy_total = 1e-4;    // transport-only: sum of the per-step drifts
    double el_residual = 0.0;      // max Euler-Lagrange residual per step
    double imbalance = 1e-8;       // weak identity, 1D runs
    double order_min = 0.5;        // convergence order against the reference
    double telescoping_min = 0.8;  // slope of sum W2^2(rho_tilde, rho) against h
    double transport_slope_tol = 0.2;  // |slope - 2|
    double r2_min = 0.95;
    double order_r2_min = 0.95;
    double transport_r2_min = 0.99;
    double stability_slack = 1.1;  // C_{h/2} <= slack C_h
};

struct RunConfig {
    ScenarioParams scenario;
    StudyMode mode = StudyMode::single;
    std::string output_dir = "out";
    int snapshot_stride = 0;  // 0: first and last only
    int workers = 1;
    int probes = 8;           // tilde2 / Holder probe count
    int max_times = 0;        // thin the convergence times (0 keeps all)
    int test_functions = 4;   // bumps per axis for the weak form
    CheckThresholds checks;
    /// every key as resolved, for the manifest
    std::map<std::string, std::string> resolved;
};

/// `key = value` lines under `[section]` headers; `#` and `;` start comments.
/// Preset first (scenario.name), then every other key overrides it.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig parse_config_file(const std::string& path);

/// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace sjko
