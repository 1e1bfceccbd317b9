#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sjko/measures.hpp"

namespace sjko {

inline constexpr double kVacuum = 1e-14;

/// Finitely many weighted points. Used by the LP oracle and for the atom
/// model of the exact 1D solver.
struct DiscreteMeasure {
    int dim = 1;
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;

    static DiscreteMeasure on_line(const std::vector<double>& x, std::vector<double> w);
    static DiscreteMeasure in_plane(std::vector<std::array<double, 2>> p, std::vector<double> w);
    /// One atom per cell center carrying the cell mass.
    static DiscreteMeasure from_grid(const GridMeasure& rho);

    std::size_t size() const { return weights.size(); }
    double total() const;
    void validate() const;
};

struct PlanEntry {
    std::size_t i;
    std::size_t j;
    double mass;
};

struct OTResult {
    double cost = 0.0;  // squared W2
    std::vector<PlanEntry> plan;
    std::vector<std::array<double, 2>> map;      // per source point
    std::vector<double> potential;               // phi, raw gauge
    std::vector<double> source_weights;          // masses of the source points
    std::vector<double> dual_f, dual_g;          // for cost |x-y|^2
    int iterations = 0;
    double marginal_error = 0.0;
    bool converged = true;
    double epsilon = 0.0;  // 0 for exact solvers
};

/// Exact W2 between piecewise-constant densities on the same 1D noflux line.
OTResult w2_exact_1d(const GridMeasure& rho, const GridMeasure& mu);
/// Exact W2 between 1D atomic measures (monotone coupling).
OTResult w2_exact_1d(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct EntropicOptions {
    double epsilon = 0.0;  // <= 0 selects dx^2
    int max_iters = 20000;
    double tol = 1e-9;     // L1 marginal violation
    bool debias = true;
    bool eps_scaling = true;
    double scaling_factor = 0.5;
    double over_relaxation = 1.6;  // applied in the final eps stage only
    bool want_plan = false;
    bool want_map = true;
};

OTResult w2_entropic(const GridMeasure& rho, const GridMeasure& mu, const EntropicOptions& opt = {});
OTResult w2_entropic(const DiscreteMeasure& a, const DiscreteMeasure& b, const EntropicOptions& opt);

/// Exact transportation LP (successive shortest paths). At most 64 points each.
OTResult brute_force_lp(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// phi normalized to zero weighted mean over the source.
std::vector<double> kantorovich_potential(const OTResult& r);

enum class OTBackend { automatic, exact_1d, entropic };

struct OTOptions {
    OTBackend backend = OTBackend::automatic;
    EntropicOptions entropic;
};

/// Dispatch: exact on 1D noflux lines, entropic otherwise.
OTResult w2(const GridMeasure& rho, const GridMeasure& mu, const OTOptions& opt = {});

/// Cost-only convenience wrapper.
double w2_squared(const GridMeasure& rho, const GridMeasure& mu, const OTOptions& opt = {});

}  // namespace sjko
