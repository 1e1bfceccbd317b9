#pragma once

#include <array>
#include <vector>

#include "sjko/fit.hpp"
#include "sjko/helmholtz.hpp"
#include "sjko/measures.hpp"
#include "sjko/ot.hpp"

namespace sjko {

enum class DensityInterpolation { cubic, quintic };
enum class VelocityInterpolation { bilinear, bicubic };

struct TransportOptions {
    DensityInterpolation density = DensityInterpolation::cubic;
    VelocityInterpolation velocity = VelocityInterpolation::bilinear;
    double cfl = 0.5;          // max|W| * h / substeps <= cfl * dx
    int min_substeps = 1;
    double safety_cells = 1.0;  // allowed overshoot past a noflux wall before failing
};

/// Characteristics of a frozen field started at the cell centers.
struct FlowMap {
    Domain domain;
    double t = 0.0;
    int substeps = 0;
    std::vector<std::array<double, 2>> forward;   // X(t, x)
    std::vector<std::array<double, 2>> backward;  // X(-t, x)
    double jacobian_defect = 0.0;                 // max |det DX(t) - 1| over interior cells
};

/// W sampled at an arbitrary point (wrapping on periodic axes).
std::array<double, 2> sample_velocity(const VectorField& W, double x, double y,
                                      VelocityInterpolation mode = VelocityInterpolation::bilinear);

/// substeps <= 0 picks the CFL-limited count.
FlowMap integrate_flow(const VectorField& W, double h, int substeps = 0, const TransportOptions& opt = {});

struct TransportResult {
    GridMeasure rho;
    int substeps = 0;
    double mass_drift = 0.0;     // |mass before renormalization - 1|
    double clamped_mass = 0.0;   // mass removed by clamping negative values
};

TransportResult transport_step_detailed(const GridMeasure& rho, const VectorField& W, double h,
                                        const TransportOptions& opt = {});
GridMeasure transport_step(const GridMeasure& rho, const VectorField& W, double h,
                           const TransportOptions& opt = {});

/// Density at an arbitrary point (the semi-Lagrangian reconstruction).
double sample_density(const GridMeasure& rho, double x, double y,
                      DensityInterpolation mode = DensityInterpolation::cubic);

struct TransportBoundRecord {
    double h = 0.0;
    double w2sq = 0.0;
    double bound = 0.0;  // 2 C_W^2 h^2 (1 + M(h))
    double ratio = 0.0;  // w2sq / h^2
    bool within = true;
};

/// W2^2(rho_t, rho) against the computable kinetic-energy bound.
TransportBoundRecord transport_distance_bound(const GridMeasure& rho, const GridMeasure& rho_t, double h,
                                              double growth_constant, const OTOptions& ot = {});

struct TransportExponentCheck {
    PowerFit fit;
    double fitted_constant = 0.0;  // max w2sq / h^2
    bool exponent_ok = false;      // |slope - 2| <= 0.2
    bool decade_covered = false;
};

TransportExponentCheck transport_exponent(const std::vector<TransportBoundRecord>& records);

}  // namespace sjko
