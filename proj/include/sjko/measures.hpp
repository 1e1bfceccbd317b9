#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sjko {

enum class Boundary { periodic, noflux };

std::string to_string(Boundary b);

/// Uniform cell-centered grid on an interval (1D) or a rectangle (2D).
/// Cells are stored row-major: index = iy * nx + ix.
struct Domain {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> cells{1, 1};
    Boundary boundary = Boundary::noflux;

    static Domain line(double a, double b, int n, Boundary bc = Boundary::noflux);
    static Domain box(double x0, double x1, int nx, double y0, double y1, int ny,
                      Boundary bc = Boundary::noflux);

    void validate() const;

    int nx() const { return cells[0]; }
    int ny() const { return dim == 2 ? cells[1] : 1; }
    std::size_t size() const { return static_cast<std::size_t>(nx()) * ny(); }
    double length(int axis) const { return hi[axis] - lo[axis]; }
    double dx(int axis = 0) const { return length(axis) / cells[axis]; }
    double cell_volume() const { return dim == 2 ? dx(0) * dx(1) : dx(0); }
    double center(int axis, int i) const { return lo[axis] + (i + 0.5) * dx(axis); }
    double face(int axis, int i) const { return lo[axis] + i * dx(axis); }
    std::size_t index(int ix, int iy = 0) const {
        return static_cast<std::size_t>(iy) * nx() + ix;
    }
    std::array<double, 2> point(std::size_t cell) const {
        const int ix = static_cast<int>(cell % nx());
        const int iy = static_cast<int>(cell / nx());
        return {center(0, ix), dim == 2 ? center(1, iy) : 0.0};
    }
    double diameter() const;

    bool operator==(const Domain&) const = default;
};

/// A real value per cell (potentials, pressures, Kantorovich potentials).
struct ScalarField {
    Domain domain;
    std::vector<double> values;

    static ScalarField zeros(const Domain& d) { return {d, std::vector<double>(d.size(), 0.0)}; }
};

/// Nonnegative density with unit total mass on a Domain.
class GridMeasure {
public:
    /// Normalizes `density` to unit mass. Throws on negative or non-finite
    /// entries and on zero total mass. If `mass_before` is given it receives
    /// the pre-normalization mass.
    static GridMeasure from_density(Domain domain, std::vector<double> density,
                                    double* mass_before = nullptr);

    /// Cell averages of f (Gauss-Legendre in each cell), normalized.
    static GridMeasure from_function(const Domain& domain,
                                     const std::function<double(double, double)>& f);

    static GridMeasure uniform(const Domain& domain);

    const Domain& domain() const { return domain_; }
    std::span<const double> density() const { return rho_; }
    const std::vector<double>& values() const { return rho_; }
    double operator[](std::size_t i) const { return rho_[i]; }
    std::size_t size() const { return rho_.size(); }

    double mass() const;
    std::vector<double> cell_masses() const;

private:
    GridMeasure(Domain d, std::vector<double> rho) : domain_(std::move(d)), rho_(std::move(rho)) {}

    Domain domain_;
    std::vector<double> rho_;
};

/// Convex combination t*a + (1-t)*b (same domain).
GridMeasure mix(double t, const GridMeasure& a, const GridMeasure& b);

/// Cell averages of f over the domain (not normalized).
std::vector<double> cell_averages(const Domain& domain,
                                  const std::function<double(double, double)>& f);

double second_moment(const GridMeasure& rho);
std::array<double, 2> mean_position(const GridMeasure& rho);

/// Integral of a cellwise field against rho.
double integrate(const ScalarField& f, const GridMeasure& rho);

/// Internal-energy density F with its derivatives, pressure and the scalar
/// KL proximal map used by the entropic JKO solver.
class EnergySpec {
public:
    enum class Kind { entropy, power, custom };
    using Fn = std::function<double(double)>;

    /// nu * s log s
    static EnergySpec entropy(double nu = 1.0);
    /// nu * s^m, m > 1
    static EnergySpec power(double m, double nu = 1.0);
    static EnergySpec custom(std::string name, Fn F, Fn dF, Fn d2F);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double exponent() const { return m_; }
    double coefficient() const { return nu_; }

    double F(double s) const;
    double dF(double s) const;
    double d2F(double s) const;
    double pressure(double s) const;

    /// argmin_r sigma*(F(r) + v*r) + r*log(r/p) - r, with p passed as log p.
    double prox_kl(double sigma, double v, double log_p) const;

    /// Lower-bound exponent alpha in F(rho) >= -C(1+M(rho))^alpha (metadata).
    double alpha = 0.5;

private:
    Kind kind_ = Kind::entropy;
    std::string name_;
    double m_ = 1.0;
    double nu_ = 1.0;
    Fn F_, dF_, d2F_;
};

double internal_energy(const EnergySpec& e, const GridMeasure& rho);
ScalarField pressure_field(const EnergySpec& e, const GridMeasure& rho);

struct EnergyAssumptionReport {
    bool zero_at_origin = true;
    bool strictly_convex = true;
    bool superlinear = true;
    bool pressure_bound = true;
    double fitted_pressure_constant = 0.0;
    std::vector<std::string> violations;

    bool all_pass() const { return violations.empty(); }
};

/// Sampled checks of F(0)=0, strict convexity, superlinearity and
/// P(s) <= C(s + F(s)). `samples` must be positive and span several decades.
EnergyAssumptionReport check_energy_assumptions(const EnergySpec& e,
                                                std::span<const double> samples);

/// Geometric sample grid [lo, hi] with `per_decade` points per decade.
std::vector<double> geometric_samples(double lo, double hi, int per_decade = 8);

// Snapshot files: header `dim nx [ny] x0 x1 [y0 y1] t`, then values row-major,
// one per line, 17 significant digits.
void write_snapshot(std::ostream& os, const GridMeasure& rho, double t);
void write_snapshot(const std::string& path, const GridMeasure& rho, double t);
struct Snapshot {
    GridMeasure measure;
    double t;
};
Snapshot read_snapshot(std::istream& is, Boundary bc = Boundary::noflux);
Snapshot read_snapshot(const std::string& path, Boundary bc = Boundary::noflux);

}  // namespace sjko
