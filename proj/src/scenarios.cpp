#include <algorithm>
#include <cmath>

#include "sjko/error.hpp"
#include "sjko/oracles.hpp"
#include "sjko/scenarios.hpp"

namespace sjko {

EnergySpec EnergyParams::build() const {
    if (kind == "entropy") return EnergySpec::entropy(nu);
    if (kind == "power") return EnergySpec::power(m, nu);
    fail(ErrorKind::config, "energy.kind: unknown value '" + kind + "' (entropy, power)");
}

namespace {

KernelShape parse_shape(const std::string& s) {
    if (s == "quadratic") return KernelShape::quadratic;
    if (s == "gaussian") return KernelShape::gaussian;
    fail(ErrorKind::config, "drift.shape: unknown value '" + s + "' (quadratic, gaussian)");
}

}  // namespace

DriftModel DriftParams::build() const {
    if (kind == "zero") return DriftModel::zero();
    if (kind == "interaction") return DriftModel::interaction(parse_shape(shape), strength, width, source);
    if (kind == "hamiltonian") return DriftModel::hamiltonian(parse_shape(shape), strength, width, source);
    if (kind == "rotation") return DriftModel::rotation(strength, center);
    if (kind == "confinement") {
        const double k = strength;
        const auto c = center;
        return DriftModel::external(
            [k, c](double x, double y) { return 0.5 * k * ((x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1])); },
            [k, c](double x, double y) { return std::array<double, 2>{k * (x - c[0]), k * (y - c[1])}; },
            std::max(0.0, -k));
    }
    fail(ErrorKind::config,
         "drift.kind: unknown value '" + kind + "' (zero, interaction, hamiltonian, rotation, confinement)");
}

Domain ScenarioParams::domain() const {
    if (dim == 1) return Domain::line(lo[0], hi[0], cells[0], boundary);
    if (dim == 2) return Domain::box(lo[0], hi[0], cells[0], lo[1], hi[1], cells[1], boundary);
    fail(ErrorKind::config, "domain.dim must be 1 or 2");
}

std::vector<std::string> scenario_names() {
    return {"heat",        "porous-medium", "aggregation-diffusion", "rotation-transport",
            "mixed-drift", "two-species",   "stationary-gaussian",   "custom"};
}

ScenarioParams preset(const std::string& name) {
    ScenarioParams p;
    p.name = name;
    p.h_list = {4e-3, 2e-3, 1e-3};
    SpeciesParams& s = p.species.front();
    if (name == "heat" || name == "custom") return p;
    if (name == "porous-medium") {
        s.energy.kind = "power";
        s.energy.m = 2.0;
        s.initial.kind = "barenblatt";
        s.initial.t0 = 0.1;
        return p;
    }
    if (name == "aggregation-diffusion") {
        s.energy.nu = 0.5;
        s.initial.sigma = 1.0;
        s.drift = {DriftParams{"interaction", "gaussian", 1.0, 1.0, {0.0, 0.0}, 0}};
        p.h = 2e-3;
        p.T = 0.5;
        return p;
    }
    if (name == "rotation-transport") {
        p.dim = 2;
        p.lo = {-2.0, -2.0};
        p.hi = {2.0, 2.0};
        p.cells = {128, 128};
        p.boundary = Boundary::periodic;
        p.h = 1e-2;
        p.T = 1.0;
        p.h_list = {1e-4, 3.1622776601683794e-4, 1e-3, 3.1622776601683794e-3, 1e-2};
        p.transport_only = true;
        p.growth_constant = 1.0;
        p.record_w2 = false;
        s.initial.center = {0.5, 0.0};
        s.initial.sigma = 0.3;
        s.drift = {DriftParams{"rotation", "quadratic", 1.0, 1.0, {0.0, 0.0}, 0}};
        return p;
    }
    if (name == "mixed-drift") {
        p.dim = 2;
        p.lo = {-3.0, -3.0};
        p.hi = {3.0, 3.0};
        p.cells = {32, 32};
        p.h = 1e-2;
        p.T = 0.2;
        p.h_list = {4e-2, 2e-2, 1e-2, 4e-3};
        s.initial.center = {0.8, 0.0};
        s.initial.sigma = 0.5;
        s.drift = {DriftParams{"interaction", "quadratic", 1.0, 1.0, {0.0, 0.0}, 0},
                   DriftParams{"hamiltonian", "gaussian", 1.0, 1.0, {0.0, 0.0}, 0}};
        return p;
    }
    if (name == "two-species") {
        p.h = 2e-3;
        SpeciesParams a = s, b = s;
        a.initial.center = {-1.0, 0.0};
        b.initial.center = {1.0, 0.0};
        a.drift = {DriftParams{"interaction", "gaussian", 0.5, 1.0, {0.0, 0.0}, 1}};
        b.drift = {DriftParams{"interaction", "gaussian", 0.5, 1.0, {0.0, 0.0}, 0}};
        p.species = {a, b};
        return p;
    }
    if (name == "stationary-gaussian") {
        p.h = 5e-2;
        p.T = 0.5;
        p.h_list = {1e-1, 5e-2, 2.5e-2};
        s.initial.kind = "stationary";
        s.drift = {DriftParams{"confinement", "quadratic", 1.0, 1.0, {0.0, 0.0}, 0}};
        return p;
    }
    std::string known;
    for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
    fail(ErrorKind::config, "scenario.name: unknown preset '" + name + "' (" + known + ")");
}

namespace {

DriftModel build_drift(const std::vector<DriftParams>& v) {
    DriftModel m = DriftModel::zero();
    for (const auto& d : v) m.add(d.build());
    return m;
}

bool only(const std::vector<DriftParams>& v, const std::string& kind) {
    return v.size() == 1 && v.front().kind == kind;
}

bool no_drift(const std::vector<DriftParams>& v) {
    return std::all_of(v.begin(), v.end(), [](const DriftParams& d) { return d.kind == "zero"; });
}

double confinement_potential(const std::vector<DriftParams>& v, double x, double y) {
    double s = 0.0;
    for (const auto& d : v)
        if (d.kind == "confinement")
            s += 0.5 * d.strength * ((x - d.center[0]) * (x - d.center[0]) + (y - d.center[1]) * (y - d.center[1]));
    return s;
}

GridMeasure initial_measure(const Domain& d, const SpeciesParams& s) {
    const InitialParams& in = s.initial;
    if (in.kind == "gaussian") {
        require(in.sigma > 0.0, "initial.sigma must be positive");
        return oracle::heat(d, in.sigma, in.center, 0.0);
    }
    if (in.kind == "uniform") return GridMeasure::uniform(d);
    if (in.kind == "barenblatt") {
        if (s.energy.kind != "power") fail(ErrorKind::config, "initial.kind = barenblatt needs energy.kind = power");
        oracle::Barenblatt b{d.dim, s.energy.m, s.energy.nu, in.t0, in.center};
        return b.on(d, 0.0);
    }
    if (in.kind == "stationary") {
        if (std::none_of(s.drift.begin(), s.drift.end(), [](const DriftParams& p) { return p.kind == "confinement"; }))
            fail(ErrorKind::config, "initial.kind = stationary needs a confinement drift");
        const double nu = s.energy.nu;
        if (s.energy.kind != "entropy") fail(ErrorKind::config, "initial.kind = stationary needs energy.kind = entropy");
        const auto drift = s.drift;
        return oracle::stationary(d, [drift](double x, double y) { return confinement_potential(drift, x, y); }, nu);
    }
    fail(ErrorKind::config, "initial.kind: unknown value '" + in.kind + "' (gaussian, barenblatt, stationary, uniform)");
}

}  // namespace

Scenario build_scenario(const ScenarioParams& p) {
    Scenario sc;
    sc.params = p;
    if (p.species.empty()) fail(ErrorKind::config, "scenario needs at least one species");
    if (!(std::isfinite(p.h) && p.h > 0.0)) fail(ErrorKind::config, "time.h must be positive");
    if (!(std::isfinite(p.T) && p.T > 0.0)) fail(ErrorKind::config, "time.T must be positive");
    for (double h : p.h_list)
        if (!(std::isfinite(h) && h > 0.0)) fail(ErrorKind::config, "study.h_list entries must be positive");
    try {
        sc.domain = p.domain();
        sc.domain.validate();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::config) throw;
        fail(ErrorKind::config, std::string("domain: ") + e.what());
    }
    const Domain& d = sc.domain;
    for (std::size_t i = 0; i < p.species.size(); ++i) {
        const SpeciesParams& s = p.species[i];
        for (const auto& dp : s.drift)
            if (dp.source < 0 || dp.source >= static_cast<int>(p.species.size()))
                fail(ErrorKind::config, "drift.source: species " + std::to_string(dp.source) + " does not exist");
        sc.species.push_back({s.energy.build(), build_drift(s.drift)});
        sc.rho0.push_back(initial_measure(d, s));
    }

    SchemeConfig& c = sc.scheme;
    c.h = p.h;
    c.T = p.T;
    c.energy = sc.species.front().energy;
    c.drift = sc.species.front().drift;
    c.jko = p.jko;
    c.transport = p.transport;
    c.transport_only = p.transport_only;
    c.ot.entropic.epsilon = p.ot_epsilon;
    c.record_transport_w2 = c.record_step_w2 = p.record_w2;

    if (p.species.size() != 1) return sc;
    const SpeciesParams& s = p.species.front();
    if (p.transport_only && only(s.drift, "rotation") && s.initial.kind == "gaussian") {
        // the scheme transports along W = -U, i.e. clockwise for omega > 0
        const DriftParams r = s.drift.front();
        const auto in = s.initial;
        auto f = [in](double x, double y) {
            const double dx = x - in.center[0], dy = y - in.center[1];
            return std::exp(-(dx * dx + dy * dy) / (2.0 * in.sigma * in.sigma));
        };
        sc.reference = [d, f, r](double t) { return oracle::rotated(d, f, -r.strength, r.center, t); };
        sc.reference_name = "rotation";
    } else if (p.transport_only) {
        return sc;
    } else if (no_drift(s.drift) && s.energy.kind == "entropy" && s.initial.kind == "gaussian") {
        const auto in = s.initial;
        const double nu = s.energy.nu;
        sc.reference = [d, in, nu](double t) { return oracle::heat(d, in.sigma, in.center, t, nu); };
        sc.reference_name = "heat-kernel";
    } else if (no_drift(s.drift) && s.energy.kind == "power" && s.initial.kind == "barenblatt") {
        oracle::Barenblatt b{d.dim, s.energy.m, s.energy.nu, s.initial.t0, s.initial.center};
        sc.reference = [d, b](double t) { return b.on(d, t); };
        sc.reference_name = "barenblatt";
    } else if (only(s.drift, "confinement") && s.initial.kind == "stationary") {
        const GridMeasure r = sc.rho0.front();
        sc.reference = [r](double) { return r; };
        sc.reference_name = "stationary";
    }
    return sc;
}

}  // namespace sjko
