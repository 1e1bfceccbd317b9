#include <cmath>
#include <limits>

#include <json.hpp>

#include "sjko/error.hpp"
#include "sjko/helmholtz.hpp"
#include "sjko/jko.hpp"

namespace sjko {

std::string to_string(JKOBackend b) {
    switch (b) {
        case JKOBackend::automatic: return "automatic";
        case JKOBackend::quantile_1d: return "quantile-1d";
        case JKOBackend::entropic_prox: return "entropic-prox";
    }
    return "unknown";
}

std::string JKOStepResult::to_json(int step) const {
    nlohmann::json j{{"k", step},
                     {"w2_term", w2_term},
                     {"energy", energy_term},
                     {"potential_term", potential_term},
                     {"objective", objective},
                     {"iterations", iterations},
                     {"residual", residual},
                     {"converged", converged},
                     {"fell_back", fell_back},
                     {"backend", sjko::to_string(backend)}};
    return j.dump();
}

OTOptions ot_options_for(const Domain& d, const JKOOptions& opt) {
    OTOptions o;
    o.entropic = opt.entropic;
    o.backend = (d.dim == 1 && d.boundary == Boundary::noflux) ? OTBackend::exact_1d : OTBackend::entropic;
    return o;
}

double jko_objective(const GridMeasure& rho, const GridMeasure& rho_tilde, const ScalarField& V,
                     const EnergySpec& E, double h, const OTOptions& ot) {
    return w2_squared(rho, rho_tilde, ot) + 2.0 * h * (internal_energy(E, rho) + integrate(V, rho));
}

namespace {

void set_identity(JKOStepResult& r) {
    const Domain& d = r.rho.domain();
    r.phi.assign(d.size(), 0.0);
    r.map.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) r.map[i] = d.point(i);
}

}  // namespace

JKOStepResult jko_step(const GridMeasure& rho_tilde, const ScalarField& V, const EnergySpec& E, double h,
                       const JKOOptions& opt, JKOWarmStart* warm) {
    require(std::isfinite(h) && h > 0.0, "jko: h must be positive");
    if (h >= opt.h0) fail(ErrorKind::invalid_argument, "jko: h must stay below h0 = " + std::to_string(opt.h0));
    const Domain& d = rho_tilde.domain();
    require(V.domain == d, "jko: potential lives on a different domain");
    for (double v : V.values)
        if (!std::isfinite(v)) fail(ErrorKind::non_finite, "jko: potential is not finite");

    JKOBackend b = opt.backend;
    if (b == JKOBackend::automatic)
        b = (d.dim == 1 && d.boundary == Boundary::noflux) ? JKOBackend::quantile_1d : JKOBackend::entropic_prox;
    JKOStepResult r = b == JKOBackend::quantile_1d ? detail::jko_quantile(rho_tilde, V, E, h, opt, warm)
                                                   : detail::jko_entropic(rho_tilde, V, E, h, opt, warm);

    const OTOptions ot = ot_options_for(d, opt);
    const double competitor = 2.0 * h * (internal_energy(E, rho_tilde) + integrate(V, rho_tilde));
    bool ok = std::isfinite(r.residual);
    if (ok) {
        const OTResult o = w2(r.rho, rho_tilde, ot);
        r.w2_term = o.cost;
        r.phi = kantorovich_potential(o);
        r.map = o.map;
        r.energy_term = internal_energy(E, r.rho);
        r.potential_term = integrate(V, r.rho);
        r.objective = r.w2_term + 2.0 * h * (r.energy_term + r.potential_term);
        ok = std::isfinite(r.objective) && r.objective <= competitor + 2.0 * h * opt.fallback_slack;
    }
    if (!ok) {
        r.rho = rho_tilde;
        r.fell_back = true;
        r.w2_term = 0.0;
        r.energy_term = internal_energy(E, rho_tilde);
        r.potential_term = integrate(V, rho_tilde);
        r.objective = competitor;
        r.nodes = {};
        set_identity(r);
    }
    return r;
}

double competitor_gap(const JKOStepResult& result, const GridMeasure& rho_tilde, const ScalarField& V,
                      const EnergySpec& E, double h, const OTOptions& ot) {
    const double w2sq = w2_squared(result.rho, rho_tilde, ot);
    const double gain = internal_energy(E, rho_tilde) - internal_energy(E, result.rho) +
                        integrate(V, rho_tilde) - integrate(V, result.rho);
    return w2sq / (2.0 * h) - gain;
}

double euler_lagrange_residual(const JKOStepResult& result, const GridMeasure& rho_tilde, const ScalarField& V,
                               const EnergySpec& E, double h) {
    const GridMeasure& rho = result.rho;
    const Domain& d = rho.domain();
    require(rho_tilde.domain() == d && V.domain == d, "euler_lagrange_residual: domain mismatch");
    require(result.map.size() == d.size(), "euler_lagrange_residual: result carries no map");
    const VectorField gV = centered_gradient(V);
    const VectorField gP = centered_gradient(pressure_field(E, rho));
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (rho[i] <= kVacuum) continue;
        const auto x = d.point(i);
        std::array<double, 2> dphi{x[0] - result.map[i][0], x[1] - result.map[i][1]};
        if (d.boundary == Boundary::periodic)
            for (int ax = 0; ax < d.dim; ++ax) dphi[ax] -= d.length(ax) * std::round(dphi[ax] / d.length(ax));
        const double ex = h * (gV.x[i] * rho[i] + gP.x[i]) + dphi[0] * rho[i];
        const double ey = d.dim == 2 ? h * (gV.y[i] * rho[i] + gP.y[i]) + dphi[1] * rho[i] : 0.0;
        acc += std::hypot(ex, ey);
    }
    return acc * d.cell_volume() / h;
}

}  // namespace sjko
