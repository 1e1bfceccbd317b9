#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sjko/detail/numerics.hpp"
#include "sjko/error.hpp"
#include "sjko/scheme.hpp"

namespace sjko {

int SchemeConfig::steps() const {
    require(std::isfinite(h) && h > 0.0, "h must be positive");
    require(std::isfinite(T) && T > 0.0, "T must be positive");
    return std::max(1, static_cast<int>(std::ceil(T / h * (1.0 - 1e-12))));
}

std::string StepRecord::to_json() const {
    nlohmann::json j{{"k", k},
                     {"t", t},
                     {"w2_transport", w2_transport},
                     {"w2_jko", w2_jko},
                     {"w2_step", w2_step},
                     {"energy", energy_after},
                     {"energy_tilde", energy_tilde},
                     {"energy_drift", energy_drift},
                     {"second_moment", second_moment},
                     {"grad_pressure_l1", grad_pressure_l1},
                     {"mass_drift", mass_drift},
                     {"clamped_mass", clamped_mass},
                     {"substeps", substeps},
                     {"objective", objective},
                     {"potential_term", potential_term},
                     {"iterations", iterations},
                     {"residual", residual},
                     {"gap", gap},
                     {"el_residual", el_residual},
                     {"converged", converged},
                     {"fell_back", fell_back}};
    return j.dump();
}

std::string StepRecord::csv_header() {
    return "k,t,w2_transport,w2_jko,w2_step,energy_before,energy_tilde,energy_after,energy_drift,"
           "second_moment,grad_pressure_l1,mass_drift,clamped_mass,substeps,objective,potential_term,"
           "iterations,residual,gap,el_residual,converged,fell_back";
}

std::string StepRecord::csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << k << ',' << t << ',' << w2_transport << ',' << w2_jko << ',' << w2_step << ',' << energy_before << ','
       << energy_tilde << ',' << energy_after << ',' << energy_drift << ',' << second_moment << ','
       << grad_pressure_l1 << ',' << mass_drift << ',' << clamped_mass << ',' << substeps << ',' << objective
       << ',' << potential_term << ',' << iterations << ',' << residual << ',' << gap << ',' << el_residual << ',' << converged << ','
       << fell_back;
    return os.str();
}

std::string to_string(Interpolation which) {
    switch (which) {
        case Interpolation::rho: return "rho";
        case Interpolation::tilde1: return "tilde1";
        case Interpolation::tilde2: return "tilde2";
    }
    return "unknown";
}

double h0_limit(const DriftModel& drift) {
    const auto c = drift.known_semiconvexity();
    if (!c || *c <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (2.0 * *c);
}

namespace {

double grad_pressure_l1(const EnergySpec& E, const GridMeasure& rho) {
    const VectorField g = centered_gradient(pressure_field(E, rho));
    std::vector<double> t(g.x.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::hypot(g.x[i], g.y[i]);
    return detail::pairwise_sum(t) * rho.domain().cell_volume();
}

struct Split {
    VectorField W;
    ScalarField V;
};

Split split_drift(const DriftModel& m, std::span<const GridMeasure> state) {
    const Domain& d = state.front().domain();
    if (m.is_zero()) return {VectorField::zeros(d), ScalarField::zeros(d)};
    HelmholtzSplit s = decompose(evaluate_drift(m, state));
    return {std::move(s.W), std::move(s.V)};
}

}  // namespace

std::vector<SchemeTrajectory> run_scheme_system(std::span<const GridMeasure> rho0, const SystemConfig& cfg) {
    const std::size_t S = cfg.species.size();
    require(S >= 1 && rho0.size() == S, "run_scheme_system: one initial density per species");
    const Domain& d = rho0.front().domain();
    for (const auto& r : rho0)
        if (!(r.domain() == d)) fail(ErrorKind::domain_mismatch, "run_scheme_system: species on different domains");
    const SchemeConfig& base = cfg.base;
    const int N = base.steps();
    const double h = base.h;

    std::vector<JKOOptions> jopt(S, base.jko);
    for (std::size_t s = 0; s < S; ++s) {
        if (!std::isfinite(internal_energy(cfg.species[s].energy, rho0[s])))
            fail(ErrorKind::non_finite, "initial internal energy is not finite");
        if (base.transport_only) continue;
        jopt[s].h0 = std::min(jopt[s].h0, h0_limit(cfg.species[s].drift));
        if (h >= jopt[s].h0)
            fail(ErrorKind::invalid_argument,
                 "h = " + std::to_string(h) + " is not below h0 = " + std::to_string(jopt[s].h0));
    }

    std::vector<SchemeTrajectory> out(S);
    for (std::size_t s = 0; s < S; ++s) {
        auto& tr = out[s];
        tr.h = h;
        tr.T = N * h;
        tr.species = static_cast<int>(s);
        tr.transport_only = base.transport_only;
        tr.transport = base.transport;
        tr.rho.reserve(N + 1);
        tr.tilde.reserve(N + 1);
        tr.rho.push_back(rho0[s]);
        tr.tilde.push_back(rho0[s]);
    }
    std::vector<JKOWarmStart> warm(S);

    std::vector<GridMeasure> state(rho0.begin(), rho0.end());
    for (int k = 0; k < N; ++k) {
        try {
            std::vector<GridMeasure> tilde;
            tilde.reserve(S);
            std::vector<StepRecord> rec(S);
            for (std::size_t s = 0; s < S; ++s) {
                const SpeciesSpec& sp = cfg.species[s];
                Split sw = split_drift(sp.drift, state);
                TransportResult tr = transport_step_detailed(state[s], sw.W, h, base.transport);
                StepRecord& r = rec[s];
                r.k = k;
                r.t = (k + 1) * h;
                r.mass_drift = tr.mass_drift;
                r.clamped_mass = tr.clamped_mass;
                r.substeps = tr.substeps;
                r.energy_before = internal_energy(sp.energy, state[s]);
                r.energy_tilde = internal_energy(sp.energy, tr.rho);
                r.energy_drift = std::abs(r.energy_tilde - r.energy_before);
                if (base.record_transport_w2 && !sw.W.is_zero())
                    r.w2_transport = w2_squared(tr.rho, state[s], base.ot);
                out[s].W.push_back(std::move(sw.W));
                tilde.push_back(std::move(tr.rho));
            }
            std::vector<GridMeasure> next;
            next.reserve(S);
            for (std::size_t s = 0; s < S; ++s) {
                const SpeciesSpec& sp = cfg.species[s];
                StepRecord& r = rec[s];
                if (base.transport_only) {
                    out[s].V.push_back(ScalarField::zeros(d));
                    out[s].nodes.emplace_back();
                    next.push_back(tilde[s]);
                } else {
                    ScalarField V = split_drift(sp.drift, tilde).V;
                    JKOStepResult j = jko_step(tilde[s], V, sp.energy, h, jopt[s], &warm[s]);
                    r.w2_jko = j.w2_term;
                    r.objective = j.objective;
                    r.potential_term = j.potential_term;
                    r.iterations = j.iterations;
                    r.residual = j.residual;
                    r.converged = j.converged;
                    r.fell_back = j.fell_back;
                    r.gap = j.w2_term / (2.0 * h) -
                            (r.energy_tilde - j.energy_term + integrate(V, tilde[s]) - j.potential_term);
                    r.el_residual = euler_lagrange_residual(j, tilde[s], V, sp.energy, h);
                    out[s].V.push_back(std::move(V));
                    out[s].nodes.push_back(std::move(j.nodes));
                    next.push_back(std::move(j.rho));
                }
                r.energy_after = internal_energy(sp.energy, next[s]);
                r.second_moment = second_moment(next[s]);
                r.grad_pressure_l1 = grad_pressure_l1(sp.energy, next[s]);
                if (base.record_step_w2) r.w2_step = w2_squared(state[s], next[s], base.ot);
            }
            for (std::size_t s = 0; s < S; ++s) {
                out[s].records.push_back(rec[s]);
                out[s].tilde.push_back(std::move(tilde[s]));
                out[s].rho.push_back(next[s]);
            }
            state = std::move(next);
        } catch (const Error& e) {
            throw Error(e.kind(), "step " + std::to_string(k) + ": " + e.what());
        }
        if (base.progress) base.progress(k + 1, N);
    }
    return out;
}

SchemeTrajectory run_scheme(const GridMeasure& rho0, const SchemeConfig& cfg) {
    SystemConfig sys{cfg, {SpeciesSpec{cfg.energy, cfg.drift}}};
    auto out = run_scheme_system(std::span<const GridMeasure>(&rho0, 1), sys);
    return std::move(out.front());
}

GridMeasure evaluate_interpolation(const SchemeTrajectory& traj, double t, Interpolation which) {
    const int N = traj.steps();
    require(!traj.rho.empty(), "evaluate_interpolation: empty trajectory");
    const double tol = 1e-12 * std::max(1.0, traj.T);
    if (!(t >= -tol && t <= traj.T + tol)) fail(ErrorKind::invalid_argument, "evaluate_interpolation: t out of range");
    if (t <= tol) return traj.rho.front();
    int k = static_cast<int>(std::ceil(t / traj.h * (1.0 - 1e-12))) - 1;
    k = std::clamp(k, 0, N - 1);
    switch (which) {
        case Interpolation::rho: return traj.rho[k + 1];
        case Interpolation::tilde1: return traj.tilde[k + 1];
        case Interpolation::tilde2: {
            const double s = std::clamp(t - k * traj.h, 0.0, traj.h);
            if (traj.W[k].is_zero() || s <= 0.0) return traj.rho[k];
            return transport_step(traj.rho[k], traj.W[k], s, traj.transport);
        }
    }
    return traj.rho.front();
}

}  // namespace sjko
