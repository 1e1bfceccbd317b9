#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sjko/detail/numerics.hpp"
#include "sjko/diagnostics.hpp"
#include "sjko/error.hpp"

namespace sjko {

namespace {

nlohmann::json fit_json(const PowerFit& f) { return nlohmann::json::parse(f.to_json()); }

std::vector<std::size_t> by_decreasing_h(const std::vector<SchemeTrajectory>& runs) {
    std::vector<std::size_t> idx(runs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return runs[a].h > runs[b].h; });
    return idx;
}

// multiples of H in [0, T], thinned to at most `cap` (0 keeps all)
std::vector<double> common_times(double H, double T, int cap, bool include_zero) {
    const int n = static_cast<int>(std::floor(T / H * (1.0 + 1e-12)));
    std::vector<double> t;
    for (int j = include_zero ? 0 : 1; j <= n; ++j) t.push_back(std::min(j * H, T));
    if (cap > 0 && static_cast<int>(t.size()) > cap) {
        std::vector<double> thin;
        for (int j = 0; j < cap; ++j) {
            const std::size_t i = cap == 1 ? t.size() - 1
                                           : static_cast<std::size_t>(std::llround(
                                                 static_cast<double>(j) * (t.size() - 1) / (cap - 1)));
            if (thin.empty() || thin.back() != t[i]) thin.push_back(t[i]);
        }
        t.swap(thin);
    }
    return t;
}

std::vector<int> spread_steps(int N, int probes) {
    std::vector<int> ks;
    if (N <= 0) return ks;
    const int p = std::clamp(probes, 1, N);
    for (int j = 0; j < p; ++j) {
        const int k = p == 1 ? N - 1 : static_cast<int>(std::llround(static_cast<double>(j) * (N - 1) / (p - 1)));
        if (ks.empty() || ks.back() != k) ks.push_back(k);
    }
    return ks;
}

double grad_pressure_mass(const EnergySpec& E, const GridMeasure& rho, const std::vector<char>* mask,
                          double* mass_in) {
    const VectorField g = centered_gradient(pressure_field(E, rho));
    const Domain& d = rho.domain();
    std::vector<double> t(g.x.size(), 0.0), m(g.x.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (mask && !(*mask)[i]) continue;
        t[i] = std::hypot(g.x[i], g.y[i]);
        m[i] = rho[i];
    }
    if (mass_in) *mass_in = detail::pairwise_sum(m) * d.cell_volume();
    return detail::pairwise_sum(t) * d.cell_volume();
}

}  // namespace

bool constants_stable(const std::vector<double>& c, double slack) {
    for (std::size_t i = 1; i < c.size(); ++i)
        if (!(c[i] <= slack * c[i - 1])) return false;
    return !c.empty();
}

std::string EstimateReport::to_json() const {
    nlohmann::json j;
    j["runs"] = nlohmann::json::array();
    for (const auto& r : runs)
        j["runs"].push_back({{"h", r.h},
                             {"sup_energy", r.sup_energy},
                             {"sup_moment", r.sup_moment},
                             {"sum_w2_jko", r.sum_w2_jko},
                             {"sum_w2_step", r.sum_w2_step},
                             {"holder_constant", r.holder_constant},
                             {"bv_total", r.bv_total}});
    j["sum_w2_jko_fit"] = fit_json(sum_w2_jko_fit);
    j["sum_w2_step_fit"] = fit_json(sum_w2_step_fit);
    j["energy_stable"] = energy_stable;
    j["moment_stable"] = moment_stable;
    j["holder_stable"] = holder_stable;
    j["bv_stable"] = bv_stable;
    j["telescoping_ok"] = telescoping_ok;
    return j.dump();
}

EstimateReport estimate_report(const std::vector<SchemeTrajectory>& runs, const std::vector<EnergySpec>& energies,
                               const OTOptions& ot, int probes) {
    require(!runs.empty(), "estimate_report: no runs");
    require(energies.size() == 1 || energies.size() == runs.size(), "estimate_report: one energy or one per run");
    const auto order = by_decreasing_h(runs);
    const double H = runs[order.front()].h;
    double Tmin = runs[order.front()].T;
    for (const auto& r : runs) Tmin = std::min(Tmin, r.T);
    const std::vector<double> times = common_times(H, Tmin, probes, true);

    EstimateReport rep;
    std::vector<double> hs, jko, step, en, mo, hold, bv;
    for (std::size_t i : order) {
        const SchemeTrajectory& tr = runs[i];
        const EnergySpec& E = energies.size() == 1 ? energies.front() : energies[i];
        EstimateRecord r;
        r.h = tr.h;
        for (const auto& rho : tr.rho) {
            r.sup_energy = std::max(r.sup_energy, std::abs(internal_energy(E, rho)));
            r.sup_moment = std::max(r.sup_moment, second_moment(rho));
        }
        std::vector<double> a, b, c;
        for (const auto& s : tr.records) {
            a.push_back(s.w2_jko);
            b.push_back(s.w2_step);
        }
        r.sum_w2_jko = detail::pairwise_sum(a);
        r.sum_w2_step = detail::pairwise_sum(b);
        for (int k = 0; k < tr.steps(); ++k) c.push_back(tr.h * grad_pressure_mass(E, tr.rho[k + 1], nullptr, nullptr));
        r.bv_total = detail::pairwise_sum(c);
        std::vector<GridMeasure> at;
        for (double t : times) at.push_back(evaluate_interpolation(tr, t, Interpolation::rho));
        for (std::size_t p = 0; p < times.size(); ++p)
            for (std::size_t q = p + 1; q < times.size(); ++q) {
                const double w = std::sqrt(std::max(0.0, w2_squared(at[p], at[q], ot)));
                r.holder_constant = std::max(r.holder_constant, w / std::sqrt(std::abs(times[q] - times[p]) + tr.h));
            }
        rep.runs.push_back(r);
        hs.push_back(r.h);
        jko.push_back(r.sum_w2_jko);
        step.push_back(r.sum_w2_step);
        en.push_back(r.sup_energy);
        mo.push_back(r.sup_moment);
        hold.push_back(r.holder_constant);
        bv.push_back(r.bv_total);
    }
    rep.sum_w2_jko_fit = fit_power_law(hs, jko);
    rep.sum_w2_step_fit = fit_power_law(hs, step);
    rep.energy_stable = constants_stable(en);
    rep.moment_stable = constants_stable(mo);
    rep.holder_stable = constants_stable(hold);
    rep.bv_stable = constants_stable(bv);
    rep.telescoping_ok =
        rep.sum_w2_jko_fit.samples >= 3 && rep.sum_w2_jko_fit.slope >= 0.8 && rep.sum_w2_jko_fit.r2 >= 0.95;
    return rep;
}

std::string BVPressureReport::to_json() const {
    nlohmann::json j{{"total", total}, {"per_time", per_time}, {"tightness_constant", tightness_constant}};
    j["tightness"] = nlohmann::json::array();
    for (const auto& t : tightness)
        j["tightness"].push_back({{"radius", t.radius}, {"lhs", t.lhs}, {"mass", t.mass}, {"constant", t.constant}});
    return j.dump();
}

BVPressureReport bv_pressure_report(const SchemeTrajectory& traj, const EnergySpec& E, std::vector<double> radii) {
    const int N = traj.steps();
    require(N >= 1, "bv_pressure_report: empty trajectory");
    const Domain& d = traj.rho.front().domain();
    const auto c = mean_position(traj.rho.front());
    if (radii.empty()) {
        const double L = 0.5 * (d.dim == 2 ? std::min(d.length(0), d.length(1)) : d.length(0));
        for (int j = 1; j <= 4; ++j) radii.push_back(L / (1 << j));
    }
    BVPressureReport rep;
    std::vector<double> tot(N);
    for (int k = 0; k < N; ++k) tot[k] = traj.h * grad_pressure_mass(E, traj.rho[k + 1], nullptr, nullptr);
    rep.total = detail::pairwise_sum(tot);
    rep.per_time = rep.total / traj.T;
    for (double r : radii) {
        std::vector<char> mask(d.size(), 0);
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto p = d.point(i);
            mask[i] = std::hypot(p[0] - c[0], d.dim == 2 ? p[1] - c[1] : 0.0) <= r;
        }
        std::vector<double> l(N), m(N);
        for (int k = 0; k < N; ++k) {
            double mk = 0.0;
            l[k] = traj.h * grad_pressure_mass(E, traj.rho[k + 1], &mask, &mk);
            m[k] = traj.h * mk;
        }
        TightnessRecord t;
        t.radius = r;
        t.lhs = detail::pairwise_sum(l);
        t.mass = detail::pairwise_sum(m);
        t.constant = t.mass > 0.0 ? t.lhs / ((1.0 + std::sqrt(traj.h)) * std::sqrt(t.mass)) : 0.0;
        rep.tightness_constant = std::max(rep.tightness_constant, t.constant);
        rep.tightness.push_back(t);
    }
    return rep;
}

InterpolationAgreement interpolation_agreement(const SchemeTrajectory& traj, const OTOptions& ot, int probes) {
    const int N = traj.steps();
    require(N >= 1, "interpolation_agreement: empty trajectory");
    InterpolationAgreement a;
    a.h = traj.h;
    for (const auto& r : traj.records) a.rho_tilde1 = std::max(a.rho_tilde1, r.w2_jko);
    a.rho_tilde1 = std::sqrt(a.rho_tilde1);
    for (int k : spread_steps(N, probes)) {
        for (double frac : {0.5, 1.0}) {
            const double t = (k + frac) * traj.h;
            const GridMeasure t2 = evaluate_interpolation(traj, t, Interpolation::tilde2);
            const double a2 = std::sqrt(std::max(0.0, w2_squared(traj.rho[k + 1], t2, ot)));
            const double a12 = std::sqrt(std::max(0.0, w2_squared(traj.tilde[k + 1], t2, ot)));
            a.rho_tilde2 = std::max(a.rho_tilde2, a2);
            a.tilde1_tilde2 = std::max(a.tilde1_tilde2, a12);
        }
    }
    a.sup = std::max({a.rho_tilde1, a.rho_tilde2, a.tilde1_tilde2});
    a.constant = a.sup / std::sqrt(traj.h);
    return a;
}

std::string ConvergenceStudy::to_json() const {
    nlohmann::json j;
    j["reference"] = reference == Reference::analytic ? "analytic" : "finest";
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"h", r.h},
                             {"sup_error", r.sup_error},
                             {"rho_tilde1", r.rho_tilde1},
                             {"rho_tilde2", r.rho_tilde2},
                             {"tilde1_tilde2", r.tilde1_tilde2},
                             {"sum_w2_jko", r.sum_w2_jko}});
    j["order"] = fit_json(order);
    j["monotone"] = monotone;
    j["warnings"] = warnings;
    return j.dump();
}

std::string ConvergenceStudy::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "h,sup_error,rho_tilde1,rho_tilde2,tilde1_tilde2,sum_w2_jko\n";
    for (const auto& r : rows)
        os << r.h << ',' << r.sup_error << ',' << r.rho_tilde1 << ',' << r.rho_tilde2 << ',' << r.tilde1_tilde2
           << ',' << r.sum_w2_jko << '\n';
    return os.str();
}

std::string ConvergenceStudy::to_dat() const {
    std::ostringstream os;
    os.precision(10);
    os << "# h sup_error rho_tilde1 rho_tilde2 tilde1_tilde2 sum_w2_jko\n";
    for (const auto& r : rows)
        os << r.h << ' ' << r.sup_error << ' ' << r.rho_tilde1 << ' ' << r.rho_tilde2 << ' ' << r.tilde1_tilde2
           << ' ' << r.sum_w2_jko << '\n';
    os << "# fitted order " << order.slope << " (R^2 " << order.r2 << ", " << order.samples << " samples)\n";
    return os.str();
}

ConvergenceStudy convergence_study(const std::vector<SchemeTrajectory>& runs,
                                   const std::function<GridMeasure(double)>& reference, const OTOptions& ot,
                                   int tilde2_probes, int max_times) {
    const auto order = by_decreasing_h(runs);
    const bool analytic = static_cast<bool>(reference);
    require(runs.size() >= (analytic ? 3u : 4u), "convergence_study: need at least 3 values of h to fit");
    ConvergenceStudy st;
    st.reference = analytic ? Reference::analytic : Reference::finest;
    for (std::size_t p = 1; p < order.size(); ++p) {
        const double ratio = runs[order[p - 1]].h / runs[order[p]].h;
        if (ratio < 1.5) st.warnings.push_back("h values are closer than a factor 1.5 at h = " +
                                               std::to_string(runs[order[p]].h));
    }
    const double H = runs[order.front()].h;
    double Tmin = runs[order.front()].T;
    for (const auto& r : runs) Tmin = std::min(Tmin, r.T);
    const std::vector<double> times = common_times(H, Tmin, max_times, false);

    std::vector<GridMeasure> ref;
    for (double t : times)
        ref.push_back(analytic ? reference(t) : evaluate_interpolation(runs[order.back()], t, Interpolation::rho));

    const std::size_t fitted = analytic ? order.size() : order.size() - 1;
    std::vector<double> hs, errs;
    for (std::size_t p = 0; p < fitted; ++p) {
        const SchemeTrajectory& tr = runs[order[p]];
        ConvergenceRow row;
        row.h = tr.h;
        for (std::size_t j = 0; j < times.size(); ++j) {
            const GridMeasure r = evaluate_interpolation(tr, times[j], Interpolation::rho);
            row.sup_error = std::max(row.sup_error, std::sqrt(std::max(0.0, w2_squared(r, ref[j], ot))));
        }
        const InterpolationAgreement a = interpolation_agreement(tr, ot, tilde2_probes);
        row.rho_tilde1 = a.rho_tilde1;
        row.rho_tilde2 = a.rho_tilde2;
        row.tilde1_tilde2 = a.tilde1_tilde2;
        std::vector<double> w;
        for (const auto& s : tr.records) w.push_back(s.w2_jko);
        row.sum_w2_jko = detail::pairwise_sum(w);
        hs.push_back(row.h);
        errs.push_back(row.sup_error);
        st.rows.push_back(row);
    }
    st.order = fit_power_law(hs, errs);
    st.monotone = true;
    for (std::size_t p = 1; p < errs.size(); ++p)
        if (!(errs[p] < errs[p - 1])) {
            st.monotone = false;
            st.warnings.push_back("error does not decrease from h = " + std::to_string(hs[p - 1]) +
                                  " to h = " + std::to_string(hs[p]));
        }
    return st;
}

}  // namespace sjko
