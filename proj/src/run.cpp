#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "sjko/diagnostics.hpp"
#include "sjko/error.hpp"
#include "sjko/run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sjko {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorKind::io, "sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

OutputWriter::OutputWriter(std::string root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + root_ + "': " + ec.message());
}

void OutputWriter::write(const std::string& rel, const std::string& contents) {
    const fs::path p = fs::path(root_) / rel;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    out << contents;
    out.close();
    if (!out) fail(ErrorKind::io, "cannot write '" + p.string() + "'");
    files_.erase(std::remove_if(files_.begin(), files_.end(), [&](const EmittedFile& f) { return f.path == rel; }),
                 files_.end());
    files_.push_back({rel, sha256_hex(contents), contents.size()});
}

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        if (err->kind() == ErrorKind::config) return exit_config_error;
    }
    return exit_solver_failure;
}

namespace {

std::string kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::domain_mismatch: return "domain_mismatch";
        case ErrorKind::non_finite: return "non_finite";
        case ErrorKind::solver_failure: return "solver_failure";
        case ErrorKind::cfl_violation: return "cfl_violation";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace

std::string failure_json(int exit_code, const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    json j{{"status", exit_code == exit_config_error ? "config-error" : "solver-failure"},
           {"exit_code", exit_code},
           {"kind", err ? kind_name(err->kind()) : "exception"},
           {"message", e.what()}};
    return j.dump();
}

namespace {

json check_json(const CheckResult& c) {
    return {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}, {"detail", c.detail}};
}

std::string snapshot_text(const GridMeasure& rho, double t) {
    std::ostringstream os;
    write_snapshot(os, rho, t);
    return os.str();
}

std::string padded(int k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", k);
    return buf;
}

class Study {
public:
    Study(const RunConfig& cfg, const RunOptions& opt, OutputWriter& out)
        : cfg_(cfg), opt_(opt), out_(out), sc_(build_scenario(cfg.scenario)) {}

    std::vector<CheckResult> checks;

    void single() {
        log("scenario " + cfg_.scenario.name + ": " + std::to_string(sc_.scheme.steps()) + " steps of h = " +
            num(sc_.scheme.h));
        auto trajs = simulate(sc_.scheme);
        for (std::size_t s = 0; s < trajs.size(); ++s) emit_trajectory(trajs[s], "species" + std::to_string(s) + "/");
        json summary = analyze_run(trajs, "");
        out_.write("summary.json", summary.dump(2) + "\n");
    }

    void sweep() {
        if (cfg_.scenario.transport_only) {
            transport_bound_study();
            single();
            return;
        }
        std::vector<double> hs = cfg_.scenario.h_list;
        std::sort(hs.begin(), hs.end(), std::greater<>());
        std::vector<std::vector<SchemeTrajectory>> runs(hs.size());
        std::mutex log_mutex;
        std::size_t next = 0;
        std::exception_ptr failure;
        auto worker = [&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard lock(log_mutex);
                    if (next >= hs.size() || failure) return;
                    i = next++;
                    log("sweep: h = " + num(hs[i]));
                }
                try {
                    SchemeConfig c = sc_.scheme;
                    c.h = hs[i];
                    runs[i] = simulate(c);
                } catch (...) {
                    std::lock_guard lock(log_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        const int W = std::clamp(cfg_.workers, 1, static_cast<int>(hs.size()));
        std::vector<std::thread> pool;
        for (int w = 1; w < W; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);

        std::vector<SchemeTrajectory> first;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            const std::string dir = "study/h" + std::to_string(i) + "/";
            for (std::size_t s = 0; s < runs[i].size(); ++s) {
                std::ostringstream csv;
                csv << StepRecord::csv_header() << '\n';
                for (const auto& r : runs[i][s].records) csv << r.csv_row() << '\n';
                out_.write(dir + "species" + std::to_string(s) + "/diagnostics.csv", csv.str());
            }
            first.push_back(runs[i].front());
        }
        const OTOptions& ot = sc_.scheme.ot;
        const CheckThresholds& th = cfg_.checks;

        // convergence against the oracle, or against the finest run
        if (sc_.reference || first.size() >= 4) {
            log("sweep: convergence study");
            const ConvergenceStudy st = convergence_study(first, sc_.reference, ot, cfg_.probes, cfg_.max_times);
            out_.write("study/convergence.json", json::parse(st.to_json()).dump(2) + "\n");
            out_.write("study/convergence.csv", st.to_csv());
            out_.write("study/convergence.dat", st.to_dat());
            if (th.order_min > 0.0)
                add("convergence_order", st.order.slope, th.order_min,
                    st.order.slope >= th.order_min && st.order.r2 >= th.order_r2_min && st.monotone,
                    "R2 " + num(st.order.r2) + ", " + std::to_string(st.order.samples) + " samples" +
                        (st.monotone ? "" : ", non-monotone"));
        }

        log("sweep: estimates");
        const EstimateReport est = estimate_report(first, {sc_.species.front().energy}, ot, cfg_.probes);
        out_.write("study/estimates.json", json::parse(est.to_json()).dump(2) + "\n");
        if (th.telescoping_min > 0.0) {
            const PowerFit& f = est.sum_w2_jko_fit;
            add("telescoping_slope", f.slope, th.telescoping_min,
                f.samples >= 3 && f.slope >= th.telescoping_min && f.r2 >= th.r2_min,
                "R2 " + num(f.r2) + ", " + std::to_string(f.samples) + " samples");
        }
        std::vector<double> en, mo, ho, bv, ic;
        for (const auto& r : est.runs) {
            en.push_back(r.sup_energy);
            mo.push_back(r.sup_moment);
            ho.push_back(r.holder_constant);
            bv.push_back(r.bv_total);
        }
        const double slack = th.stability_slack;
        add_stable("energy_bound_stable", en, slack);
        add_stable("moment_bound_stable", mo, slack);
        add_stable("holder_constant_stable", ho, slack);
        add_stable("bv_pressure_stable", bv, slack);

        log("sweep: interpolation agreement");
        std::ostringstream ia;
        ia.precision(17);
        ia << "h,rho_tilde1,rho_tilde2,tilde1_tilde2,sup,constant\n";
        for (const auto& tr : first) {
            const InterpolationAgreement a = interpolation_agreement(tr, ot, cfg_.probes);
            ia << a.h << ',' << a.rho_tilde1 << ',' << a.rho_tilde2 << ',' << a.tilde1_tilde2 << ',' << a.sup << ','
               << a.constant << '\n';
            ic.push_back(a.constant);
        }
        out_.write("study/interpolation.csv", ia.str());
        add_stable("interpolation_constant_stable", ic, slack);

        json summary = analyze_run(runs.back(), "study/finest/");
        summary["sweep_h"] = hs;
        out_.write("summary.json", summary.dump(2) + "\n");
    }

    void assumptions() {
        const auto samples = geometric_samples(1e-8, 1e8, 4);
        json j;
        j["species"] = json::array();
        for (std::size_t s = 0; s < sc_.species.size(); ++s) {
            const SpeciesSpec& sp = sc_.species[s];
            const EnergyAssumptionReport er = check_energy_assumptions(sp.energy, samples);
            add("energy_assumptions_s" + std::to_string(s), static_cast<double>(er.violations.size()), 0.0,
                er.all_pass(), er.all_pass() ? "" : er.violations.front());
            std::vector<GridMeasure> probes = sc_.rho0;
            const Domain& d = sc_.domain;
            for (int k = 0; k < 3; ++k) {
                const double f = 0.15 * (k + 1);
                std::array<double, 2> c{d.lo[0] + (0.35 + f) * d.length(0),
                                        d.dim == 2 ? d.lo[1] + (0.65 - f) * d.length(1) : 0.0};
                probes.push_back(oracle_blob(d, c, 0.08 * d.length(0)));
            }
            json sj{{"energy",
                     {{"zero_at_origin", er.zero_at_origin},
                      {"strictly_convex", er.strictly_convex},
                      {"superlinear", er.superlinear},
                      {"pressure_bound", er.pressure_bound},
                      {"fitted_pressure_constant", er.fitted_pressure_constant},
                      {"violations", er.violations}}}};
            if (!sp.drift.is_zero()) {
                std::vector<GridMeasure> joint = probes;
                const DriftAssumptionReport dr = check_drift_assumptions(sp.drift, joint, sc_.scheme.ot);
                sj["drift"] = json::parse(dr.to_json());
                const bool finite = std::isfinite(dr.grad_v_sup) && std::isfinite(dr.semiconvexity) &&
                                    std::isfinite(dr.lipschitz_v) && std::isfinite(dr.lipschitz_w);
                add("drift_constants_finite_s" + std::to_string(s), finite ? 1.0 : 0.0, 1.0, finite, "");
                if (cfg_.scenario.growth_constant > 0.0)
                    add("w_growth_s" + std::to_string(s), dr.w_growth, cfg_.scenario.growth_constant,
                        dr.w_growth <= cfg_.scenario.growth_constant * (1.0 + 1e-6), "max |W| / (1 + |x|)");
            }
            const double h0 = h0_limit(sp.drift);
            sj["h0"] = std::isfinite(h0) ? json(h0) : json("inf");
            j["species"].push_back(sj);
        }
        j["h"] = cfg_.scenario.h;
        out_.write("assumptions.json", j.dump(2) + "\n");
    }

private:
    const RunConfig& cfg_;
    const RunOptions& opt_;
    OutputWriter& out_;
    Scenario sc_;

    static std::string num(double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    }

    static GridMeasure oracle_blob(const Domain& d, std::array<double, 2> c, double s) {
        return GridMeasure::from_function(d, [c, s](double x, double y) {
            const double r2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
            return std::exp(-r2 / (2.0 * s * s));
        });
    }

    void log(const std::string& s) const {
        if (opt_.quiet) return;
        if (opt_.log)
            opt_.log(s);
        else
            std::cerr << s << '\n';
    }

    void add(const std::string& name, double value, double threshold, bool pass, const std::string& detail) {
        checks.push_back({name, value, threshold, pass, detail});
    }

    void add_stable(const std::string& name, const std::vector<double>& c, double slack) {
        double worst = 0.0;
        for (std::size_t i = 1; i < c.size(); ++i)
            if (c[i - 1] > 0.0) worst = std::max(worst, c[i] / c[i - 1]);
        add(name, worst, slack, constants_stable(c, slack), "max ratio C_{h/2} / C_h");
    }

    std::vector<SchemeTrajectory> simulate(SchemeConfig c) const {
        if (sc_.species.size() == 1) return {run_scheme(sc_.rho0.front(), c)};
        SystemConfig sys{c, sc_.species};
        return run_scheme_system(sc_.rho0, sys);
    }

    void emit_trajectory(const SchemeTrajectory& tr, const std::string& dir) {
        std::ostringstream csv;
        csv << StepRecord::csv_header() << '\n';
        for (const auto& r : tr.records) csv << r.csv_row() << '\n';
        out_.write(dir + "diagnostics.csv", csv.str());
        const int N = tr.steps();
        for (int k = 0; k <= N; ++k) {
            const bool keep = k == 0 || k == N || (cfg_.snapshot_stride > 0 && k % cfg_.snapshot_stride == 0);
            if (keep) out_.write(dir + "snapshots/rho_" + padded(k) + ".txt", snapshot_text(tr.rho[k], k * tr.h));
        }
    }

    json analyze_run(const std::vector<SchemeTrajectory>& trajs, const std::string& prefix) {
        const CheckThresholds& th = cfg_.checks;
        const SchemeTrajectory& tr = trajs.front();
        json s{{"scenario", cfg_.scenario.name}, {"h", tr.h}, {"T", tr.T}, {"steps", tr.steps()}};
        int fallbacks = 0, unconverged = 0;
        double max_el = 0.0, step_drift = 0.0, total_drift = 0.0, max_gap = -HUGE_VAL;
        for (const auto& t : trajs)
            for (const auto& r : t.records) {
                fallbacks += r.fell_back;
                unconverged += !r.converged;
                max_el = std::max(max_el, r.el_residual);
                step_drift = std::max(step_drift, r.energy_drift);
                total_drift += r.energy_drift;
                max_gap = std::max(max_gap, r.gap);
            }
        s["fallbacks"] = fallbacks;
        s["unconverged_steps"] = unconverged;
        s["max_energy_drift"] = step_drift;
        s["sum_energy_drift"] = total_drift;
        if (!tr.transport_only) {
            s["max_el_residual"] = max_el;
            s["max_gap"] = max_gap;
        }
        const std::string tag = prefix.empty() ? "" : "finest_";
        if (tr.transport_only) {
            if (th.energy_step > 0.0)
                add(tag + "energy_drift_step", step_drift, th.energy_step, step_drift <= th.energy_step, "");
            if (th.energy_total > 0.0)
                add(tag + "energy_drift_total", total_drift, th.energy_total, total_drift <= th.energy_total, "");
        } else if (th.el_residual > 0.0) {
            add(tag + "el_residual", max_el, th.el_residual, max_el <= th.el_residual, "");
        }

        if (trajs.size() == 1 && !tr.transport_only) {
            const Domain& d = sc_.domain;
            const auto basis = TestFunctionBasis::standard(d, tr.T, cfg_.test_functions);
            log("weak form: " + std::to_string(basis.functions.size()) + " test functions");
            const auto wr = weak_residual(tr, basis, sc_.species.front().energy, sc_.species.front().drift);
            json arr = json::array();
            double worst = 0.0, worst_ratio = 0.0, worst_cont = 0.0;
            bool available = true;
            for (const auto& w : wr) {
                arr.push_back(json::parse(w.to_json()));
                available = available && w.identity_available;
                worst_cont = std::max(worst_cont, std::abs(w.continuum));
                if (!w.identity_available) continue;
                worst = std::max(worst, std::abs(w.imbalance));
                if (w.remainder_bound > 0.0) worst_ratio = std::max(worst_ratio, std::abs(w.remainder) / w.remainder_bound);
            }
            out_.write(prefix + "weak_form.json", arr.dump(2) + "\n");
            s["max_continuum_residual"] = worst_cont;
            if (available) {
                s["max_identity_imbalance"] = worst;
                if (th.imbalance > 0.0)
                    add(tag + "weak_identity_imbalance", worst, th.imbalance, worst <= th.imbalance, "");
                add(tag + "remainder_within_bound", worst_ratio, 1.0, worst_ratio <= 1.0,
                    "max |remainder| / (1/2 |D^2 phi| sum W2^2)");
            }
            const BVPressureReport bv = bv_pressure_report(tr, sc_.species.front().energy);
            out_.write(prefix + "bv_pressure.json", json::parse(bv.to_json()).dump(2) + "\n");
        }
        if (sc_.reference) {
            // every step in 1D; evenly spread probes otherwise (each is an entropic solve)
            const int N = tr.steps();
            const int count = sc_.domain.dim == 1 ? N : std::min(N, std::max(cfg_.probes, cfg_.max_times));
            double sup = 0.0;
            for (int j = 1; j <= count; ++j) {
                const int k = static_cast<int>(std::llround(static_cast<double>(j) * N / count));
                sup = std::max(sup, std::sqrt(std::max(0.0, w2_squared(tr.rho[k], sc_.reference(k * tr.h),
                                                                       sc_.scheme.ot))));
            }
            s["reference"] = sc_.reference_name;
            s["sup_w2_error"] = sup;
        }
        return s;
    }

    void transport_bound_study() {
        log("sweep: per-step transport bound");
        const GridMeasure& rho = sc_.rho0.front();
        const VectorField W = decompose(evaluate_drift(sc_.species.front().drift, rho)).W;
        std::vector<TransportBoundRecord> recs;
        std::ostringstream csv;
        csv.precision(17);
        csv << "h,w2sq,bound,ratio,within\n";
        std::vector<double> hs = cfg_.scenario.h_list;
        std::sort(hs.begin(), hs.end());
        for (double h : hs) {
            const GridMeasure t = transport_step(rho, W, h, sc_.scheme.transport);
            recs.push_back(transport_distance_bound(rho, t, h, cfg_.scenario.growth_constant, sc_.scheme.ot));
            const auto& r = recs.back();
            csv << r.h << ',' << r.w2sq << ',' << r.bound << ',' << r.ratio << ',' << r.within << '\n';
        }
        out_.write("study/transport_bound.csv", csv.str());
        const TransportExponentCheck ex = transport_exponent(recs);
        json j{{"fit", json::parse(ex.fit.to_json())},
               {"fitted_constant", ex.fitted_constant},
               {"exponent_ok", ex.exponent_ok},
               {"decade_covered", ex.decade_covered}};
        out_.write("study/transport_bound.json", j.dump(2) + "\n");
        const CheckThresholds& th = cfg_.checks;
        add("transport_exponent", ex.fit.slope, 2.0,
            std::abs(ex.fit.slope - 2.0) <= th.transport_slope_tol && ex.fit.r2 >= th.transport_r2_min &&
                ex.decade_covered,
            "R2 " + num(ex.fit.r2) + ", " + std::to_string(ex.fit.samples) + " samples");
        if (cfg_.scenario.growth_constant > 0.0) {
            const bool all = std::all_of(recs.begin(), recs.end(), [](const auto& r) { return r.within; });
            add("transport_bound_holds", all ? 1.0 : 0.0, 1.0, all, "W2^2 <= 2 C_W^2 h^2 (1 + M)");
        }
    }
};

}  // namespace

RunOutcome run(const RunConfig& cfg, const RunOptions& opt) {
    RunOutcome res;
    const StudyMode mode = opt.mode.value_or(cfg.mode);
    res.output_dir = opt.output_dir.value_or(cfg.output_dir);
    OutputWriter out(res.output_dir);
    json manifest;
    json config = cfg.resolved;
    config["study.mode"] = to_string(mode);
    config["output.dir"] = res.output_dir;
    manifest["config"] = config;
    manifest["mode"] = to_string(mode);
    try {
        Study st(cfg, opt, out);
        switch (mode) {
            case StudyMode::single: st.single(); break;
            case StudyMode::sweep: st.sweep(); break;
            case StudyMode::assumptions: st.assumptions(); break;
        }
        res.checks = st.checks;
        const bool ok = std::all_of(res.checks.begin(), res.checks.end(), [](const auto& c) { return c.pass; });
        res.exit_code = ok ? exit_pass : exit_diagnostic_fail;
    } catch (const std::exception& e) {
        res.exit_code = exit_code_for(e);
        res.failure = e.what();
        out.write("failure.json", json::parse(failure_json(res.exit_code, e)).dump(2) + "\n");
    }
    json checks = json::array();
    for (const auto& c : res.checks) checks.push_back(check_json(c));
    out.write("checks.json", checks.dump(2) + "\n");
    manifest["status"] = res.exit_code == exit_pass              ? "pass"
                         : res.exit_code == exit_diagnostic_fail ? "diagnostic-fail"
                         : res.exit_code == exit_config_error    ? "config-error"
                                                                 : "solver-failure";
    manifest["exit_code"] = res.exit_code;
    manifest["checks"] = checks;
    json files = json::array();
    for (const auto& f : out.files()) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    manifest["files"] = files;
    res.files = out.files();
    // the manifest lists everything but itself
    {
        const std::string text = manifest.dump(2) + "\n";
        std::ofstream m(fs::path(res.output_dir) / "manifest.json", std::ios::binary);
        m << text;
        if (!m) fail(ErrorKind::io, "cannot write manifest.json");
    }
    return res;
}

}  // namespace sjko
