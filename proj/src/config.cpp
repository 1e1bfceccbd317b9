#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "sjko/config.hpp"
#include "sjko/error.hpp"

namespace sjko {

std::string to_string(StudyMode m) {
    switch (m) {
        case StudyMode::single: return "single";
        case StudyMode::sweep: return "sweep";
        case StudyMode::assumptions: return "assumptions";
    }
    return "unknown";
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

struct Entry {
    std::string section, key, value;
    int line = 0;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string suggestion(const std::string& word, const std::vector<std::string>& known) {
    std::string best;
    std::size_t bd = std::string::npos;
    for (const auto& k : known) {
        const std::size_t d = edit_distance(word, k);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    if (best.empty() || bd > std::max<std::size_t>(2, word.size() / 3)) return "";
    return " (did you mean '" + best + "'?)";
}

class Reader {
public:
    Reader(const std::string& src, const Entry& e) : src_(src), e_(e) {}

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorKind::config, src_ + ":" + std::to_string(e_.line) + ": " + name() + ": " + what);
    }
    std::string name() const { return e_.section + "." + e_.key; }

    double number() const {
        double v = 0.0;
        const std::string& s = e_.value;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
            error("expected a number, got '" + s + "'");
        return v;
    }
    double positive() const {
        const double v = number();
        if (!(v > 0.0)) error("must be positive, got " + e_.value);
        return v;
    }
    int integer(int min) const {
        int v = 0;
        const std::string& s = e_.value;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size()) error("expected an integer, got '" + s + "'");
        if (v < min) error("must be at least " + std::to_string(min));
        return v;
    }
    bool boolean() const {
        const std::string& s = e_.value;
        if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
        if (s == "false" || s == "no" || s == "0" || s == "off") return false;
        error("expected true or false, got '" + s + "'");
    }
    std::string choice(const std::vector<std::string>& allowed) const {
        if (std::find(allowed.begin(), allowed.end(), e_.value) != allowed.end()) return e_.value;
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        error("unknown value '" + e_.value + "' (" + list + ")" + suggestion(e_.value, allowed));
    }
    std::vector<double> numbers() const {
        std::vector<double> out;
        std::stringstream ss(e_.value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            double v = 0.0;
            const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size() || !(v > 0.0))
                error("expected a comma-separated list of positive numbers, got '" + e_.value + "'");
            out.push_back(v);
        }
        if (out.empty()) error("empty list");
        return out;
    }
    const std::string& raw() const { return e_.value; }

private:
    const std::string& src_;
    const Entry& e_;
};

template <class Target>
using Setter = std::function<void(Target&, const Reader&)>;

template <class Target>
using Table = std::vector<std::pair<std::string, Setter<Target>>>;

const Table<ScenarioParams>& domain_keys() {
    static const Table<ScenarioParams> t{
        {"dim", [](ScenarioParams& p, const Reader& r) { p.dim = r.integer(1); }},
        {"x0", [](ScenarioParams& p, const Reader& r) { p.lo[0] = r.number(); }},
        {"x1", [](ScenarioParams& p, const Reader& r) { p.hi[0] = r.number(); }},
        {"y0", [](ScenarioParams& p, const Reader& r) { p.lo[1] = r.number(); }},
        {"y1", [](ScenarioParams& p, const Reader& r) { p.hi[1] = r.number(); }},
        {"nx", [](ScenarioParams& p, const Reader& r) { p.cells[0] = r.integer(2); }},
        {"ny", [](ScenarioParams& p, const Reader& r) { p.cells[1] = r.integer(2); }},
        {"boundary",
         [](ScenarioParams& p, const Reader& r) {
             p.boundary = r.choice({"noflux", "periodic"}) == "noflux" ? Boundary::noflux : Boundary::periodic;
         }},
    };
    return t;
}

const Table<ScenarioParams>& time_keys() {
    static const Table<ScenarioParams> t{
        {"h", [](ScenarioParams& p, const Reader& r) { p.h = r.positive(); }},
        {"T", [](ScenarioParams& p, const Reader& r) { p.T = r.positive(); }},
        {"transport_only", [](ScenarioParams& p, const Reader& r) { p.transport_only = r.boolean(); }},
    };
    return t;
}

const Table<ScenarioParams>& jko_keys() {
    static const Table<ScenarioParams> t{
        {"backend",
         [](ScenarioParams& p, const Reader& r) {
             const std::string b = r.choice({"automatic", "quantile", "entropic"});
             p.jko.backend = b == "automatic" ? JKOBackend::automatic
                             : b == "quantile" ? JKOBackend::quantile_1d
                                               : JKOBackend::entropic_prox;
         }},
        {"tol", [](ScenarioParams& p, const Reader& r) { p.jko.tol = r.positive(); }},
        {"max_iters", [](ScenarioParams& p, const Reader& r) { p.jko.max_iters = r.integer(1); }},
        {"epsilon", [](ScenarioParams& p, const Reader& r) { p.jko.entropic.epsilon = r.positive(); }},
        {"bias_correction", [](ScenarioParams& p, const Reader& r) { p.jko.bias_correction = r.boolean(); }},
        {"fallback_slack",
         [](ScenarioParams& p, const Reader& r) {
             p.jko.fallback_slack = r.number();
             if (p.jko.fallback_slack < 0.0) r.error("must be nonnegative");
         }},
        {"over_relaxation",
         [](ScenarioParams& p, const Reader& r) {
             const double w = r.number();
             if (!(w >= 1.0 && w < 2.0)) r.error("must lie in [1, 2)");
             p.jko.entropic.over_relaxation = w;
         }},
    };
    return t;
}

const Table<ScenarioParams>& transport_keys() {
    static const Table<ScenarioParams> t{
        {"density",
         [](ScenarioParams& p, const Reader& r) {
             p.transport.density =
                 r.choice({"cubic", "quintic"}) == "cubic" ? DensityInterpolation::cubic : DensityInterpolation::quintic;
         }},
        {"velocity",
         [](ScenarioParams& p, const Reader& r) {
             p.transport.velocity = r.choice({"bilinear", "bicubic"}) == "bilinear" ? VelocityInterpolation::bilinear
                                                                                      : VelocityInterpolation::bicubic;
         }},
        {"cfl", [](ScenarioParams& p, const Reader& r) { p.transport.cfl = r.positive(); }},
        {"growth_constant",
         [](ScenarioParams& p, const Reader& r) {
             p.growth_constant = r.number();
             if (p.growth_constant < 0.0) r.error("must be nonnegative");
         }},
    };
    return t;
}

const Table<ScenarioParams>& ot_keys() {
    static const Table<ScenarioParams> t{
        {"epsilon", [](ScenarioParams& p, const Reader& r) { p.ot_epsilon = r.positive(); }},
    };
    return t;
}

const Table<SpeciesParams>& energy_keys() {
    static const Table<SpeciesParams> t{
        {"kind", [](SpeciesParams& s, const Reader& r) { s.energy.kind = r.choice({"entropy", "power"}); }},
        {"m",
         [](SpeciesParams& s, const Reader& r) {
             s.energy.m = r.number();
             if (!(s.energy.m > 1.0)) r.error("must exceed 1");
         }},
        {"nu", [](SpeciesParams& s, const Reader& r) { s.energy.nu = r.positive(); }},
    };
    return t;
}

const Table<SpeciesParams>& initial_keys() {
    static const Table<SpeciesParams> t{
        {"kind",
         [](SpeciesParams& s, const Reader& r) {
             s.initial.kind = r.choice({"gaussian", "barenblatt", "stationary", "uniform"});
         }},
        {"cx", [](SpeciesParams& s, const Reader& r) { s.initial.center[0] = r.number(); }},
        {"cy", [](SpeciesParams& s, const Reader& r) { s.initial.center[1] = r.number(); }},
        {"sigma", [](SpeciesParams& s, const Reader& r) { s.initial.sigma = r.positive(); }},
        {"t0", [](SpeciesParams& s, const Reader& r) { s.initial.t0 = r.positive(); }},
    };
    return t;
}

const Table<DriftParams>& drift_keys() {
    static const Table<DriftParams> t{
        {"kind",
         [](DriftParams& d, const Reader& r) {
             d.kind = r.choice({"zero", "interaction", "hamiltonian", "rotation", "confinement"});
         }},
        {"shape", [](DriftParams& d, const Reader& r) { d.shape = r.choice({"quadratic", "gaussian"}); }},
        {"strength", [](DriftParams& d, const Reader& r) { d.strength = r.number(); }},
        {"width", [](DriftParams& d, const Reader& r) { d.width = r.positive(); }},
        {"cx", [](DriftParams& d, const Reader& r) { d.center[0] = r.number(); }},
        {"cy", [](DriftParams& d, const Reader& r) { d.center[1] = r.number(); }},
        {"source", [](DriftParams& d, const Reader& r) { d.source = r.integer(0); }},
    };
    return t;
}

const Table<RunConfig>& study_keys() {
    static const Table<RunConfig> t{
        {"mode",
         [](RunConfig& c, const Reader& r) {
             const std::string m = r.choice({"single", "sweep", "assumptions"});
             c.mode = m == "single" ? StudyMode::single : m == "sweep" ? StudyMode::sweep : StudyMode::assumptions;
         }},
        {"h_list", [](RunConfig& c, const Reader& r) { c.scenario.h_list = r.numbers(); }},
        {"workers", [](RunConfig& c, const Reader& r) { c.workers = r.integer(1); }},
        {"probes", [](RunConfig& c, const Reader& r) { c.probes = r.integer(1); }},
        {"max_times", [](RunConfig& c, const Reader& r) { c.max_times = r.integer(0); }},
        {"test_functions", [](RunConfig& c, const Reader& r) { c.test_functions = r.integer(1); }},
    };
    return t;
}

const Table<RunConfig>& output_keys() {
    static const Table<RunConfig> t{
        {"dir", [](RunConfig& c, const Reader& r) { c.output_dir = r.raw(); }},
        {"snapshot_stride", [](RunConfig& c, const Reader& r) { c.snapshot_stride = r.integer(0); }},
        {"record_w2", [](RunConfig& c, const Reader& r) { c.scenario.record_w2 = r.boolean(); }},
    };
    return t;
}

const Table<CheckThresholds>& check_keys() {
    static const Table<CheckThresholds> t{
        {"energy_step", [](CheckThresholds& c, const Reader& r) { c.energy_step = r.number(); }},
        {"energy_total", [](CheckThresholds& c, const Reader& r) { c.energy_total = r.number(); }},
        {"el_residual", [](CheckThresholds& c, const Reader& r) { c.el_residual = r.number(); }},
        {"imbalance", [](CheckThresholds& c, const Reader& r) { c.imbalance = r.number(); }},
        {"order_min", [](CheckThresholds& c, const Reader& r) { c.order_min = r.number(); }},
        {"order_r2_min", [](CheckThresholds& c, const Reader& r) { c.order_r2_min = r.number(); }},
        {"telescoping_min", [](CheckThresholds& c, const Reader& r) { c.telescoping_min = r.number(); }},
        {"transport_slope_tol", [](CheckThresholds& c, const Reader& r) { c.transport_slope_tol = r.number(); }},
        {"r2_min", [](CheckThresholds& c, const Reader& r) { c.r2_min = r.number(); }},
        {"transport_r2_min", [](CheckThresholds& c, const Reader& r) { c.transport_r2_min = r.number(); }},
        {"stability_slack", [](CheckThresholds& c, const Reader& r) { c.stability_slack = r.positive(); }},
    };
    return t;
}

template <class Target>
void apply(const Table<Target>& table, Target& target, const Entry& e, const std::string& src) {
    const Reader r(src, e);
    std::vector<std::string> names;
    for (const auto& [k, set] : table) {
        if (k == e.key) {
            set(target, r);
            return;
        }
        names.push_back(k);
    }
    fail(ErrorKind::config, src + ":" + std::to_string(e.line) + ": unknown key '" + e.key + "' in [" + e.section +
                                "]" + suggestion(e.key, names));
}

// [energy], [species.1.drift.2] -> (species, base, drift index)
struct SectionName {
    int species = 0;
    std::string base;
    int drift = 0;
};

bool parse_index(const std::string& s, int& out) {
    const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size() && out >= 0 && out < 64;
}

const std::vector<std::string>& section_names() {
    static const std::vector<std::string> s{"scenario", "domain", "time",   "energy", "initial", "drift",
                                            "jko",      "transport", "ot", "study",  "output",  "checks"};
    return s;
}

SectionName split_section(const std::string& name, const std::string& src, int line) {
    std::vector<std::string> parts;
    std::stringstream ss(name);
    std::string tok;
    while (std::getline(ss, tok, '.')) parts.push_back(tok);
    SectionName out;
    std::size_t i = 0;
    auto bad = [&]() -> SectionName {
        fail(ErrorKind::config, src + ":" + std::to_string(line) + ": unknown section [" + name + "]" +
                                    suggestion(name, section_names()));
    };
    if (parts.size() >= 2 && parts[0] == "species") {
        if (!parse_index(parts[1], out.species)) return bad();
        i = 2;
        if (parts.size() <= i) return bad();
    }
    out.base = parts[i];
    const bool per_species = out.base == "energy" || out.base == "initial" || out.base == "drift";
    if (i == 2 && !per_species) return bad();
    if (parts.size() == i + 2 && out.base == "drift") {
        if (!parse_index(parts[i + 1], out.drift)) return bad();
    } else if (parts.size() != i + 1) {
        return bad();
    }
    if (std::find(section_names().begin(), section_names().end(), out.base) == section_names().end()) return bad();
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::map<std::string, std::string> resolve(const RunConfig& c) {
    std::map<std::string, std::string> m;
    const ScenarioParams& p = c.scenario;
    m["scenario.name"] = p.name;
    m["domain.dim"] = std::to_string(p.dim);
    m["domain.x0"] = num(p.lo[0]);
    m["domain.x1"] = num(p.hi[0]);
    m["domain.nx"] = std::to_string(p.cells[0]);
    if (p.dim == 2) {
        m["domain.y0"] = num(p.lo[1]);
        m["domain.y1"] = num(p.hi[1]);
        m["domain.ny"] = std::to_string(p.cells[1]);
    }
    m["domain.boundary"] = to_string(p.boundary);
    m["time.h"] = num(p.h);
    m["time.T"] = num(p.T);
    m["time.transport_only"] = p.transport_only ? "true" : "false";
    for (std::size_t s = 0; s < p.species.size(); ++s) {
        const SpeciesParams& sp = p.species[s];
        const std::string pre = s == 0 ? "" : "species." + std::to_string(s) + ".";
        m[pre + "energy.kind"] = sp.energy.kind;
        m[pre + "energy.m"] = num(sp.energy.m);
        m[pre + "energy.nu"] = num(sp.energy.nu);
        m[pre + "initial.kind"] = sp.initial.kind;
        m[pre + "initial.cx"] = num(sp.initial.center[0]);
        m[pre + "initial.cy"] = num(sp.initial.center[1]);
        m[pre + "initial.sigma"] = num(sp.initial.sigma);
        m[pre + "initial.t0"] = num(sp.initial.t0);
        for (std::size_t k = 0; k < sp.drift.size(); ++k) {
            const DriftParams& d = sp.drift[k];
            const std::string dp = pre + (k == 0 ? "drift." : "drift." + std::to_string(k) + ".");
            m[dp + "kind"] = d.kind;
            m[dp + "shape"] = d.shape;
            m[dp + "strength"] = num(d.strength);
            m[dp + "width"] = num(d.width);
            m[dp + "cx"] = num(d.center[0]);
            m[dp + "cy"] = num(d.center[1]);
            m[dp + "source"] = std::to_string(d.source);
        }
    }
    m["jko.backend"] = to_string(p.jko.backend);
    m["jko.tol"] = num(p.jko.tol);
    m["jko.max_iters"] = std::to_string(p.jko.max_iters);
    m["jko.epsilon"] = num(p.jko.entropic.epsilon);
    m["jko.bias_correction"] = p.jko.bias_correction ? "true" : "false";
    m["jko.fallback_slack"] = num(p.jko.fallback_slack);
    m["jko.over_relaxation"] = num(p.jko.entropic.over_relaxation);
    m["jko.h0"] = num(p.jko.h0);
    m["transport.density"] = p.transport.density == DensityInterpolation::cubic ? "cubic" : "quintic";
    m["transport.velocity"] = p.transport.velocity == VelocityInterpolation::bilinear ? "bilinear" : "bicubic";
    m["transport.cfl"] = num(p.transport.cfl);
    m["transport.growth_constant"] = num(p.growth_constant);
    m["ot.epsilon"] = num(p.ot_epsilon);
    std::string hl;
    for (double h : p.h_list) hl += (hl.empty() ? "" : ", ") + num(h);
    m["study.h_list"] = hl;
    m["study.mode"] = to_string(c.mode);
    m["study.workers"] = std::to_string(c.workers);
    m["study.probes"] = std::to_string(c.probes);
    m["study.max_times"] = std::to_string(c.max_times);
    m["study.test_functions"] = std::to_string(c.test_functions);
    m["output.dir"] = c.output_dir;
    m["output.snapshot_stride"] = std::to_string(c.snapshot_stride);
    m["output.record_w2"] = p.record_w2 ? "true" : "false";
    const CheckThresholds& k = c.checks;
    m["checks.energy_step"] = num(k.energy_step);
    m["checks.energy_total"] = num(k.energy_total);
    m["checks.el_residual"] = num(k.el_residual);
    m["checks.imbalance"] = num(k.imbalance);
    m["checks.order_min"] = num(k.order_min);
    m["checks.order_r2_min"] = num(k.order_r2_min);
    m["checks.telescoping_min"] = num(k.telescoping_min);
    m["checks.transport_slope_tol"] = num(k.transport_slope_tol);
    m["checks.r2_min"] = num(k.r2_min);
    m["checks.transport_r2_min"] = num(k.transport_r2_min);
    m["checks.stability_slack"] = num(k.stability_slack);
    return m;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& src) {
    std::vector<Entry> entries;
    std::string section, line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto c = line.find_first_of("#;");
        if (c != std::string::npos) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                fail(ErrorKind::config, src + ":" + std::to_string(no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            split_section(section, src, no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::config, src + ":" + std::to_string(no) + ": expected 'key = value', got '" + line + "'");
        if (section.empty())
            fail(ErrorKind::config, src + ":" + std::to_string(no) + ": key outside of any [section]");
        Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), no};
        if (e.key.empty()) fail(ErrorKind::config, src + ":" + std::to_string(no) + ": empty key");
        for (const auto& prev : entries)
            if (prev.section == e.section && prev.key == e.key)
                fail(ErrorKind::config, src + ":" + std::to_string(no) + ": duplicate key " + e.section + "." + e.key +
                                            " (first set on line " + std::to_string(prev.line) + ")");
        entries.push_back(std::move(e));
    }

    RunConfig cfg;
    std::string name = "custom";
    for (const auto& e : entries)
        if (e.section == "scenario") {
            if (e.key != "name")
                fail(ErrorKind::config, src + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                                            "' in [scenario]" + suggestion(e.key, {"name"}));
            name = e.value;
        }
    try {
        cfg.scenario = preset(name);
    } catch (const Error& err) {
        int at = 0;
        for (const auto& e : entries)
            if (e.section == "scenario") at = e.line;
        fail(ErrorKind::config, src + ":" + std::to_string(at) + ": " + err.what());
    }

    // the porous oracle saturates at the grid floor; only a positive order is asked of it
    if (name == "porous-medium") {
        cfg.checks.order_min = 1e-12;
        cfg.checks.order_r2_min = 0.0;
    }

    ScenarioParams& p = cfg.scenario;
    std::vector<char> drift_reset(64, 0);
    for (const auto& e : entries) {
        const SectionName sn = split_section(e.section, src, e.line);
        if (sn.base == "scenario") continue;
        if (sn.base == "energy" || sn.base == "initial" || sn.base == "drift") {
            if (static_cast<std::size_t>(sn.species) >= p.species.size()) p.species.resize(sn.species + 1);
            SpeciesParams& sp = p.species[sn.species];
            if (sn.base == "energy") {
                apply(energy_keys(), sp, e, src);
            } else if (sn.base == "initial") {
                apply(initial_keys(), sp, e, src);
            } else {
                // a config that names any drift section replaces the preset's terms
                if (!drift_reset[sn.species]) {
                    sp.drift.clear();
                    drift_reset[sn.species] = 1;
                }
                if (static_cast<std::size_t>(sn.drift) >= sp.drift.size()) sp.drift.resize(sn.drift + 1);
                apply(drift_keys(), sp.drift[sn.drift], e, src);
            }
        } else if (sn.base == "domain") {
            apply(domain_keys(), p, e, src);
        } else if (sn.base == "time") {
            apply(time_keys(), p, e, src);
        } else if (sn.base == "jko") {
            apply(jko_keys(), p, e, src);
        } else if (sn.base == "transport") {
            apply(transport_keys(), p, e, src);
        } else if (sn.base == "ot") {
            apply(ot_keys(), p, e, src);
        } else if (sn.base == "study") {
            apply(study_keys(), cfg, e, src);
        } else if (sn.base == "output") {
            apply(output_keys(), cfg, e, src);
        } else if (sn.base == "checks") {
            apply(check_keys(), cfg.checks, e, src);
        }
    }

    // semantic checks that need the whole picture
    auto line_of = [&](const std::string& sec, const std::string& key) {
        for (const auto& e : entries)
            if (e.section == sec && e.key == key) return e.line;
        return 0;
    };
    auto semantic = [&](const std::string& sec, const std::string& key, const std::string& what) {
        fail(ErrorKind::config, src + ":" + std::to_string(line_of(sec, key)) + ": " + sec + "." + key + ": " + what);
    };
    if (p.dim != 1 && p.dim != 2) semantic("domain", "dim", "must be 1 or 2");
    if (!(p.hi[0] > p.lo[0])) semantic("domain", "x1", "must exceed domain.x0");
    if (p.dim == 2 && !(p.hi[1] > p.lo[1])) semantic("domain", "y1", "must exceed domain.y0");
    for (std::size_t s = 0; s < p.species.size(); ++s)
        for (const auto& d : p.species[s].drift)
            if (d.source >= static_cast<int>(p.species.size()))
                semantic("drift", "source", "species " + std::to_string(d.source) + " does not exist");
    if (p.transport_only && p.species.size() != 1) semantic("time", "transport_only", "needs a single species");
    for (const auto& sp : p.species)
        for (const auto& d : sp.drift)
            if (d.kind == "hamiltonian" && p.dim != 2) semantic("drift", "kind", "hamiltonian drift needs domain.dim = 2");

    // the h0 guard
    if (!p.transport_only) {
        double h0 = p.jko.h0;
        for (const auto& sp : p.species) {
            DriftModel m = DriftModel::zero();
            for (const auto& d : sp.drift) m.add(d.build());
            h0 = std::min(h0, h0_limit(m));
        }
        p.jko.h0 = h0;
        if (!(p.h < h0)) semantic("time", "h", "must be below h0 = " + num(h0));
        for (double h : p.h_list)
            if (!(h < h0)) semantic("study", "h_list", "entry " + num(h) + " is not below h0 = " + num(h0));
    }
    if (cfg.mode == StudyMode::sweep && p.h_list.size() < 3 && !p.transport_only)
        semantic("study", "h_list", "a sweep needs at least 3 values of h");
    cfg.resolved = resolve(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
    return parse_config(in, path);
}

}  // namespace sjko
