#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "sjko/config.hpp"
#include "sjko/error.hpp"
#include "sjko/run.hpp"

using namespace sjko;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.ini");
}

std::string config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    FAIL("expected a config error");
    return "";
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("sjko_test_config_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunOutcome quiet_run(const RunConfig& cfg, const fs::path& out) {
    RunOptions o;
    o.output_dir = out.string();
    o.quiet = true;
    o.log = [](const std::string&) {};
    return run(cfg, o);
}

int cli(const std::string& args) {
    const std::string cmd = std::string(SJKO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kSmallHeat = R"(
[scenario]
name = heat
[domain]
nx = 64
[time]
h = 0.01
T = 0.05
)";

}  // namespace

TEST_CASE("a minimal file gets the preset defaults") {
    const RunConfig c = parse("[scenario]\nname = heat\n");
    CHECK(c.scenario.name == "heat");
    CHECK(c.scenario.dim == 1);
    CHECK(c.scenario.cells[0] == 256);
    CHECK(c.scenario.T == 0.25);
    CHECK(c.scenario.h_list == std::vector<double>{4e-3, 2e-3, 1e-3});
    CHECK(c.mode == StudyMode::single);
    CHECK(c.resolved.at("time.h") == "0.001");
    CHECK(c.resolved.at("energy.kind") == "entropy");
    // no drift, so no step limit
    CHECK(std::isinf(c.scenario.jko.h0));
}

TEST_CASE("comments, sections and overrides") {
    const RunConfig c = parse(R"(
# a comment
[scenario]
name = porous-medium   ; trailing comment
[domain]
nx = 128
[energy]
m = 3
[study]
mode = sweep
h_list = 8e-3, 4e-3, 2e-3
)");
    CHECK(c.scenario.cells[0] == 128);
    CHECK(c.scenario.species[0].energy.kind == "power");
    CHECK(c.scenario.species[0].energy.m == 3.0);
    CHECK(c.mode == StudyMode::sweep);
    CHECK(c.scenario.h_list.size() == 3);
}

TEST_CASE("bad values name the key") {
    CHECK(config_error("[scenario]\nname = heat\n[time]\nh = -1\n").find("time.h") != std::string::npos);
    CHECK(config_error("[scenario]\nname = heat\n[time]\nh = abc\n").find("test.ini:4") != std::string::npos);
    CHECK(config_error("[scenario]\nname = heat\n[energy]\nm = 0.5\n").find("must exceed 1") != std::string::npos);
    CHECK(config_error("[scenario]\nname = nope\n").find("heat") != std::string::npos);
    CHECK(config_error("[scenario]\nname = heat\n[domain]\nx0 = 1\nx1 = 0\n").find("domain.x1") != std::string::npos);
    CHECK(config_error("[scenario]\nname = heat\n[study]\nmode = sweep\nh_list = 1e-3, 2e-3\n").find("at least 3") !=
          std::string::npos);
}

TEST_CASE("unknown keys and sections get suggestions") {
    CHECK(config_error("[jko]\nepsilonn = 0.1\n").find("did you mean 'epsilon'") != std::string::npos);
    CHECK(config_error("[domian]\nnx = 3\n").find("did you mean 'domain'") != std::string::npos);
    CHECK(config_error("key = 1\n").find("outside of any") != std::string::npos);
}

TEST_CASE("duplicate keys are rejected") {
    const std::string m = config_error("[time]\nh = 0.01\nh = 0.02\n");
    CHECK(m.find("duplicate key time.h") != std::string::npos);
    CHECK(m.find("line 2") != std::string::npos);
}

TEST_CASE("the step guard") {
    // gaussian attraction of width 1 and strength 2 is semiconvex with 4 e^{-3/2}; h0 = 1 / (2 * that)
    const std::string base = "[scenario]\nname = heat\n[drift]\nkind = interaction\nshape = gaussian\nstrength = 2\n";
    const RunConfig ok = parse(base + "[time]\nh = 0.5\n");
    CHECK(ok.scenario.jko.h0 == doctest::Approx(1.0 / (8 * std::exp(-1.5))));
    CHECK(config_error(base + "[time]\nh = 2.5\n").find("below h0") != std::string::npos);
    // transport-only runs take no JKO step
    CHECK_NOTHROW(parse(base + "[time]\nh = 2.5\ntransport_only = true\n"));
}

TEST_CASE("runs are deterministic and the manifest hashes every file") {
    const RunConfig c = parse(kSmallHeat);
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunOutcome ra = quiet_run(c, a), rb = quiet_run(c, b);
    CHECK(ra.exit_code == exit_pass);
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        CHECK(ra.files[i].path == rb.files[i].path);
        CHECK(ra.files[i].sha256 == rb.files[i].sha256);
    }

    const json m = json::parse(slurp(a / "manifest.json"));
    CHECK(m["status"] == "pass");
    CHECK(m["exit_code"] == 0);
    CHECK(m["config"]["domain.nx"] == "64");
    REQUIRE(!m["files"].empty());
    for (const auto& f : m["files"]) {
        const std::string body = slurp(a / f["path"].get<std::string>());
        CHECK(f["sha256"] == sha256_hex(body));
        CHECK(f["bytes"] == body.size());
    }
    CHECK(fs::exists(a / "species0" / "diagnostics.csv"));
    CHECK(fs::exists(a / "summary.json"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("decoupled species match single runs byte for byte") {
    const std::string grid = "[domain]\nnx = 96\n[time]\nh = 0.01\nT = 0.05\n";
    const RunConfig sys = parse("[scenario]\nname = two-species\n" + grid +
                                "[drift]\nkind = interaction\nshape = gaussian\nstrength = 0.5\nsource = 0\n"
                                "[species.1.drift]\nkind = interaction\nshape = gaussian\nstrength = 0.5\nsource = 1\n"
                                "[initial]\ncx = -1\n[species.1.initial]\ncx = 1\n");
    const std::string one = "[scenario]\nname = heat\n" + grid +
                            "[drift]\nkind = interaction\nshape = gaussian\nstrength = 0.5\n";
    const RunConfig a = parse(one + "[initial]\ncx = -1\n"), b = parse(one + "[initial]\ncx = 1\n");
    const fs::path ps = scratch("sys"), pa = scratch("sys_a"), pb = scratch("sys_b");
    REQUIRE(quiet_run(sys, ps).exit_code <= exit_diagnostic_fail);
    REQUIRE(quiet_run(a, pa).exit_code <= exit_diagnostic_fail);
    REQUIRE(quiet_run(b, pb).exit_code <= exit_diagnostic_fail);
    for (const std::string f : {"diagnostics.csv", "snapshots/rho_00000.txt", "snapshots/rho_00005.txt"}) {
        CHECK(slurp(ps / "species0" / f) == slurp(pa / "species0" / f));
        CHECK(slurp(ps / "species1" / f) == slurp(pb / "species0" / f));
    }
    fs::remove_all(ps);
    fs::remove_all(pa);
    fs::remove_all(pb);
}

TEST_CASE("transport-only rotation reports the energy drift per step") {
    const RunConfig c = parse(R"(
[scenario]
name = rotation-transport
[domain]
nx = 48
ny = 48
[time]
T = 0.05
[output]
record_w2 = false
)");
    CHECK(c.scenario.transport_only);
    const fs::path p = scratch("rot");
    const RunOutcome r = quiet_run(c, p);
    std::istringstream csv(slurp(p / "species0" / "diagnostics.csv"));
    std::string header, row;
    std::getline(csv, header);
    CHECK(header.find("energy_drift") != std::string::npos);
    int rows = 0;
    while (std::getline(csv, row)) ++rows;
    CHECK(rows == 5);
    bool listed = false;
    for (const auto& ch : r.checks) listed = listed || ch.name.find("energy_drift_step") != std::string::npos;
    CHECK(listed);
    fs::remove_all(p);
}

TEST_CASE("cli exit codes") {
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    auto file = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    };
    const std::string out = " --out " + (dir / "out").string();
    CHECK(cli("run " + file("ok.ini", kSmallHeat) + out) == exit_pass);
    CHECK(cli("run " + file("typo.ini", "[jko]\nepsilonn = 1\n") + out) == exit_config_error);
    CHECK(cli("run " + file("neg.ini", "[time]\nh = -1\n") + out) == exit_config_error);
    CHECK(cli("run " + (dir / "missing.ini").string() + out) == exit_config_error);
    CHECK(cli("frobnicate") == exit_config_error);
    // an impossible threshold is a diagnostic failure, not a crash
    CHECK(cli("run " + file("strict.ini", std::string(kSmallHeat) + "[checks]\nimbalance = 1e-300\n") + out) ==
          exit_diagnostic_fail);
    CHECK(cli("check-assumptions " + file("ok2.ini", kSmallHeat) + out) == exit_pass);
    fs::remove_all(dir);
}
