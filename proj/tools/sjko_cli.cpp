#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sjko/error.hpp"
#include "sjko/run.hpp"

namespace {

int execute(const std::string& path, const std::string& out, bool quiet, std::optional<sjko::StudyMode> mode) {
    sjko::RunConfig cfg;
    try {
        cfg = sjko::parse_config_file(path);
    } catch (const std::exception& e) {
        const int code = sjko::exit_code_for(e);
        std::cerr << sjko::failure_json(code, e) << '\n';
        return code;
    }
    sjko::RunOptions opt;
    if (!out.empty()) opt.output_dir = out;
    opt.mode = mode;
    opt.quiet = quiet;
    sjko::RunOutcome res;
    try {
        res = sjko::run(cfg, opt);
    } catch (const std::exception& e) {
        // the output directory itself could not be written
        const int code = sjko::exit_code_for(e);
        std::cerr << sjko::failure_json(code, e) << '\n';
        return code;
    }
    for (const auto& c : res.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " threshold=" << c.threshold
                  << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    if (res.exit_code >= sjko::exit_config_error)
        std::cerr << "error: " << res.failure << " (see " << res.output_dir << "/failure.json)\n";
    else if (!quiet)
        std::cout << "wrote " << res.files.size() + 1 << " files to " << res.output_dir << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Splitting JKO solver for gradient flows with non-gradient drift"};
    app.require_subcommand(1);
    std::string config, out;
    bool quiet = false;

    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_flag("--quiet,-q", quiet, "no progress output");
        return sub;
    };
    CLI::App* run = add("run", "run the study selected by the configuration (study.mode)");
    CLI::App* assumptions = add("check-assumptions", "check the energy and drift hypotheses only");
    CLI::App* sweep = add("sweep", "run an h-sweep regardless of study.mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sjko::exit_config_error;
    }
    if (run->parsed()) return execute(config, out, quiet, std::nullopt);
    if (assumptions->parsed()) return execute(config, out, quiet, sjko::StudyMode::assumptions);
    if (sweep->parsed()) return execute(config, out, quiet, sjko::StudyMode::sweep);
    return sjko::exit_config_error;
}
