#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sjko/config.hpp"

namespace sjko {

enum ExitCode : int { exit_pass = 0, exit_diagnostic_fail = 1, exit_config_error = 2, exit_solver_failure = 3 };

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = true;
    std::string detail;
};

struct EmittedFile {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// All file output goes through one writer so the manifest lists every file.
class OutputWriter {
public:
    explicit OutputWriter(std::string root);

    const std::string& root() const { return root_; }
    void write(const std::string& rel, const std::string& contents);
    const std::vector<EmittedFile>& files() const { return files_; }

private:
    std::string root_;
    std::vector<EmittedFile> files_;
};

std::string sha256_hex(const std::string& data);

struct RunOptions {
    std::optional<std::string> output_dir;
    std::optional<StudyMode> mode;
    bool quiet = false;
    std::function<void(const std::string&)> log;  // progress lines; stderr when empty
};

struct RunOutcome {
    int exit_code = exit_pass;
    std::vector<CheckResult> checks;
    std::vector<EmittedFile> files;
    std::string output_dir;
    std::string failure;  // message when exit_code >= 2
};

/// Runs the configured study and writes its artifacts, manifest.json last.
RunOutcome run(const RunConfig& cfg, const RunOptions& opt = {});

/// Maps library errors to the CLI exit codes.
int exit_code_for(const std::exception& e);

/// Machine-readable failure record.
std::string failure_json(int exit_code, const std::exception& e);

}  // namespace sjko
