#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "vibrokit/config.hpp"

namespace vibrokit {

/// Command-line overrides on top of the config file.
struct CliOptions {
    std::string out_dir;  // empty: use the config's output.dir
    std::optional<std::uint64_t> seed;
    std::optional<double> s0;
    std::optional<double> eps;
    bool controlled = true;
};

// Exit codes: 0 success / positive verdict, 1 usage or parse error,
// 2 negative analysis verdict, 3 numerical failure.
int cmd_validate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_certify(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out);
int cmd_simulate(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out);
int cmd_design(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out);

/// Full argv entry point used by the binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vibrokit
