#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "iaei/config.hpp"
#include "iaei/imputation.hpp"
#include "iaei/simulation.hpp"

namespace iaei {

// Full command-line driver; returns the process exit code
// (0 ok, 2 validation, 3 parse, 4 runtime/solver).
int run_cli(int argc, const char* const* argv);

// Config-to-spec mappings, shared with the test suites.
ImputerSpec imputer_spec_from_config(const ConfigFile& config,
                                     const std::string& section = "imputer");
SimulationSpec simulation_spec_from_config(
    const ConfigFile& config, std::optional<std::uint64_t> seed_override);

}  // namespace iaei
