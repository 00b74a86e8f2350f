#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "apgdiag/engine.hpp"

namespace apgdiag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCauses = 2;  // slowdown diagnosed with at least one cause

struct CliConfig {
    EngineConfig engine;
    std::filesystem::path data_dir;
    std::filesystem::path symptoms_path;
    ReportFormat format = ReportFormat::Text;
};

// Reads flat `key = number` settings (theta, tau, delta, floor_s, k,
// history_limit) into `config`. Comments start with '#'; section headers
// are ignored.
void apply_defaults_file(const std::string& text, EngineConfig& config);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apgdiag::cli
