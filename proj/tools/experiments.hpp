#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace cli {

// Runs every experiment listed in cfg, writing CSVs under out. Returns the
// files written, relative to out.
std::vector<std::string> run_experiments(const Config& cfg, const std::filesystem::path& out);

// Merges the run directories under dir into table_*.csv files.
std::vector<std::string> report(const std::filesystem::path& dir);

}  // namespace cli
