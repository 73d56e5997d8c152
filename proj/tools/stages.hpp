#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "run_config.hpp"

namespace courtaudit::cli {

// Subcommand names in help order.
const std::vector<std::pair<std::string, std::string>>& stage_catalog();

// Runs one pipeline stage against the output directory: reads its
// prerequisite artifacts, writes its own atomically, and finishes with
// manifest_<stage>.json. Throws on missing prerequisites, invalid
// configuration, or stage failure.
void run_stage(const std::string& stage, const RunConfig& cfg,
               const std::filesystem::path& out);

}  // namespace courtaudit::cli
