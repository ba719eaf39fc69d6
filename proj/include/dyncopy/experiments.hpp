#pragma once

// End-to-end experiment pipelines driven by a resolved config. //

#include "dyncopy/config.hpp"

#include <filesystem>

namespace dyncopy {

/// Validate `cfg` (a resolve_config() result) without running anything.
/// Throws format_error on the first invalid value.
void validate_experiment(const json& cfg);

/// Run the experiment named by cfg["experiment"].
///
/// Writes effective_config.json first, then the experiment's model, trace,
/// trajectory and section/bifurcation CSVs, and finally summary.json holding
/// the headline metrics, which is also returned. On failure summary.json is
/// written with "status": "failed" before the error propagates.
json run_experiment(const json& cfg, const std::filesystem::path& out_dir);

}  // namespace dyncopy
