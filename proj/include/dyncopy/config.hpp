#pragma once

// Run configuration: JSON documents merged onto per-experiment defaults. //

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dyncopy {

using json = nlohmann::json;

/// Experiment names, one per CLI subcommand.
const std::vector<std::string>& experiment_names();

/// The complete default document for `experiment`; every accepted key appears in it.
json default_config(std::string_view experiment);

/// Merge `user` onto the defaults of its experiment.
///
/// Unknown keys and type mismatches raise format_error naming the key path.
/// Objects merge recursively; arrays and scalars replace. Relative paths in
/// `*path*`, `images` and `labels` keys are made absolute against `base_dir`.
json resolve_config(const json& user, const std::filesystem::path& base_dir);

/// Parse a config file and resolve it against the file's directory.
json load_config(const std::filesystem::path& path);

}  // namespace dyncopy
