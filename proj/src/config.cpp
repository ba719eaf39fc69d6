#include "dyncopy/config.hpp"

#include "dyncopy/error.hpp"

#include <fstream>
#include <functional>

namespace dyncopy {

namespace {

// Training budgets below are desk-scale values; see README for the rationale
// of each experiment's shape.

constexpr const char* classifier_defaults = R"({
  "experiment": "copy-classifier",
  "seed": 1,
  "patterns": {"source": "file", "path": "data/patterns8x8.txt", "images": "", "labels": "", "limit": 0},
  "encoding": "plus_minus",
  "teacher": {
    "hidden": 30,
    "init_bound": 0.1,
    "train": {"design_bound": 2.0, "proposal_scale": 0.05, "proposal_final": 0.0, "max_steps": 400000, "target_loss": 0.01,
              "snapshot_every": 5000, "batch": 1}
  },
  "student": {
    "hidden": 120,
    "transfer": "gauss",
    "init_bound": 0.1,
    "train": {"design_bound": 2.0, "proposal_scale": 0.05, "proposal_final": 0.001, "max_steps": 1500000, "target_loss": 0.0,
              "snapshot_every": 500000, "batch": 1}
  },
  "probe_counts": [200, 500, 1000, 2000]
})";

constexpr const char* lorenz_dlm_defaults = R"({
  "experiment": "copy-lorenz-dlm",
  "seed": 1,
  "lorenz": {"sigma": 10.0, "r": 28.0, "b": 2.6666666666666665},
  "samples": 100,
  "interval": 0.05,
  "target_mode": "chord_midpoint",
  "correction_rounds": 7,
  "box": {"lo": [-20.0, -20.0, 0.0], "hi": [20.0, 20.0, 40.0]},
  "scaling": {"offset": [0.0, 0.0, 25.0], "value_scale": 20.0, "time_scale": 0.1},
  "machine": {"hidden": 200, "transfer": "gauss", "init_bound": 0.5},
  "train": {"design_bound": 4.0, "proposal_scale": 0.05, "proposal_final": 0.0005, "max_steps": 16000000, "target_loss": 0.0,
            "snapshot_every": 1000000, "batch": 1},
  "step": 0.001,
  "evolve": {"x0": [1.0, 1.0, 1.0], "settle": 20.0, "duration": 20.0, "eps": 5.0, "max_err_threshold": 0.5,
             "horizon_starts": 16, "horizon_spacing": 1.0, "horizon_window": 8.0}
})";

constexpr const char* lorenz_ddlm_defaults = R"({
  "experiment": "copy-lorenz-ddlm",
  "seed": 1,
  "lorenz": {"sigma": 10.0, "r": 28.0, "b": 2.6666666666666665},
  "x0": [1.0, 1.0, 1.0],
  "settle": 20.0,
  "record": {"duration": 47.0, "gap": 0.01, "component": 0},
  "taps": 20,
  "scaling": {"offset": [0.0], "value_scale": 20.0, "time_scale": 0.1},
  "machine": {"hidden": 200, "transfer": "gauss", "init_bound": 0.5},
  "train": {"design_bound": 4.0, "proposal_scale": 0.05, "proposal_final": 0.0005, "max_steps": 4000000, "target_loss": 0.0,
            "snapshot_every": 1000000, "batch": 1},
  "step": 0.001,
  "evolve": {"duration": 50.0, "eps": 5.0, "lag": 0.1}
})";

constexpr const char* history_defaults = R"({
  "experiment": "history-replay",
  "seed": 1,
  "lorenz": {"sigma": 10.0, "r": 28.0, "b": 0.58},
  "x0": [1.0, 1.0, 1.0],
  "settle": 100.0,
  "record": {"duration": 30.0, "gap": 0.01, "component": 0},
  "taps": 20,
  "scaling": {"offset": [0.0], "value_scale": 20.0, "time_scale": 0.1},
  "machine": {"hidden": 200, "transfer": "gauss", "init_bound": 0.5},
  "train": {"design_bound": 4.0, "proposal_scale": 0.04, "proposal_final": 0.0, "max_steps": 200000, "target_loss": 0.0,
            "snapshot_every": 2000, "batch": 1},
  "step": 0.001,
  "replay": {"duration": 120.0, "transient_fraction": 0.5},
  "section": {"level": 5.0, "lag": 0.1, "tol_fraction": 0.05, "tol_floor": 0.001, "min_cycles": 2, "k_max": 8},
  "sweep": {"values": [0.40, 0.42, 0.44, 0.46, 0.48, 0.50, 0.52, 0.54, 0.56, 0.58], "duration": 300.0}
})";

constexpr const char* series_defaults = R"({
  "experiment": "copy-series",
  "seed": 1,
  "lightcurve": {"path": "data/synthetic_lightcurve.csv"},
  "bin_days": 10.0,
  "taps": 99,
  "train_fraction": 0.8,
  "machine": {"hidden": 300, "transfer": "tanh", "init_bound": 0.05},
  "train": {"design_bound": 2.0, "proposal_scale": 0.05, "proposal_final": 0.0002, "max_steps": 3000000, "target_loss": 0.0,
            "snapshot_every": 200000, "batch": 1},
  "predict_records": 200,
  "replay": {"records": 2000, "transient_fraction": 0.5},
  "section": {"level": 0.0, "lag": 0.0, "tol_fraction": 0.05, "tol_floor": 0.001, "min_cycles": 2, "k_max": 8}
})";

bool is_path_key(const std::string& key)
{
    return key == "path" || key == "images" || key == "labels";
}

void merge(json& target, const json& user, const std::string& where)
{
    for (const auto& [key, value] : user.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!target.contains(key)) throw format_error{"config: unknown key '" + path + "'"};
        json& slot = target[key];
        if (slot.is_object()) {
            if (!value.is_object()) throw format_error{"config: '" + path + "' must be an object"};
            merge(slot, value, path);
            continue;
        }
        const bool numbers = slot.is_number() && value.is_number();
        if (!numbers && slot.type() != value.type())
            throw format_error{"config: '" + path + "' has type " + value.type_name() + ", expected " + slot.type_name()};
        if (slot.is_number_integer() && !value.is_number_integer())
            throw format_error{"config: '" + path + "' must be an integer"};
        if (slot.is_number_unsigned() && value.get<long long>() < 0)
            throw format_error{"config: '" + path + "' must be non-negative"};
        if (slot.is_number_float() && value.is_number()) slot = value.get<double>();
        else slot = value;
    }
}

/// Make relative path values absolute: user-given ones against base_dir,
/// defaults against the source tree.
void absolutize(json& doc, const json& user, const std::filesystem::path& base_dir)
{
    for (auto& [key, value] : doc.items()) {
        const bool from_user = user.is_object() && user.contains(key);
        if (value.is_object()) {
            absolutize(value, from_user ? user[key] : json::object(), base_dir);
        }
        else if (value.is_string() && is_path_key(key) && !value.get<std::string>().empty()) {
            std::filesystem::path p = value.get<std::string>();
            if (p.is_relative()) p = (from_user ? base_dir : std::filesystem::path{DYNCOPY_SOURCE_DIR}) / p;
            value = std::filesystem::weakly_canonical(p).string();
        }
    }
}

}  // namespace

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> names{"copy-classifier", "copy-lorenz-dlm", "copy-lorenz-ddlm",
                                                "history-replay", "copy-series"};
    return names;
}

json default_config(std::string_view experiment)
{
    if (experiment == "copy-classifier") return json::parse(classifier_defaults);
    if (experiment == "copy-lorenz-dlm") return json::parse(lorenz_dlm_defaults);
    if (experiment == "copy-lorenz-ddlm") return json::parse(lorenz_ddlm_defaults);
    if (experiment == "history-replay") return json::parse(history_defaults);
    if (experiment == "copy-series") return json::parse(series_defaults);
    throw format_error{"unknown experiment '" + std::string{experiment} + "'"};
}

json resolve_config(const json& user, const std::filesystem::path& base_dir)
{
    if (!user.is_object()) throw format_error{"config: top level must be an object"};
    if (!user.contains("experiment") || !user["experiment"].is_string())
        throw format_error{"config: missing string key 'experiment'"};
    json doc = default_config(user["experiment"].get<std::string>());
    merge(doc, user, "");
    absolutize(doc, user, base_dir);
    return doc;
}

json load_config(const std::filesystem::path& path)
{
    std::ifstream in{path};
    if (!in) throw format_error{"cannot open config " + path.string()};
    json user;
    try {
        user = json::parse(in);
    }
    catch (const json::parse_error& e) {
        throw format_error{path.string() + ": " + e.what()};
    }
    return resolve_config(user, std::filesystem::absolute(path).parent_path());
}

}  // namespace dyncopy
