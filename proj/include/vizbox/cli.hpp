#pragma once

#include <cstddef>
#include <ostream>
#include <string>

#include <json.hpp>

#include "vizbox/boxmodel.hpp"

namespace vizbox {

// One flat configuration shared by every command. A config file (TOML subset
// or JSON, chosen by extension) fills it between the defaults and the
// command-line flags, so precedence is flags > file > defaults. Unknown keys
// are rejected; every field is echoed into every artifact a command writes.
struct RunConfig {
    Hyperparams hyper;  // d, gamma, alpha, beta, k, learning_rate, epochs, batch_size, seed

    std::string corpus;
    std::string bins;
    std::string graph;
    std::string model;
    std::string output;

    bool use_cross_features = true;
    bool project_columns_before_ds_intersection = true;
    double containment_tol = 0.0;
};

// Parses a config file into a flat key -> scalar object. ".json" files are
// parsed as JSON; anything else as the flat TOML subset `key = value` with
// quoted strings, numbers, booleans, and '#' comments. Unreadable file or
// syntax error throws UsageError.
nlohmann::ordered_json load_config_file(const std::string& path);

// Applies a flat config object; unknown keys or wrongly typed values throw
// UsageError naming the key.
void apply_config(RunConfig& cfg, const nlohmann::ordered_json& doc);

// Every field, fixed order.
nlohmann::ordered_json run_config_json(const RunConfig& cfg);

// Writes "<artifact>.run.json" recording the command and the full config.
void write_run_manifest(const RunConfig& cfg, const std::string& command,
                        const std::string& artifact);

// Commands. Paths come from the config; extras that are not RunConfig fields
// (sample count, rulebook, split fraction, dump role, feature-dump path) are
// flag-only. All throw: UsageError for bad invocations, DataError for bad
// inputs, NumericError when training diverges.
void cmd_synth(const RunConfig& cfg, std::size_t n, const std::string& rulebook);
void cmd_split(const RunConfig& cfg, double fraction, const std::string& train_out,
               const std::string& test_out);
void cmd_extract(const RunConfig& cfg, const std::string& role);
void cmd_fit_bins(const RunConfig& cfg, const std::string& features);
void cmd_build_kg(const RunConfig& cfg, const std::string& features,
                  bool negative_polarity);
void cmd_train(const RunConfig& cfg);
void cmd_recommend(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg, std::ostream& table_out);

}  // namespace vizbox
