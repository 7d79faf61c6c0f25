#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vizbox {

enum class FeatureScope { kSingle, kCross };
enum class FeatureKind { kContinuous, kBoolean };

struct FeatureDef {
    std::string name;
    FeatureScope scope;
    FeatureKind kind;
    // blocklisted features never appear in rendered explanations
    bool blocklisted = false;
};

// Canonical feature catalogue: 80 single-column + 40 cross-column features,
// in fixed order. Extraction output vectors align index-for-index with these.
const std::vector<FeatureDef>& single_feature_defs();
const std::vector<FeatureDef>& cross_feature_defs();

std::optional<std::size_t> single_feature_index(const std::string& name);
std::optional<std::size_t> cross_feature_index(const std::string& name);

// JSON form of the registry; data/feature_registry.json must stay equal to
// this (guarded by a test), and the CLI can re-emit it.
std::string registry_json();

}  // namespace vizbox
