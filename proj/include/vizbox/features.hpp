#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vizbox/corpus.hpp"
#include "vizbox/feature_registry.hpp"

namespace vizbox {

// Aligned with single_feature_defs()/cross_feature_defs(); nullopt = missing
// (not applicable to the column's type, or undefined on this data).
using FeatureVector = std::vector<std::optional<double>>;

struct PairFeatures {
    std::string id;
    std::array<std::string, 2> column_names;
    std::array<FeatureVector, 2> single;
    FeatureVector cross;
};

FeatureVector extract_single(const Column& col);
FeatureVector extract_cross(const Column& a, const Column& b);
PairFeatures extract_pair(const Pair& pair);

struct FeatureDump {
    std::vector<PairFeatures> records;
    std::string role;  // "train" | "test" | "unspecified"
};

// JSONL: a schema header line, then one record per pair:
//   {"id": ..., "single": {colname: {feature: value|null}}, "cross": {feature: value|null}}
// When a pair's two columns share a name, the second key gets a "#2" suffix.
void save_features(const FeatureDump& dump, const std::string& path);
FeatureDump load_features(const std::string& path);

}  // namespace vizbox
