#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vizbox/corpus.hpp"
#include "vizbox/features.hpp"

namespace vizbox {

// Entropy-minimizing supervised discretization (MDL stopping rule, log base
// 2). Candidate thresholds are midpoints between adjacent distinct values at
// class boundaries; a split is kept when
//   gain > (log2(n-1) + delta) / n,
//   delta = log2(3^k - 2) - [k*E(S) - k1*E(S1) - k2*E(S2)],
// and the winning threshold on equal gain is the smallest. Accepted splits
// recurse into both halves. Returns sorted cut points.
std::vector<double> fit_mdlp(const std::vector<double>& values, const std::vector<int>& labels);

// Bin index for a value: count of cuts <= value (a value sitting exactly on a
// cut belongs to the right bin). cuts must be sorted.
std::size_t transform(double value, const std::vector<double>& cuts);

struct FeatureBins {
    std::vector<double> cuts;
    bool has_missing_bin = false;  // training data had missing values
};

struct DiscretizationMap {
    // keyed by feature name (unique across single and cross catalogues)
    std::map<std::string, FeatureBins> features;

    std::size_t n_bins(const std::string& feature) const;  // cuts + 1
    // stable content hash used to pair downstream artifacts with this map
    std::string fingerprint() const;
};

// Fits bins for every continuous feature over the training dump, supervised
// by each pair's chart type (both columns of a pair carry its label). Boolean
// features are not discretized. Refuses test-role dumps: bins fitted on
// evaluation data would leak labels into the model.
DiscretizationMap fit_all(const FeatureDump& train_dump,
                          const std::map<std::string, ChartType>& label_by_id);

void save_bins(const DiscretizationMap& map, const std::string& path);
DiscretizationMap load_bins(const std::string& path);

}  // namespace vizbox
