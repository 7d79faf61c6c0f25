#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "vizbox/corpus.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/inference.hpp"

namespace vizbox {

// Arithmetic mean of 1-based ranks. Throws std::invalid_argument on empty.
double mean_rank(const std::vector<std::size_t>& ranks);

// Fraction of ranks <= k. Monotone in k; k = 0 gives 0.
double hits_at_k(const std::vector<std::size_t>& ranks, std::size_t k = 2);

struct MultiLabelScores {
    double recall = 0.0;     // macro-averaged over examples
    double precision = 0.0;  // macro-averaged; an empty prediction scores 0
    double f1 = 0.0;         // harmonic mean of the two macro averages
};

// Per-example set recall/precision, macro-averaged over examples; duplicates
// within a set are ignored. Truth sets must be non-empty and both lists the
// same non-zero length.
MultiLabelScores multi_label_prf(const std::vector<std::vector<ChartType>>& predicted,
                                 const std::vector<std::vector<ChartType>>& truth);

struct SignatureGroup {
    std::string signature;                // canonical key over all discretized feature values
    std::vector<std::size_t> members;     // indices into corpus.pairs, ascending
    std::vector<std::string> member_ids;  // same order as members
    std::vector<ChartType> truth;         // union of member labels, fixed type order
};

// Partitions a labeled corpus by exact equality of the full discretized
// signature: the unordered pair of per-column single-feature label sets plus
// the cross-feature label set, under the given bins. Pairs with equal
// signatures activate identical feature entities and are indistinguishable to
// the recommender; a group whose members carry two or more distinct labels is
// a multi-label test case. Groups come back sorted by key and partition the
// corpus. Unlabeled pairs are an error.
std::vector<SignatureGroup> group_by_signature(const Corpus& corpus,
                                               const DiscretizationMap& bins);

struct EvalReport {
    double axis_accuracy = 0.0;   // over per-column assignments, in [0, 1]
    double type_mean_rank = 0.0;  // in [1, 4]
    double type_hits_at_1 = 0.0;
    double type_hits_at_2 = 0.0;
    MultiLabelScores multi;  // over signature groups with >= 2 truth types
    std::size_t n = 0;       // pairs evaluated
    std::size_t n_groups = 0;
    std::size_t n_multi_groups = 0;
    nlohmann::ordered_json config;  // echoed run configuration
};

// Runs inference over every pair of a labeled corpus and reduces the metrics
// in corpus order (groups in key order). The rank of the labeled type is
// 1 + the number of strictly better-scored types, so exact ties share the
// better rank. Multi-label prediction for a group is the recommended set of
// its first member; members are interchangeable by construction. An empty or
// partially labeled corpus is an error; `config` is echoed into the report.
EvalReport evaluate(const ModelParams& model, const DiscretizationMap& bins,
                    const Corpus& test, const InferenceOptions& opts = {},
                    nlohmann::ordered_json config = {});

nlohmann::ordered_json report_json(const EvalReport& r);

// Fixed-width two-block summary of the same numbers.
std::string report_table(const EvalReport& r);

}  // namespace vizbox
