#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vizbox/discretizer.hpp"
#include "vizbox/inference.hpp"

namespace vizbox {

// One intersection branch attributed back to its feature entity.
struct ImportanceEntry {
    std::string label;    // feature entity label ("length=b0", "is_sorted=true")
    int column = -1;      // 0/1 for single features, -1 for cross
    double weight = 0.0;  // renormalized path product
};

// Attention weights multiplied along the two intersection levels: each
// column branch inherits its column's dataset-level weight, cross branches
// keep their own; everything renormalized to sum to 1. Trace order.
std::vector<ImportanceEntry> feature_importances(const InferenceTrace& trace);

// Wording fragments per feature; ships as editable data
// (data/phrase_table.json) and compiled in as the default.
struct PhraseTable {
    struct Entry {
        std::vector<std::string> pair;  // complete two-level phrases, size 2
        std::string noun;               // display noun for leveled wording
        std::string boolean_phrase;     // phrase when a boolean is on
    };
    std::map<std::string, Entry> entries;
};

const PhraseTable& default_phrase_table();
std::string phrase_table_json();
PhraseTable load_phrase_table(const std::string& path);

// Degree wording for a discretized value: two levels use the feature's own
// pair of phrases (default low/high + noun), three use low/medium/high,
// more use quantile wording from "very low" to "very high". A single-bin
// feature gets no phrase.
std::string degree_phrase(const std::string& feature, std::size_t bin, std::size_t n_bins,
                          const PhraseTable& table = default_phrase_table());

struct SelectedFeature {
    std::string name;          // registry feature name
    int column = -1;           // -1 = cross scope
    double importance = 0.0;   // renormalized over the selected set
    std::string phrase;        // degree or boolean phrase; "" for constants
    bool boolean_polarity = false;
};

// Filters the importance list down to what an explanation may mention:
// no blocklisted features, no negative booleans, no missing-value bins,
// nothing under the importance floor; the top max_n by weight, re-ranked
// stably and renormalized.
std::vector<SelectedFeature> select_features(const std::vector<ImportanceEntry>& importances,
                                             const DiscretizationMap& bins,
                                             const PhraseTable& table = default_phrase_table(),
                                             std::size_t max_n = 4,
                                             double importance_floor = 0.05);

struct Explanation {
    std::vector<ChartType> types;
    std::vector<SelectedFeature> features;
    std::array<std::string, 2> column_names;
    std::string text;
    bool low_confidence = false;  // nothing survived selection
};

// '<Types> is/are recommended if <column> has <phrases>, and Cross-column
// has <phrases>.' Clauses only for scopes with surviving features; with
// none at all, a low-confidence sentence naming just the types.
std::string render(const std::vector<ChartType>& types,
                   const std::vector<SelectedFeature>& features,
                   const std::array<std::string, 2>& column_names,
                   const PhraseTable& table = default_phrase_table());

Explanation explain(const Recommendation& rec, const DiscretizationMap& bins,
                    const PhraseTable& table = default_phrase_table(),
                    std::size_t max_n = 4);

nlohmann::ordered_json explanation_json(const Explanation& e);

}  // namespace vizbox
