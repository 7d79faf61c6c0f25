#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vizbox/column.hpp"

namespace vizbox {

// Fixed order; used for deterministic tie-breaking everywhere.
enum class ChartType { kBar = 0, kLine = 1, kScatter = 2, kBox = 3 };
inline constexpr std::array<ChartType, 4> kAllChartTypes{
    ChartType::kBar, ChartType::kLine, ChartType::kScatter, ChartType::kBox};

const char* to_string(ChartType t);
std::optional<ChartType> chart_type_from_string(const std::string& s);

enum class Axis { kX = 0, kY = 1 };
const char* to_string(Axis a);

struct Pair {
    std::string id;
    std::vector<Column> columns;              // exactly two
    std::optional<ChartType> chart_type;      // absent for unlabeled input
    std::array<std::optional<Axis>, 2> axes;  // per column, absent for unlabeled
};

struct Corpus {
    std::vector<Pair> pairs;
    std::string provenance;  // "loaded:<path>" or "synthetic:<rulebook>"
    std::uint64_t seed = 0;
};

struct LoadReport {
    Corpus corpus;
    std::vector<std::string> warnings;  // one per skipped/defective record
};

// JSONL, one pair object per line:
//   {"id": ..., "columns": [{"name", "values"}, ...], "chart_type": ..., "axes": {name: "x"|"y"}}
// Invalid records are skipped with a warning; an unreadable file throws DataError.
// With require_labels=false, chart_type/axes may be absent (recommendation input).
LoadReport load_corpus(const std::string& path, bool require_labels = true);
void save_corpus(const Corpus& corpus, const std::string& path);

// Deterministic shuffle split; train gets round(fraction * n) pairs.
// Both sides keep the original corpus order.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double fraction, std::uint64_t seed);

// Maps generator archetype -> admissible chart types. Archetype keys:
// "t+q", "c+q", "q+q_corr", "q+q_indep".
using Rulebook = std::map<std::string, std::vector<ChartType>>;

Rulebook default_rulebook();    // one admissible type per archetype
Rulebook adaptive_rulebook();   // two admissible types per archetype
// "default", "adaptive", or a path to a JSON file {archetype: [type, ...]}
Rulebook resolve_rulebook(const std::string& name_or_path);

// Generates n pairs, cycling through the rulebook's archetypes; each pair's
// chart type is drawn uniformly from its archetype's admissible set. Pair ids
// embed the archetype ("synth-<archetype>-<index>").
Corpus generate_synthetic_corpus(std::size_t n, std::uint64_t seed, const Rulebook& rulebook);

// archetype token inside a synthetic id, empty if not recognizable
std::string archetype_of_id(const std::string& id);

}  // namespace vizbox
