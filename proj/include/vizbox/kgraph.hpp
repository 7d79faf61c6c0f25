#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vizbox/corpus.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/features.hpp"

namespace vizbox {

enum class EntityClass : std::uint8_t {
    kSingleFeature = 0,  // (feature, bin) observed on a column
    kCrossFeature = 1,   // (feature, bin) observed on a pair
    kColumn = 2,         // one per corpus column instance
    kDataset = 3,        // one per corpus pair instance
    kVisAxis = 4,        // x, y
    kVisType = 5,        // bar, line, scatter, box
};
inline constexpr std::size_t kNumEntityClasses = 6;

enum class RelationClass : std::uint32_t {
    kSfToCol = 0,
    kCfToDs = 1,
    kColToDs = 2,
    kColToAxis = 3,
    kDsToType = 4,
};
inline constexpr std::size_t kNumRelations = 5;

const char* to_string(EntityClass cls);
const char* to_string(RelationClass cls);
EntityClass head_class(RelationClass rel);
EntityClass tail_class(RelationClass rel);

struct Entity {
    std::uint32_t id = 0;
    EntityClass cls = EntityClass::kSingleFeature;
    std::string label;  // unique within its class
};

struct Triple {
    std::uint32_t head = 0;
    std::uint32_t relation = 0;  // RelationClass value
    std::uint32_t tail = 0;
    auto operator<=>(const Triple&) const = default;
};

struct KnowledgeGraph {
    // The 6 visualization entities are always present, ids 0..5.
    static constexpr std::uint32_t kAxisX = 0;
    static constexpr std::uint32_t kAxisY = 1;
    static std::uint32_t axis_entity(Axis axis) {
        return axis == Axis::kX ? kAxisX : kAxisY;
    }
    static std::uint32_t type_entity(ChartType type) {
        return 2 + static_cast<std::uint32_t>(type);
    }

    std::vector<Entity> entities;  // position == id
    std::vector<Triple> triples;   // sorted, duplicates removed
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>>
        index;  // (head, relation) -> sorted tails
    std::string bins_fingerprint;

    const std::vector<std::uint32_t>& tails(std::uint32_t head, RelationClass rel) const;
    std::vector<std::uint32_t> ids_of(EntityClass cls) const;
    std::optional<std::uint32_t> find(EntityClass cls, const std::string& label) const;
};

struct GraphBuildOptions {
    // Also emit "<feature>=false" entities for explicit boolean falses.
    // Off by default: a negative finding carries little signal and doubles
    // the boolean vocabulary; kept as an ablation switch.
    bool include_negative_polarity = false;
};

// Label of the feature entity a value activates ("mean=b2", "is_sorted=true",
// "std=missing"), or nullopt when the value activates nothing (inactive
// boolean). Shared between graph construction and inference so both sides
// spell entities identically. DataError when the value and the bins disagree.
std::optional<std::string> feature_entity_label(const FeatureDef& def,
                                                const std::optional<double>& value,
                                                const DiscretizationMap& bins,
                                                const GraphBuildOptions& opts = {});

// Builds the typed graph from an extracted feature dump, the labeled corpus
// the dump came from (chart type + axis per column), and the fitted bins.
// Continuous values are mapped to bin entities, missing values to the
// feature's missing entity, booleans to a true-polarity entity only.
KnowledgeGraph build_graph(const FeatureDump& dump, const Corpus& labels,
                           const DiscretizationMap& bins, const GraphBuildOptions& opts = {});

struct PositiveGroup {
    std::uint32_t head = 0;
    std::uint32_t relation = 0;
    std::vector<std::uint32_t> tails;  // full answer set, sorted
};

// Triples grouped by (head, relation): the unit of 1-to-N training.
std::vector<PositiveGroup> positive_triples(const KnowledgeGraph& kg);

// Feature-identical instances and the widened answer sets derived from them.
// Two columns are equivalent when they carry exactly the same feature
// entities; two datasets when their column signatures and cross-feature sets
// match. Negative sampling must not treat a tail observed on an equivalent
// instance as wrong — the model cannot distinguish the instances.
struct SignatureIndex {
    std::map<std::uint32_t, std::vector<std::uint32_t>> column_signature;  // COL -> sorted SF ids
    std::map<std::uint32_t, std::vector<std::uint32_t>> dataset_columns;   // DS -> its COL ids
    std::map<std::uint32_t, std::vector<std::uint32_t>> dataset_cross;     // DS -> sorted CF ids
    std::map<std::uint32_t, std::vector<std::uint32_t>> equivalent_columns;   // COL -> COLs (incl. self)
    std::map<std::uint32_t, std::vector<std::uint32_t>> equivalent_datasets;  // DS -> DSs (incl. self)
    std::map<std::uint32_t, std::vector<std::uint32_t>> axis_answers;  // COL -> axes over equivalents
    std::map<std::uint32_t, std::vector<std::uint32_t>> type_answers;  // DS -> types over equivalents
    std::map<std::uint32_t, std::vector<std::uint32_t>> dataset_answers;  // COL -> equivalent DSs of its DS
};
SignatureIndex build_signature_index(const KnowledgeGraph& kg);

// Entity/triple counts per class and tail-set size histograms per relation.
nlohmann::ordered_json graph_stats(const KnowledgeGraph& kg);

// Deterministic text form for structural comparison. With
// anonymize_instances, per-instance column/dataset labels are replaced by
// structural ordinals so graphs built from relabeled corpora compare equal.
std::string canonical_form(const KnowledgeGraph& kg, bool anonymize_instances = false);

void save_graph(const KnowledgeGraph& kg, const std::string& path);
KnowledgeGraph load_graph(const std::string& path);

}  // namespace vizbox
