#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vizbox/boxmodel.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/features.hpp"
#include "vizbox/kgraph.hpp"

namespace vizbox {

struct InferenceOptions {
    // Drop the cross-feature branches from the dataset intersection. Used to
    // measure how much the cross-column evidence contributes; when the pair
    // has no cross-feature entities anyway this flag changes nothing.
    bool use_cross_features = true;
    // Project column boxes through the column->dataset relation before
    // intersecting them with the cross-feature branches. Off = intersect the
    // raw column boxes (ablation).
    bool project_columns_before_ds_intersection = true;
    // Slack for the containment test that decides the recommended set.
    double containment_tol = 0.0;
};

// One branch of an intersection as it was fed to the attention net.
struct BranchTrace {
    std::string label;  // feature entity label, or the column name
    int column = -1;    // 0/1 for the dataset-level column branches
    Box box;
    double weight = 0.0;
};

struct IntersectionTrace {
    std::vector<BranchTrace> branches;  // weights sum to 1
    Box out;
};

// Everything needed to replay or explain a recommendation.
struct InferenceTrace {
    std::array<IntersectionTrace, 2> columns;  // single-feature branches
    IntersectionTrace dataset;                 // column + cross-feature branches
    std::array<Box, 2> axis_boxes;             // per-column axis query box
    Box type_box;                              // dataset-level type query box
};

struct ColumnBoxResult {
    Box box;
    IntersectionTrace trace;
    std::vector<std::string> skipped;  // feature entities absent from the model
};

struct AxisChoice {
    Axis axis = Axis::kX;
    std::array<double, 2> score{};  // distance to the x / y entity
    Box box;                        // the projected axis query box
};

struct DatasetBoxResult {
    Box box;
    IntersectionTrace trace;
    std::vector<std::string> skipped;
};

struct TypeScores {
    std::vector<std::pair<ChartType, double>> ranking;  // ascending distance
    std::vector<ChartType> contained;                   // declaration order; may be empty
    Box box;
};

struct Recommendation {
    std::array<Axis, 2> axes{};  // axes[i] = axis assigned to column i
    std::array<AxisChoice, 2> axis_choice;
    std::vector<std::pair<ChartType, double>> ranking;
    std::vector<ChartType> contained;
    std::vector<ChartType> recommended;  // contained, or top-1 of the ranking
    bool ranked_fallback = false;
    std::vector<std::string> warnings;
    InferenceTrace trace;
    std::array<std::string, 2> column_names;
};

// Query-side composition over a trained model. Holds references only:
// the model and map must outlive the recommender. All methods are const and
// deterministic; concurrent use from several threads is fine.
class Recommender {
  public:
    // Refuses a map whose fingerprint differs from the one the model was
    // trained against.
    Recommender(const ModelParams& model, const DiscretizationMap& bins,
                InferenceOptions opts = {});

    // Intersection of the column's recognizable single-feature boxes.
    // Feature entities the model has never seen are skipped and reported;
    // a column with none left at all is an error.
    ColumnBoxResult column_box(const FeatureVector& single) const;

    // Project a column box toward the axis entities and pick the closer one
    // (ties go to x).
    AxisChoice recommend_axis(const Box& column) const;

    // The two legal assignments of two columns to two axes, scored by total
    // distance; ties give the first column x.
    static std::array<Axis, 2> resolve_axes(const AxisChoice& first,
                                            const AxisChoice& second);

    // Intersection of the (optionally projected) column boxes with the
    // pair's cross-feature boxes.
    DatasetBoxResult dataset_box(const std::array<Box, 2>& columns,
                                 const std::array<std::string, 2>& column_labels,
                                 const FeatureVector& cross) const;

    // Rank every chart type by distance to the projected dataset box and
    // test containment. Ranking ties keep declaration order.
    TypeScores recommend_types(const Box& dataset) const;

    Recommendation recommend(const PairFeatures& features) const;
    Recommendation recommend(const Pair& pair) const;

    const ModelParams& model() const { return model_; }
    const InferenceOptions& options() const { return opts_; }

  private:
    const ModelParams& model_;
    const DiscretizationMap& bins_;
    InferenceOptions opts_;
    std::map<std::pair<std::uint8_t, std::string>, std::uint32_t> by_label_;

    const double* entity_point(std::uint32_t id) const;
};

// Machine-readable forms. trace_ref names where the full trace was written.
nlohmann::ordered_json recommendation_json(const Recommendation& rec,
                                           const std::string& trace_ref);
nlohmann::ordered_json trace_json(const InferenceTrace& trace);

}  // namespace vizbox
