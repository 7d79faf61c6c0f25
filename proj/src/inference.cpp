#include "vizbox/inference.hpp"

#include <algorithm>
#include <stdexcept>

#include "vizbox/common.hpp"
#include "vizbox/feature_registry.hpp"

namespace vizbox {

namespace {

nlohmann::ordered_json box_json(const Box& b) {
    return {{"center", b.center}, {"offset", b.offset}};
}

nlohmann::ordered_json intersection_json(const IntersectionTrace& tr) {
    nlohmann::ordered_json branches = nlohmann::ordered_json::array();
    for (const auto& br : tr.branches) {
        nlohmann::ordered_json j;
        j["label"] = br.label;
        if (br.column >= 0) j["column"] = br.column;
        j["weight"] = br.weight;
        j["box"] = box_json(br.box);
        branches.push_back(std::move(j));
    }
    return {{"branches", std::move(branches)}, {"out", box_json(tr.out)}};
}

}  // namespace

Recommender::Recommender(const ModelParams& model, const DiscretizationMap& bins,
                         InferenceOptions opts)
    : model_(model), bins_(bins), opts_(opts) {
    if (opts_.containment_tol < 0.0) {
        throw UsageError("containment_tol must be >= 0");
    }
    const std::string fp = bins_.fingerprint();
    if (model_.bins_fingerprint != fp) {
        throw DataError("bins fingerprint mismatch: model was trained against '" +
                        model_.bins_fingerprint + "' but the map loaded here is '" + fp +
                        "'; refusing to mix them");
    }
    for (const auto& e : model_.entities) {
        by_label_[{static_cast<std::uint8_t>(e.cls), e.label}] = e.id;
    }
}

const double* Recommender::entity_point(std::uint32_t id) const {
    return model_.point(id);
}

ColumnBoxResult Recommender::column_box(const FeatureVector& single) const {
    const auto& defs = single_feature_defs();
    if (single.size() != defs.size()) {
        throw DataError("single-column feature vector has " + std::to_string(single.size()) +
                        " entries, expected " + std::to_string(defs.size()));
    }
    ColumnBoxResult res;
    std::vector<Box> boxes;
    std::vector<std::string> labels;
    const auto& rel = model_.relations[static_cast<std::size_t>(RelationClass::kSfToCol)];
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (defs[i].kind == FeatureKind::kContinuous) {
            const auto fb = bins_.features.find(defs[i].name);
            if (fb == bins_.features.end()) {
                // a value for a feature the map has no bins for is evidence
                // the model cannot use; a missing one is no evidence at all
                if (single[i].has_value()) res.skipped.push_back(defs[i].name);
                continue;
            }
            if (!single[i].has_value() && !fb->second.has_missing_bin) continue;
        }
        const auto label = feature_entity_label(defs[i], single[i], bins_);
        if (!label) continue;
        const auto it =
            by_label_.find({static_cast<std::uint8_t>(EntityClass::kSingleFeature), *label});
        if (it == by_label_.end()) {
            res.skipped.push_back(*label);
            continue;
        }
        boxes.push_back(project_point(entity_point(it->second), rel, model_.hyper.d));
        labels.push_back(*label);
    }
    if (boxes.empty()) {
        throw DataError("no recognizable single-feature entity on this column; "
                        "the model cannot place it");
    }
    std::vector<double> weights;
    res.box = intersect(boxes, model_.attention, &weights);
    res.trace.out = res.box;
    res.trace.branches.reserve(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        res.trace.branches.push_back({labels[i], -1, std::move(boxes[i]), weights[i]});
    }
    return res;
}

AxisChoice Recommender::recommend_axis(const Box& column) const {
    AxisChoice c;
    c.box = project_box(column,
                        model_.relations[static_cast<std::size_t>(RelationClass::kColToAxis)]);
    c.score[0] = dist_box(entity_point(KnowledgeGraph::kAxisX), c.box, model_.hyper.alpha,
                          model_.hyper.beta);
    c.score[1] = dist_box(entity_point(KnowledgeGraph::kAxisY), c.box, model_.hyper.alpha,
                          model_.hyper.beta);
    c.axis = c.score[0] <= c.score[1] ? Axis::kX : Axis::kY;
    return c;
}

std::array<Axis, 2> Recommender::resolve_axes(const AxisChoice& first,
                                              const AxisChoice& second) {
    // Only two bijections exist; the independent preferences win whenever
    // they already disagree, because that assignment is the cheaper one.
    const double first_x = first.score[0] + second.score[1];
    const double first_y = first.score[1] + second.score[0];
    if (first_x <= first_y) return {Axis::kX, Axis::kY};
    return {Axis::kY, Axis::kX};
}

DatasetBoxResult Recommender::dataset_box(const std::array<Box, 2>& columns,
                                          const std::array<std::string, 2>& column_labels,
                                          const FeatureVector& cross) const {
    const auto& defs = cross_feature_defs();
    if (cross.size() != defs.size()) {
        throw DataError("cross-feature vector has " + std::to_string(cross.size()) +
                        " entries, expected " + std::to_string(defs.size()));
    }
    DatasetBoxResult res;
    std::vector<Box> boxes;
    std::vector<BranchTrace> meta;
    const auto& col_rel = model_.relations[static_cast<std::size_t>(RelationClass::kColToDs)];
    for (int c = 0; c < 2; ++c) {
        Box b = opts_.project_columns_before_ds_intersection
                    ? project_box(columns[static_cast<std::size_t>(c)], col_rel)
                    : columns[static_cast<std::size_t>(c)];
        meta.push_back({column_labels[static_cast<std::size_t>(c)], c, b, 0.0});
        boxes.push_back(std::move(b));
    }
    if (opts_.use_cross_features) {
        const auto& cf_rel = model_.relations[static_cast<std::size_t>(RelationClass::kCfToDs)];
        for (std::size_t i = 0; i < defs.size(); ++i) {
            if (defs[i].kind == FeatureKind::kContinuous) {
                const auto fb = bins_.features.find(defs[i].name);
                if (fb == bins_.features.end()) {
                    if (cross[i].has_value()) res.skipped.push_back(defs[i].name);
                    continue;
                }
                if (!cross[i].has_value() && !fb->second.has_missing_bin) continue;
            }
            const auto label = feature_entity_label(defs[i], cross[i], bins_);
            if (!label) continue;
            const auto it =
                by_label_.find({static_cast<std::uint8_t>(EntityClass::kCrossFeature), *label});
            if (it == by_label_.end()) {
                res.skipped.push_back(*label);
                continue;
            }
            Box b = project_point(entity_point(it->second), cf_rel, model_.hyper.d);
            meta.push_back({*label, -1, b, 0.0});
            boxes.push_back(std::move(b));
        }
    }
    std::vector<double> weights;
    res.box = intersect(boxes, model_.attention, &weights);
    for (std::size_t i = 0; i < meta.size(); ++i) meta[i].weight = weights[i];
    res.trace.branches = std::move(meta);
    res.trace.out = res.box;
    return res;
}

TypeScores Recommender::recommend_types(const Box& dataset) const {
    TypeScores out;
    out.box = project_box(dataset,
                          model_.relations[static_cast<std::size_t>(RelationClass::kDsToType)]);
    for (ChartType t : kAllChartTypes) {
        const double* p = entity_point(KnowledgeGraph::type_entity(t));
        out.ranking.emplace_back(t, dist_box(p, out.box, model_.hyper.alpha, model_.hyper.beta));
        if (contains(out.box, p, opts_.containment_tol)) out.contained.push_back(t);
    }
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

Recommendation Recommender::recommend(const PairFeatures& features) const {
    Recommendation rec;
    rec.column_names = features.column_names;

    std::array<ColumnBoxResult, 2> cols;
    for (std::size_t c = 0; c < 2; ++c) {
        try {
            cols[c] = column_box(features.single[c]);
        } catch (const DataError& e) {
            throw DataError("column '" + features.column_names[c] + "': " + e.what());
        }
        for (const auto& s : cols[c].skipped) {
            rec.warnings.push_back("column '" + features.column_names[c] +
                                   "': unknown feature entity '" + s + "' skipped");
        }
        rec.trace.columns[c] = cols[c].trace;
    }

    for (std::size_t c = 0; c < 2; ++c) {
        rec.axis_choice[c] = recommend_axis(cols[c].box);
        rec.trace.axis_boxes[c] = rec.axis_choice[c].box;
    }
    rec.axes = resolve_axes(rec.axis_choice[0], rec.axis_choice[1]);

    auto ds = dataset_box({cols[0].box, cols[1].box}, features.column_names, features.cross);
    for (const auto& s : ds.skipped) {
        rec.warnings.push_back("pair: unknown feature entity '" + s + "' skipped");
    }
    rec.trace.dataset = ds.trace;

    auto types = recommend_types(ds.box);
    rec.trace.type_box = types.box;
    rec.ranking = std::move(types.ranking);
    rec.contained = std::move(types.contained);
    if (rec.contained.empty()) {
        rec.ranked_fallback = true;
        rec.recommended = {rec.ranking.front().first};
    } else {
        rec.recommended = rec.contained;
    }
    return rec;
}

Recommendation Recommender::recommend(const Pair& pair) const {
    return recommend(extract_pair(pair));
}

nlohmann::ordered_json recommendation_json(const Recommendation& rec,
                                           const std::string& trace_ref) {
    nlohmann::ordered_json axes = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < 2; ++c) {
        std::string key = rec.column_names[c];
        if (c == 1 && key == rec.column_names[0]) key += "#2";
        axes[key] = rec.axes[c] == Axis::kX ? "x" : "y";
    }
    nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
    for (const auto& [t, score] : rec.ranking) {
        ranking.push_back({{"type", to_string(t)}, {"score", score}});
    }
    nlohmann::ordered_json recommended = nlohmann::ordered_json::array();
    for (ChartType t : rec.recommended) recommended.push_back(to_string(t));

    nlohmann::ordered_json out;
    out["axes"] = std::move(axes);
    out["ranking"] = std::move(ranking);
    out["recommended"] = std::move(recommended);
    out["ranked_fallback"] = rec.ranked_fallback;
    out["warnings"] = rec.warnings;
    out["trace_ref"] = trace_ref;
    return out;
}

nlohmann::ordered_json trace_json(const InferenceTrace& trace) {
    nlohmann::ordered_json out;
    out["columns"] = {intersection_json(trace.columns[0]), intersection_json(trace.columns[1])};
    out["dataset"] = intersection_json(trace.dataset);
    out["axis_boxes"] = {box_json(trace.axis_boxes[0]), box_json(trace.axis_boxes[1])};
    out["type_box"] = box_json(trace.type_box);
    return out;
}

}  // namespace vizbox
