#include "vizbox/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include "vizbox/common.hpp"
#include "vizbox/features.hpp"
#include "vizbox/kgraph.hpp"

namespace vizbox {

using nlohmann::ordered_json;

double mean_rank(const std::vector<std::size_t>& ranks) {
    if (ranks.empty()) throw std::invalid_argument("mean_rank: empty rank list");
    double sum = 0.0;
    for (const auto r : ranks) sum += static_cast<double>(r);
    return sum / static_cast<double>(ranks.size());
}

double hits_at_k(const std::vector<std::size_t>& ranks, std::size_t k) {
    if (ranks.empty()) throw std::invalid_argument("hits_at_k: empty rank list");
    std::size_t hits = 0;
    for (const auto r : ranks) hits += r <= k ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

namespace {

std::set<ChartType> as_set(const std::vector<ChartType>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

MultiLabelScores multi_label_prf(const std::vector<std::vector<ChartType>>& predicted,
                                 const std::vector<std::vector<ChartType>>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("multi_label_prf: list length mismatch");
    if (predicted.empty()) throw std::invalid_argument("multi_label_prf: no examples");

    double recall_sum = 0.0;
    double precision_sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = as_set(truth[i]);
        if (t.empty()) throw std::invalid_argument("multi_label_prf: empty truth set");
        const auto p = as_set(predicted[i]);
        std::size_t inter = 0;
        for (const auto c : p) inter += t.count(c);
        recall_sum += static_cast<double>(inter) / static_cast<double>(t.size());
        if (!p.empty())
            precision_sum += static_cast<double>(inter) / static_cast<double>(p.size());
    }
    MultiLabelScores s;
    const auto n = static_cast<double>(truth.size());
    s.recall = recall_sum / n;
    s.precision = precision_sum / n;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

namespace {

// Sorted label set a feature vector activates under the given bins; mirrors
// the recommender's skip rules, so equal sets mean equal query boxes.
std::vector<std::string> activated_labels(const FeatureVector& v,
                                          const std::vector<FeatureDef>& defs,
                                          const DiscretizationMap& bins) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        const std::optional<double> value = i < v.size() ? v[i] : std::nullopt;
        if (defs[i].kind == FeatureKind::kContinuous) {
            const auto fb = bins.features.find(defs[i].name);
            if (fb == bins.features.end()) continue;
            if (!value.has_value() && !fb->second.has_missing_bin) continue;
        }
        if (const auto label = feature_entity_label(defs[i], value, bins))
            out.push_back(*label);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string join(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) {
        if (!s.empty()) s += ';';
        s += p;
    }
    return s;
}

std::string signature_key(const PairFeatures& f, const DiscretizationMap& bins) {
    std::string a = join(activated_labels(f.single[0], single_feature_defs(), bins));
    std::string b = join(activated_labels(f.single[1], single_feature_defs(), bins));
    if (b < a) std::swap(a, b);
    const std::string x = join(activated_labels(f.cross, cross_feature_defs(), bins));
    return "col{" + a + "}col{" + b + "}cross{" + x + "}";
}

}  // namespace

std::vector<SignatureGroup> group_by_signature(const Corpus& corpus,
                                               const DiscretizationMap& bins) {
    std::map<std::string, SignatureGroup> groups;
    std::map<std::string, std::set<ChartType>> truths;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
        const auto& pair = corpus.pairs[i];
        if (!pair.chart_type.has_value())
            throw DataError("unlabeled pair in evaluation corpus: " + pair.id);
        const std::string key = signature_key(extract_pair(pair), bins);
        auto& g = groups[key];
        g.signature = key;
        g.members.push_back(i);
        g.member_ids.push_back(pair.id);
        truths[key].insert(*pair.chart_type);
    }
    std::vector<SignatureGroup> out;
    out.reserve(groups.size());
    for (auto& [key, g] : groups) {
        const auto& t = truths[key];
        g.truth.assign(t.begin(), t.end());
        out.push_back(std::move(g));
    }
    return out;
}

EvalReport evaluate(const ModelParams& model, const DiscretizationMap& bins,
                    const Corpus& test, const InferenceOptions& opts,
                    ordered_json config) {
    if (test.pairs.empty()) throw DataError("evaluation corpus is empty");
    const Recommender rec(model, bins, opts);

    EvalReport report;
    report.n = test.pairs.size();
    report.config = std::move(config);

    std::vector<std::size_t> ranks;
    ranks.reserve(test.pairs.size());
    std::vector<std::vector<ChartType>> recommended(test.pairs.size());
    std::size_t axis_hits = 0;
    for (std::size_t i = 0; i < test.pairs.size(); ++i) {
        const auto& pair = test.pairs[i];
        if (!pair.chart_type.has_value() || !pair.axes[0].has_value() ||
            !pair.axes[1].has_value())
            throw DataError("unlabeled pair in evaluation corpus: " + pair.id);
        const Recommendation r = rec.recommend(pair);
        for (const int c : {0, 1})
            if (r.axes[static_cast<std::size_t>(c)] == *pair.axes[static_cast<std::size_t>(c)])
                ++axis_hits;

        double truth_score = 0.0;
        for (const auto& [type, score] : r.ranking)
            if (type == *pair.chart_type) truth_score = score;
        std::size_t better = 0;
        for (const auto& [type, score] : r.ranking)
            if (score < truth_score) ++better;
        ranks.push_back(1 + better);
        recommended[i] = r.recommended;
    }
    report.axis_accuracy =
        static_cast<double>(axis_hits) / static_cast<double>(2 * test.pairs.size());
    report.type_mean_rank = mean_rank(ranks);
    report.type_hits_at_1 = hits_at_k(ranks, 1);
    report.type_hits_at_2 = hits_at_k(ranks, 2);

    const auto groups = group_by_signature(test, bins);
    report.n_groups = groups.size();
    std::vector<std::vector<ChartType>> predicted;
    std::vector<std::vector<ChartType>> truth;
    for (const auto& g : groups) {
        if (g.truth.size() < 2) continue;
        predicted.push_back(recommended[g.members.front()]);
        truth.push_back(g.truth);
    }
    report.n_multi_groups = predicted.size();
    if (!predicted.empty()) report.multi = multi_label_prf(predicted, truth);
    return report;
}

ordered_json report_json(const EvalReport& r) {
    ordered_json j;
    j["schema"] = "vizbox.eval/1";
    j["n"] = r.n;
    j["axis_accuracy"] = r.axis_accuracy;
    j["type_mean_rank"] = r.type_mean_rank;
    j["type_hits_at_1"] = r.type_hits_at_1;
    j["type_hits_at_2"] = r.type_hits_at_2;
    j["multi_label"] = {{"groups", r.n_groups},
                        {"multi_groups", r.n_multi_groups},
                        {"recall", r.multi.recall},
                        {"precision", r.multi.precision},
                        {"f1", r.multi.f1}};
    j["config"] = r.config.is_null() ? ordered_json::object() : r.config;
    return j;
}

std::string report_table(const EvalReport& r) {
    char buf[96];
    std::string out;
    const auto row = [&](const char* name, double value) {
        std::snprintf(buf, sizeof(buf), "  %-18s %8.4f\n", name, value);
        out += buf;
    };
    std::snprintf(buf, sizeof(buf), "evaluation on %zu pairs\n", r.n);
    out += buf;
    row("axis accuracy", r.axis_accuracy);
    row("type mean rank", r.type_mean_rank);
    row("type hits@1", r.type_hits_at_1);
    row("type hits@2", r.type_hits_at_2);
    std::snprintf(buf, sizeof(buf), "signature groups: %zu (%zu multi-label)\n",
                  r.n_groups, r.n_multi_groups);
    out += buf;
    row("recall", r.multi.recall);
    row("precision", r.multi.precision);
    row("f1", r.multi.f1);
    return out;
}

}  // namespace vizbox
