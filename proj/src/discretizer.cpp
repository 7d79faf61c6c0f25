#include "vizbox/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "vizbox/common.hpp"

namespace vizbox {

using json = nlohmann::ordered_json;

namespace {

double entropy_bits(const std::map<int, std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double e = 0.0;
    for (const auto& [_, c] : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        e -= p * std::log2(p);
    }
    return e;
}

struct Example {
    double value;
    int label;
};

void fit_range(const std::vector<Example>& ex, std::size_t lo, std::size_t hi,
               std::vector<double>* cuts) {
    const std::size_t n = hi - lo;
    if (n < 2) return;
    std::map<int, std::size_t> total_counts;
    for (std::size_t i = lo; i < hi; ++i) ++total_counts[ex[i].label];
    if (total_counts.size() < 2) return;
    const double e_all = entropy_bits(total_counts, n);

    // walk candidate split positions (starts of value groups); keep the best
    // gain, first (= smallest threshold) on ties
    double best_gain = -1.0;
    std::size_t best_pos = 0;
    double best_t = 0.0;
    std::map<int, std::size_t> left_counts;
    std::size_t group_start = lo;
    std::set<int> prev_group_labels;
    for (std::size_t i = lo; i < hi; ++i) {
        if (ex[i].value != ex[group_start].value) {
            // labels of the group that just ended
            std::set<int> group_labels;
            for (std::size_t j = group_start; j < i; ++j) group_labels.insert(ex[j].label);
            for (std::size_t j = group_start; j < i; ++j) ++left_counts[ex[j].label];
            // labels of the upcoming group
            std::set<int> next_labels;
            for (std::size_t j = i; j < hi && ex[j].value == ex[i].value; ++j) {
                next_labels.insert(ex[j].label);
            }
            const bool boundary = group_labels.size() > 1 || next_labels.size() > 1 ||
                                  *group_labels.begin() != *next_labels.begin();
            if (boundary) {
                const std::size_t n1 = i - lo;
                std::map<int, std::size_t> right_counts = total_counts;
                for (const auto& [cls, c] : left_counts) {
                    right_counts[cls] -= c;
                    if (right_counts[cls] == 0) right_counts.erase(cls);
                }
                const double e1 = entropy_bits(left_counts, n1);
                const double e2 = entropy_bits(right_counts, n - n1);
                const double gain = e_all - (static_cast<double>(n1) / n * e1 +
                                             static_cast<double>(n - n1) / n * e2);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_pos = i;
                    best_t = (ex[i - 1].value + ex[i].value) / 2.0;
                }
            }
            group_start = i;
        }
    }
    if (best_gain < 0.0) return;

    // MDL acceptance with the chosen split's class structure
    std::map<int, std::size_t> lc, rc;
    for (std::size_t i = lo; i < best_pos; ++i) ++lc[ex[i].label];
    for (std::size_t i = best_pos; i < hi; ++i) ++rc[ex[i].label];
    const auto k = static_cast<double>(total_counts.size());
    const auto k1 = static_cast<double>(lc.size());
    const auto k2 = static_cast<double>(rc.size());
    const double e1 = entropy_bits(lc, best_pos - lo);
    const double e2 = entropy_bits(rc, hi - best_pos);
    const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * e_all - k1 * e1 - k2 * e2);
    const double threshold =
        (std::log2(static_cast<double>(n - 1)) + delta) / static_cast<double>(n);
    if (best_gain <= threshold) return;

    cuts->push_back(best_t);
    fit_range(ex, lo, best_pos, cuts);
    fit_range(ex, best_pos, hi, cuts);
}

}  // namespace

std::vector<double> fit_mdlp(const std::vector<double>& values, const std::vector<int>& labels) {
    if (values.size() != labels.size()) {
        throw DataError("fit_mdlp: values/labels size mismatch");
    }
    std::vector<Example> ex;
    ex.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) ex.push_back({values[i], labels[i]});
    std::sort(ex.begin(), ex.end(), [](const Example& a, const Example& b) {
        return a.value < b.value || (a.value == b.value && a.label < b.label);
    });
    std::vector<double> cuts;
    fit_range(ex, 0, ex.size(), &cuts);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

std::size_t transform(double value, const std::vector<double>& cuts) {
    return static_cast<std::size_t>(
        std::distance(cuts.begin(), std::upper_bound(cuts.begin(), cuts.end(), value)));
}

std::size_t DiscretizationMap::n_bins(const std::string& feature) const {
    const auto it = features.find(feature);
    if (it == features.end()) throw DataError("unknown feature in bins: " + feature);
    return it->second.cuts.size() + 1;
}

std::string DiscretizationMap::fingerprint() const {
    json j;
    for (const auto& [name, fb] : features) {
        json e;
        e["cuts"] = fb.cuts;
        e["missing_bin"] = fb.has_missing_bin;
        j[name] = std::move(e);
    }
    return fnv1a64_hex(j.dump());
}

DiscretizationMap fit_all(const FeatureDump& train_dump,
                          const std::map<std::string, ChartType>& label_by_id) {
    if (train_dump.role == "test") {
        throw DataError("refusing to fit bins on a test-role feature dump");
    }
    DiscretizationMap map;
    // gather labeled values per feature, then fit each continuous feature
    struct Acc {
        std::vector<double> values;
        std::vector<int> labels;
        bool saw_missing = false;
    };
    std::map<std::string, Acc> acc;
    for (const auto& defs : {single_feature_defs(), cross_feature_defs()}) {
        for (const auto& d : defs) {
            if (d.kind == FeatureKind::kContinuous) acc[d.name];
        }
    }
    for (const auto& rec : train_dump.records) {
        const auto it = label_by_id.find(rec.id);
        if (it == label_by_id.end()) {
            throw DataError("no chart-type label for pair '" + rec.id + "'");
        }
        const int label = static_cast<int>(it->second);
        const auto& sdefs = single_feature_defs();
        for (const auto& vec : rec.single) {
            for (std::size_t i = 0; i < sdefs.size(); ++i) {
                if (sdefs[i].kind != FeatureKind::kContinuous) continue;
                auto& a = acc[sdefs[i].name];
                if (vec[i]) {
                    a.values.push_back(*vec[i]);
                    a.labels.push_back(label);
                } else {
                    a.saw_missing = true;
                }
            }
        }
        const auto& cdefs = cross_feature_defs();
        for (std::size_t i = 0; i < cdefs.size(); ++i) {
            if (cdefs[i].kind != FeatureKind::kContinuous) continue;
            auto& a = acc[cdefs[i].name];
            if (rec.cross[i]) {
                a.values.push_back(*rec.cross[i]);
                a.labels.push_back(label);
            } else {
                a.saw_missing = true;
            }
        }
    }
    for (auto& [name, a] : acc) {
        FeatureBins fb;
        fb.has_missing_bin = a.saw_missing;
        if (!a.values.empty()) fb.cuts = fit_mdlp(a.values, a.labels);
        map.features[name] = std::move(fb);
    }
    return map;
}

void save_bins(const DiscretizationMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write bins file: " + path);
    json j;
    j["schema"] = "vizbox.bins/1";
    j["fingerprint"] = map.fingerprint();
    json feats;
    for (const auto& [name, fb] : map.features) {
        json e;
        e["cuts"] = fb.cuts;
        e["missing_bin"] = fb.has_missing_bin;
        feats[name] = std::move(e);
    }
    j["features"] = std::move(feats);
    out << j.dump(2) << '\n';
}

DiscretizationMap load_bins(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open bins file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || j.value("schema", "") != "vizbox.bins/1" ||
        !j.contains("features") || !j["features"].is_object()) {
        throw DataError("not a vizbox.bins/1 file: " + path);
    }
    DiscretizationMap map;
    for (const auto& [name, e] : j["features"].items()) {
        if (!single_feature_index(name) && !cross_feature_index(name)) {
            throw DataError("bins file references unknown feature: " + name);
        }
        FeatureBins fb;
        fb.cuts = e.value("cuts", std::vector<double>{});
        if (!std::is_sorted(fb.cuts.begin(), fb.cuts.end())) {
            throw DataError("bins for '" + name + "' are not sorted");
        }
        fb.has_missing_bin = e.value("missing_bin", false);
        map.features[name] = std::move(fb);
    }
    return map;
}

}  // namespace vizbox
