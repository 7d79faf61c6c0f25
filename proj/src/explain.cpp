#include "vizbox/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "vizbox/common.hpp"
#include "vizbox/feature_registry.hpp"

namespace vizbox {

namespace {

constexpr const char* kPhraseSchema = "vizbox.phrases/1";

std::string spaced(const std::string& name) {
    std::string out = name;
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

std::string display_noun(const std::string& feature, const PhraseTable& table) {
    const auto it = table.entries.find(feature);
    if (it != table.entries.end() && !it->second.noun.empty()) return it->second.noun;
    return spaced(feature);
}

std::string type_display(ChartType t) {
    switch (t) {
        case ChartType::kBar: return "Bar chart";
        case ChartType::kLine: return "Line chart";
        case ChartType::kScatter: return "Scatter plot";
        case ChartType::kBox: return "Box plot";
    }
    return "?";
}

std::string join_and(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += " and ";
        out += parts[i];
    }
    return out;
}

struct ParsedLabel {
    std::string name;
    std::string suffix;  // "true" | "false" | "missing" | "b<K>"
};

ParsedLabel parse_label(const std::string& label) {
    const auto pos = label.rfind('=');
    if (pos == std::string::npos) {
        throw std::invalid_argument("not a feature entity label: '" + label + "'");
    }
    return {label.substr(0, pos), label.substr(pos + 1)};
}

}  // namespace

std::vector<ImportanceEntry> feature_importances(const InferenceTrace& trace) {
    std::array<double, 2> column_weight{0.0, 0.0};
    for (const auto& br : trace.dataset.branches) {
        if (br.column == 0 || br.column == 1) column_weight[br.column] = br.weight;
    }
    std::vector<ImportanceEntry> out;
    for (int c = 0; c < 2; ++c) {
        for (const auto& br : trace.columns[static_cast<std::size_t>(c)].branches) {
            out.push_back({br.label, c, br.weight * column_weight[c]});
        }
    }
    for (const auto& br : trace.dataset.branches) {
        if (br.column < 0) out.push_back({br.label, -1, br.weight});
    }
    double sum = 0.0;
    for (const auto& e : out) sum += e.weight;
    if (sum > 0.0) {
        for (auto& e : out) e.weight /= sum;
    }
    return out;
}

const PhraseTable& default_phrase_table() {
    static const PhraseTable table = [] {
        PhraseTable t;
        auto& e = t.entries;
        e["length"] = {{"short", "long"}, "length", ""};
        e["var"] = {{"stable", "spread"}, "variance", ""};
        e["std"] = {{}, "standard deviation", ""};
        e["unique_percent"] = {{}, "share of unique values", ""};
        e["percent_of_mode"] = {{}, "share of the modal value", ""};
        e["num_none"] = {{}, "count of missing entries", ""};
        e["percentage_none"] = {{}, "share of missing entries", ""};
        e["coeff_var"] = {{}, "coefficient of variation", ""};
        e["med_abs_dev"] = {{}, "median absolute deviation", ""};
        e["avg_abs_dev"] = {{}, "average absolute deviation", ""};
        e["quant_coeff_disp"] = {{}, "quartile dispersion", ""};
        e["normality_p"] = {{}, "normality p-value", ""};
        e["q25"] = {{}, "lower quartile", ""};
        e["q75"] = {{}, "upper quartile", ""};
        e["lin_space_seq_coef"] = {{}, "linear-spacing coefficient", ""};
        e["log_space_seq_coef"] = {{}, "log-spacing coefficient", ""};
        e["mean_value_length"] = {{}, "mean text length", ""};
        e["median_value_length"] = {{}, "median text length", ""};
        e["min_length_of_value"] = {{}, "shortest text length", ""};
        e["max_length_of_value"] = {{}, "longest text length", ""};
        e["std_length_of_value"] = {{}, "text length spread", ""};
        e["is_sorted"] = {{}, "", "sorted values"};
        e["is_monotonic"] = {{}, "", "monotonic values"};
        e["is_unique"] = {{}, "", "unique values"};
        e["has_none"] = {{}, "", "missing entries"};
        e["is_lin_space"] = {{}, "", "linearly spaced values"};
        e["is_log_space"] = {{}, "", "log-spaced values"};
        e["has_outliers_15iqr"] = {{}, "", "outliers (1.5 IQR)"};
        e["has_outliers_3iqr"] = {{}, "", "outliers (3 IQR)"};
        e["has_outliers_3std"] = {{}, "", "outliers (3 std)"};
        e["has_outliers_1_99"] = {{}, "", "outliers (1st-99th percentile)"};
        e["is_normal_1"] = {{}, "", "normally distributed values (1% level)"};
        e["is_normal_5"] = {{}, "", "normally distributed values (5% level)"};
        e["first_char_upper_name"] = {{}, "", "a capitalized name"};
        e["x_in_name"] = {{}, "", "'x' in its name"};
        e["y_in_name"] = {{}, "", "'y' in its name"};
        e["id_in_name"] = {{}, "", "'id' in its name"};
        e["time_in_name"] = {{}, "", "'time' in its name"};
        e["digit_in_name"] = {{}, "", "a digit in its name"};
        e["space_in_name"] = {{}, "", "a space in its name"};
        e["dollar_in_name"] = {{}, "", "a currency sign in its name"};
        e["pounds_in_name"] = {{}, "", "a currency sign in its name"};
        e["euro_in_name"] = {{}, "", "a currency sign in its name"};
        e["yen_in_name"] = {{}, "", "a currency sign in its name"};
        e["correlation_value"] = {{}, "correlation", ""};
        e["correlation_p"] = {{}, "correlation p-value", ""};
        e["percent_range_overlap"] = {{}, "range overlap", ""};
        e["percent_shared_elements"] = {{}, "share of common elements", ""};
        e["percent_shared_unique_elements"] = {{}, "share of common unique elements", ""};
        e["percent_shared_words"] = {{}, "share of common words", ""};
        e["num_shared_elements"] = {{}, "count of common elements", ""};
        e["num_shared_unique_elements"] = {{}, "count of common unique elements", ""};
        e["num_shared_words"] = {{}, "count of common words", ""};
        e["linregress_err"] = {{}, "linear-fit error", ""};
        e["linregress_p"] = {{}, "linear-fit p-value", ""};
        e["kmeans_3_avg_err"] = {{}, "3-cluster fit error", ""};
        e["kmeans_5_avg_err"] = {{}, "5-cluster fit error", ""};
        e["kmeans_6_avg_err"] = {{}, "6-cluster fit error", ""};
        e["ks_p"] = {{}, "distribution-difference p-value", ""};
        e["chi2_p"] = {{}, "association p-value", ""};
        e["one_way_anova_p"] = {{}, "group-difference p-value", ""};
        e["edit_distance"] = {{}, "edit distance", ""};
        e["normalized_edit_distance"] = {{}, "normalized edit distance", ""};
        e["nestedness"] = {{}, "nestedness", ""};
        e["has_range_overlap"] = {{}, "", "overlapping ranges"};
        e["has_shared_elements"] = {{}, "", "shared elements"};
        e["has_shared_unique_elements"] = {{}, "", "shared unique elements"};
        e["has_shared_words"] = {{}, "", "shared words"};
        e["identical"] = {{}, "", "identical contents"};
        e["identical_unique"] = {{}, "", "identical unique values"};
        e["chi2_significant_005"] = {{}, "", "a significant association"};
        e["correlation_significant_005"] = {{}, "", "a significant correlation"};
        e["ks_significant_005"] = {{}, "", "a significant distribution difference"};
        e["linregress_significant_005"] = {{}, "", "a significant linear trend"};
        e["one_way_anova_significant_005"] = {{}, "", "a significant group difference"};
        e["categorical_categorical"] = {{}, "", "two categorical columns"};
        e["categorical_numerical"] = {{}, "", "a categorical and a numerical column"};
        e["numerical_numerical"] = {{}, "", "two numerical columns"};
        e["time_categorical"] = {{}, "", "a time and a categorical column"};
        e["time_numerical"] = {{}, "", "a time and a numerical column"};
        e["time_time"] = {{}, "", "two time columns"};
        return t;
    }();
    return table;
}

std::string phrase_table_json() {
    nlohmann::ordered_json j;
    j["schema"] = kPhraseSchema;
    nlohmann::ordered_json feats = nlohmann::ordered_json::object();
    for (const auto& [name, entry] : default_phrase_table().entries) {
        nlohmann::ordered_json e = nlohmann::ordered_json::object();
        if (!entry.pair.empty()) e["pair"] = entry.pair;
        if (!entry.noun.empty()) e["noun"] = entry.noun;
        if (!entry.boolean_phrase.empty()) e["bool"] = entry.boolean_phrase;
        feats[name] = std::move(e);
    }
    j["features"] = std::move(feats);
    return j.dump(2) + "\n";
}

PhraseTable load_phrase_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open phrase table '" + path + "'");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("phrase table '" + path + "': " + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != kPhraseSchema) {
        throw DataError("phrase table '" + path + "' lacks schema '" +
                        std::string(kPhraseSchema) + "'");
    }
    if (!j.contains("features") || !j["features"].is_object()) {
        throw DataError("phrase table '" + path + "' lacks a features object");
    }
    PhraseTable table;
    for (const auto& [name, e] : j["features"].items()) {
        if (!e.is_object()) {
            throw DataError("phrase table entry '" + name + "' is not an object");
        }
        PhraseTable::Entry entry;
        for (const auto& [key, value] : e.items()) {
            if (key == "pair") {
                if (!value.is_array() || value.size() != 2) {
                    throw DataError("phrase table entry '" + name +
                                    "': pair must hold exactly two phrases");
                }
                entry.pair = value.get<std::vector<std::string>>();
            } else if (key == "noun") {
                entry.noun = value.get<std::string>();
            } else if (key == "bool") {
                entry.boolean_phrase = value.get<std::string>();
            } else {
                throw DataError("phrase table entry '" + name + "': unknown key '" + key +
                                "'");
            }
        }
        table.entries[name] = std::move(entry);
    }
    return table;
}

std::string degree_phrase(const std::string& feature, std::size_t bin, std::size_t n_bins,
                          const PhraseTable& table) {
    if (n_bins == 0 || bin >= n_bins) {
        throw std::invalid_argument("bin " + std::to_string(bin) + " out of range for " +
                                    std::to_string(n_bins) + " bins");
    }
    if (n_bins == 1) return "";
    const std::string noun = display_noun(feature, table);
    if (n_bins == 2) {
        const auto it = table.entries.find(feature);
        if (it != table.entries.end() && it->second.pair.size() == 2) {
            return it->second.pair[bin];
        }
        return (bin == 0 ? "low " : "high ") + noun;
    }
    if (n_bins == 3) {
        static const char* kLevels[3] = {"low", "medium", "high"};
        return std::string(kLevels[bin]) + " " + noun;
    }
    // quantile wording: snap the bin's relative position to five anchors,
    // preferring the lower one on an exact tie
    static const char* kAnchors[5] = {"very low", "low", "medium", "high", "very high"};
    const double t = 4.0 * static_cast<double>(bin) / static_cast<double>(n_bins - 1);
    double k = std::floor(t + 0.5);
    if (t + 0.5 == k && k > 0.0) k -= 1.0;
    return std::string(kAnchors[static_cast<std::size_t>(k)]) + " " + noun;
}

std::vector<SelectedFeature> select_features(const std::vector<ImportanceEntry>& importances,
                                             const DiscretizationMap& bins,
                                             const PhraseTable& table, std::size_t max_n,
                                             double importance_floor) {
    std::vector<SelectedFeature> kept;
    for (const auto& entry : importances) {
        const ParsedLabel parsed = parse_label(entry.label);
        const auto idx = entry.column >= 0 ? single_feature_index(parsed.name)
                                           : cross_feature_index(parsed.name);
        if (!idx) continue;
        const auto& def = entry.column >= 0 ? single_feature_defs()[*idx]
                                            : cross_feature_defs()[*idx];
        if (def.blocklisted) continue;
        if (parsed.suffix == "false") continue;    // negative polarity
        if (parsed.suffix == "missing") continue;  // no degree semantics
        if (entry.weight < importance_floor) continue;

        SelectedFeature f;
        f.name = parsed.name;
        f.column = entry.column;
        f.importance = entry.weight;
        if (parsed.suffix == "true") {
            f.boolean_polarity = true;
            const auto it = table.entries.find(parsed.name);
            f.phrase = it != table.entries.end() && !it->second.boolean_phrase.empty()
                           ? it->second.boolean_phrase
                           : spaced(parsed.name);
        } else if (parsed.suffix.size() > 1 && parsed.suffix[0] == 'b') {
            const std::size_t bin = std::stoul(parsed.suffix.substr(1));
            const auto fb = bins.features.find(parsed.name);
            const std::size_t n_bins = fb != bins.features.end() ? fb->second.cuts.size() + 1 : 1;
            f.phrase = bin < n_bins ? degree_phrase(parsed.name, bin, n_bins, table) : "";
        } else {
            throw std::invalid_argument("unrecognized entity suffix in '" + entry.label + "'");
        }
        kept.push_back(std::move(f));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const SelectedFeature& a,
                                                  const SelectedFeature& b) {
        return a.importance > b.importance;
    });
    if (kept.size() > max_n) kept.resize(max_n);
    double sum = 0.0;
    for (const auto& f : kept) sum += f.importance;
    if (sum > 0.0) {
        for (auto& f : kept) f.importance /= sum;
    }
    return kept;
}

std::string render(const std::vector<ChartType>& types,
                   const std::vector<SelectedFeature>& features,
                   const std::array<std::string, 2>& column_names,
                   const PhraseTable& table) {
    std::vector<std::string> names;
    for (ChartType t : types) names.push_back(type_display(t));
    std::string head = join_and(names) + (types.size() > 1 ? " are" : " is") + " recommended";
    if (features.empty()) {
        return head + ", but no feature passed selection (low confidence).";
    }
    std::vector<std::string> clauses;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::string> parts;
        for (const auto& f : features) {
            if (f.column != c) continue;
            parts.push_back(f.phrase.empty() ? display_noun(f.name, table) : f.phrase);
        }
        if (!parts.empty()) {
            clauses.push_back(column_names[static_cast<std::size_t>(c)] + " has " +
                              join_and(parts));
        }
    }
    {
        std::vector<std::string> parts;
        for (const auto& f : features) {
            if (f.column >= 0) continue;
            parts.push_back(f.phrase.empty() ? display_noun(f.name, table) : f.phrase);
        }
        if (!parts.empty()) clauses.push_back("Cross-column has " + join_and(parts));
    }
    std::string tail;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (i > 0) tail += i + 1 == clauses.size() ? ", and " : ", ";
        tail += clauses[i];
    }
    return head + " if " + tail + ".";
}

Explanation explain(const Recommendation& rec, const DiscretizationMap& bins,
                    const PhraseTable& table, std::size_t max_n) {
    Explanation e;
    e.types = rec.recommended;
    e.column_names = rec.column_names;
    e.features = select_features(feature_importances(rec.trace), bins, table, max_n);
    e.low_confidence = e.features.empty();
    e.text = render(e.types, e.features, e.column_names, table);
    return e;
}

nlohmann::ordered_json explanation_json(const Explanation& e) {
    nlohmann::ordered_json types = nlohmann::ordered_json::array();
    for (ChartType t : e.types) types.push_back(to_string(t));
    nlohmann::ordered_json feats = nlohmann::ordered_json::array();
    for (const auto& f : e.features) {
        feats.push_back({{"name", f.name},
                         {"scope", f.column < 0 ? "cross"
                                                : e.column_names[static_cast<std::size_t>(
                                                      f.column)]},
                         {"importance", f.importance},
                         {"phrase", f.phrase}});
    }
    nlohmann::ordered_json out;
    out["types"] = std::move(types);
    out["features"] = std::move(feats);
    out["text"] = e.text;
    out["low_confidence"] = e.low_confidence;
    return out;
}

}  // namespace vizbox
