#include "vizbox/feature_registry.hpp"

#include <map>

#include <json.hpp>

namespace vizbox {

namespace {

constexpr FeatureKind kCont = FeatureKind::kContinuous;
constexpr FeatureKind kBool = FeatureKind::kBoolean;

struct Row {
    const char* name;
    FeatureKind kind;
    bool blocklisted;
};

// 80 single-column features
const Row kSingleRows[] = {
    {"num_unique_elements", kCont, false},
    {"sortedness", kCont, false},
    {"unique_percent", kCont, false},
    {"percent_outliers_15iqr", kCont, false},
    {"percent_outliers_3iqr", kCont, false},
    {"percent_outliers_3std", kCont, false},
    {"percent_outliers_1_99", kCont, false},
    {"entropy", kCont, true},
    {"gini", kCont, true},
    {"skewness", kCont, false},
    {"kurtosis", kCont, true},
    {"moment_5", kCont, true},
    {"moment_6", kCont, true},
    {"moment_7", kCont, true},
    {"moment_8", kCont, true},
    {"moment_9", kCont, true},
    {"moment_10", kCont, true},
    {"lin_space_seq_coef", kCont, false},
    {"log_space_seq_coef", kCont, false},
    {"quant_coeff_disp", kCont, false},
    {"med_abs_dev", kCont, false},
    {"avg_abs_dev", kCont, false},
    {"coeff_var", kCont, false},
    {"std", kCont, false},
    {"var", kCont, false},
    {"normality_p", kCont, false},
    {"normality_statistic", kCont, true},
    {"normalized_range", kCont, false},
    {"range", kCont, false},
    {"q25", kCont, false},
    {"q75", kCont, false},
    {"normalized_median", kCont, false},
    {"normalized_mean", kCont, false},
    {"min", kCont, false},
    {"max", kCont, false},
    {"mean", kCont, false},
    {"median", kCont, false},
    {"length", kCont, false},
    {"percent_of_mode", kCont, false},
    {"num_none", kCont, false},
    {"percentage_none", kCont, false},
    {"mean_value_length", kCont, false},
    {"median_value_length", kCont, false},
    {"min_length_of_value", kCont, false},
    {"std_length_of_value", kCont, false},
    {"max_length_of_value", kCont, false},
    {"has_none", kBool, false},
    {"is_monotonic", kBool, false},
    {"is_sorted", kBool, false},
    {"is_unique", kBool, false},
    {"is_lin_space", kBool, false},
    {"is_log_space", kBool, false},
    {"has_outliers_15iqr", kBool, false},
    {"has_outliers_3iqr", kBool, false},
    {"has_outliers_3std", kBool, false},
    {"has_outliers_1_99", kBool, false},
    {"is_normal_1", kBool, false},
    {"is_normal_5", kBool, false},
    {"number_of_words_in_name", kCont, false},
    {"number_of_uppercase_char", kCont, false},
    {"name_length", kCont, false},
    {"field_name_length", kCont, false},
    {"data_type_is_string", kBool, false},
    {"data_type_is_integer", kBool, false},
    {"data_type_is_decimal", kBool, false},
    {"data_type_is_datetime", kBool, false},
    {"general_type_is_t", kBool, false},
    {"general_type_is_q", kBool, false},
    {"general_type_is_c", kBool, false},
    {"first_char_upper_name", kBool, false},
    {"x_in_name", kBool, false},
    {"y_in_name", kBool, false},
    {"id_in_name", kBool, false},
    {"time_in_name", kBool, false},
    {"digit_in_name", kBool, false},
    {"space_in_name", kBool, false},
    {"dollar_in_name", kBool, false},
    {"pounds_in_name", kBool, false},
    {"euro_in_name", kBool, false},
    {"yen_in_name", kBool, false},
};

// 40 cross-column features
const Row kCrossRows[] = {
    {"percent_shared_elements", kCont, false},
    {"percent_shared_unique_elements", kCont, false},
    {"num_shared_elements", kCont, false},
    {"num_shared_unique_elements", kCont, false},
    {"num_shared_words", kCont, false},
    {"percent_shared_words", kCont, false},
    {"percent_range_overlap", kCont, false},
    {"has_range_overlap", kBool, false},
    {"has_shared_elements", kBool, false},
    {"has_shared_unique_elements", kBool, false},
    {"has_shared_words", kBool, false},
    {"identical", kBool, false},
    {"identical_unique", kBool, false},
    {"linregress_err", kCont, false},
    {"linregress_p", kCont, false},
    {"kmeans_3_avg_err", kCont, false},
    {"kmeans_5_avg_err", kCont, false},
    {"kmeans_6_avg_err", kCont, false},
    {"correlation_value", kCont, false},
    {"correlation_p", kCont, false},
    {"ks_p", kCont, false},
    {"chi2_p", kCont, false},
    {"one_way_anova_p", kCont, false},
    {"ks_statistic", kCont, true},
    {"chi2_statistic", kCont, true},
    {"one_way_anova_statistic", kCont, true},
    {"edit_distance", kCont, false},
    {"normalized_edit_distance", kCont, false},
    {"nestedness", kCont, false},
    {"chi2_significant_005", kBool, false},
    {"correlation_significant_005", kBool, false},
    {"ks_significant_005", kBool, false},
    {"linregress_significant_005", kBool, false},
    {"one_way_anova_significant_005", kBool, false},
    {"categorical_categorical", kBool, false},
    {"categorical_numerical", kBool, false},
    {"numerical_numerical", kBool, false},
    {"time_categorical", kBool, false},
    {"time_numerical", kBool, false},
    {"time_time", kBool, false},
};

std::vector<FeatureDef> build(const Row* rows, std::size_t n, FeatureScope scope) {
    std::vector<FeatureDef> defs;
    defs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        defs.push_back({rows[i].name, scope, rows[i].kind, rows[i].blocklisted});
    }
    return defs;
}

std::map<std::string, std::size_t> index_map(const std::vector<FeatureDef>& defs) {
    std::map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < defs.size(); ++i) m[defs[i].name] = i;
    return m;
}

}  // namespace

const std::vector<FeatureDef>& single_feature_defs() {
    static const auto defs =
        build(kSingleRows, sizeof(kSingleRows) / sizeof(Row), FeatureScope::kSingle);
    return defs;
}

const std::vector<FeatureDef>& cross_feature_defs() {
    static const auto defs =
        build(kCrossRows, sizeof(kCrossRows) / sizeof(Row), FeatureScope::kCross);
    return defs;
}

std::optional<std::size_t> single_feature_index(const std::string& name) {
    static const auto m = index_map(single_feature_defs());
    const auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> cross_feature_index(const std::string& name) {
    static const auto m = index_map(cross_feature_defs());
    const auto it = m.find(name);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::string registry_json() {
    nlohmann::ordered_json j;
    j["schema"] = "vizbox.registry/1";
    for (const char* section : {"single", "cross"}) {
        const auto& defs =
            (std::string(section) == "single") ? single_feature_defs() : cross_feature_defs();
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& d : defs) {
            nlohmann::ordered_json f;
            f["name"] = d.name;
            f["kind"] = d.kind == FeatureKind::kBoolean ? "boolean" : "continuous";
            if (d.blocklisted) f["blocklisted"] = true;
            arr.push_back(std::move(f));
        }
        j[section] = std::move(arr);
    }
    return j.dump(2) + "\n";
}

}  // namespace vizbox
