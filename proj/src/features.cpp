#include "vizbox/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "vizbox/common.hpp"
#include "vizbox/stats.hpp"

namespace vizbox {

using json = nlohmann::ordered_json;
namespace vs = vizbox::stats;

namespace {

std::optional<double> opt(double v) {
    if (std::isnan(v)) return std::nullopt;
    return v;
}

std::optional<double> flag(bool b) { return b ? 1.0 : 0.0; }

bool numeric_type(const Column& c) {
    return c.general_type == GeneralType::kQuantitative ||
           c.general_type == GeneralType::kTemporal;
}

std::vector<std::string> name_words(const std::string& name) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

bool contains_ci(const std::string& hay, const std::string& needle) {
    return to_lower(hay).find(needle) != std::string::npos;
}

// population coefficient of variation of consecutive differences
double seq_coef(const std::vector<double>& v) {
    if (v.size() < 3) return vs::kNaN;
    std::vector<double> diffs;
    for (std::size_t i = 1; i < v.size(); ++i) diffs.push_back(v[i] - v[i - 1]);
    const double m = vs::mean(diffs);
    if (m == 0.0) return vs::kNaN;
    double acc = 0.0;
    for (double d : diffs) acc += (d - m) * (d - m);
    return std::sqrt(acc / static_cast<double>(diffs.size())) / std::fabs(m);
}

constexpr double kLinSpaceTol = 1e-3;

struct SingleBuilder {
    FeatureVector out;

    SingleBuilder() : out(single_feature_defs().size()) {}

    void set(const char* name, std::optional<double> v) {
        const auto idx = single_feature_index(name);
        out[*idx] = v;
    }
};

}  // namespace

FeatureVector extract_single(const Column& col) {
    SingleBuilder b;
    const auto present = col.present_cells();
    const std::size_t n_total = col.cells.size();
    const std::size_t n_present = present.size();
    const bool numeric = numeric_type(col);
    const std::vector<double> vals = numeric ? col.numeric_values() : std::vector<double>{};

    // --- counting / spread over the column's domain values ---
    // (parsed numbers for quantitative, epoch seconds for temporal, raw
    // strings for categorical)
    std::map<std::string, std::size_t> counts_str;
    std::map<double, std::size_t> counts_num;
    if (numeric) {
        for (double v : vals) ++counts_num[v];
    } else {
        for (const auto& c : present) ++counts_str[c];
    }
    const std::size_t domain_n = numeric ? vals.size() : n_present;
    const std::size_t unique_n = numeric ? counts_num.size() : counts_str.size();
    std::vector<std::size_t> freq;
    if (numeric) {
        for (const auto& [_, c] : counts_num) freq.push_back(c);
    } else {
        for (const auto& [_, c] : counts_str) freq.push_back(c);
    }

    if (domain_n > 0) {
        b.set("num_unique_elements", static_cast<double>(unique_n));
        b.set("unique_percent",
              static_cast<double>(unique_n) / static_cast<double>(domain_n));
        b.set("is_unique", flag(unique_n == domain_n));
        const auto eg = vs::shannon_entropy_and_gini(freq);
        b.set("entropy", opt(eg.entropy));
        b.set("gini", opt(eg.gini));
        const std::size_t mode_n = *std::max_element(freq.begin(), freq.end());
        b.set("percent_of_mode",
              static_cast<double>(mode_n) / static_cast<double>(domain_n));
    }

    // --- order over the stored sequence ---
    if (numeric && vals.size() >= 2) {
        std::vector<double> idx(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) idx[i] = static_cast<double>(i);
        const double tau = vs::kendall_tau_b(vals, idx);
        b.set("sortedness", opt(std::isnan(tau) ? vs::kNaN : std::fabs(tau)));
        const bool asc = std::is_sorted(vals.begin(), vals.end());
        const bool desc = std::is_sorted(vals.begin(), vals.end(), std::greater<>());
        b.set("is_sorted", flag(asc));
        b.set("is_monotonic", flag(asc || desc));
    } else if (!numeric && n_present >= 2) {
        std::size_t asc_adj = 0;
        bool asc = true, desc = true;
        for (std::size_t i = 1; i < present.size(); ++i) {
            if (present[i - 1] <= present[i]) ++asc_adj;
            if (present[i - 1] > present[i]) asc = false;
            if (present[i - 1] < present[i]) desc = false;
        }
        b.set("sortedness",
              static_cast<double>(asc_adj) / static_cast<double>(n_present - 1));
        b.set("is_sorted", flag(asc));
        b.set("is_monotonic", flag(asc || desc));
    } else if (domain_n == 1) {
        b.set("sortedness", std::nullopt);
        b.set("is_sorted", flag(true));
        b.set("is_monotonic", flag(true));
    }

    // --- numeric distribution block ---
    if (numeric && !vals.empty()) {
        const std::size_t n = vals.size();
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        const double vmin = sorted.front(), vmax = sorted.back();
        const double vmean = vs::mean(vals);
        const double q25 = vs::quantile_sorted(sorted, 0.25);
        const double q50 = vs::quantile_sorted(sorted, 0.50);
        const double q75 = vs::quantile_sorted(sorted, 0.75);
        b.set("min", vmin);
        b.set("max", vmax);
        b.set("mean", vmean);
        b.set("median", q50);
        b.set("range", vmax - vmin);
        b.set("q25", q25);
        b.set("q75", q75);
        if (vmax != 0.0) {
            b.set("normalized_range", (vmax - vmin) / vmax);
            b.set("normalized_median", q50 / vmax);
            b.set("normalized_mean", vmean / vmax);
        }
        const double denom_qcd = q75 + q25;
        if (denom_qcd != 0.0) b.set("quant_coeff_disp", (q75 - q25) / denom_qcd);
        std::vector<double> absdev;
        absdev.reserve(n);
        for (double v : vals) absdev.push_back(std::fabs(v - q50));
        std::sort(absdev.begin(), absdev.end());
        b.set("med_abs_dev", vs::quantile_sorted(absdev, 0.5));
        b.set("avg_abs_dev", vs::mean(absdev));
        if (n >= 2) {
            const double var = vs::variance_sample(vals);
            const double sd = std::sqrt(var);
            b.set("var", var);
            b.set("std", sd);
            if (vmean != 0.0) b.set("coeff_var", sd / std::fabs(vmean));
            b.set("skewness", opt(vs::skewness(vals)));
            b.set("kurtosis", opt(vs::kurtosis_excess(vals)));
            for (int k = 5; k <= 10; ++k) {
                b.set(("moment_" + std::to_string(k)).c_str(),
                      opt(vs::standardized_moment(vals, k)));
            }
        }
        const double lin = seq_coef(vals);
        b.set("lin_space_seq_coef", opt(lin));
        if (!std::isnan(lin)) b.set("is_lin_space", flag(lin <= kLinSpaceTol));
        if (std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0.0; })) {
            std::vector<double> logs;
            logs.reserve(n);
            for (double v : vals) logs.push_back(std::log(v));
            const double lg = seq_coef(logs);
            b.set("log_space_seq_coef", opt(lg));
            if (!std::isnan(lg)) b.set("is_log_space", flag(lg <= kLinSpaceTol));
        }
        if (n >= 4) {
            const double iqr = q75 - q25;
            const double p01 = vs::quantile_sorted(sorted, 0.01);
            const double p99 = vs::quantile_sorted(sorted, 0.99);
            const double sd = vs::stddev_sample(vals);
            auto frac_outside = [&](double lo, double hi) {
                std::size_t c = 0;
                for (double v : vals) {
                    if (v < lo || v > hi) ++c;
                }
                return static_cast<double>(c) / static_cast<double>(n);
            };
            const double f15 = frac_outside(q25 - 1.5 * iqr, q75 + 1.5 * iqr);
            const double f3 = frac_outside(q25 - 3.0 * iqr, q75 + 3.0 * iqr);
            const double fstd = frac_outside(vmean - 3.0 * sd, vmean + 3.0 * sd);
            const double f199 = frac_outside(p01, p99);
            b.set("percent_outliers_15iqr", f15);
            b.set("percent_outliers_3iqr", f3);
            b.set("percent_outliers_3std", fstd);
            b.set("percent_outliers_1_99", f199);
            b.set("has_outliers_15iqr", flag(f15 > 0.0));
            b.set("has_outliers_3iqr", flag(f3 > 0.0));
            b.set("has_outliers_3std", flag(fstd > 0.0));
            b.set("has_outliers_1_99", flag(f199 > 0.0));
        }
        const auto norm = vs::normality_test(vals);
        if (norm.valid) {
            b.set("normality_statistic", norm.statistic);
            b.set("normality_p", norm.p_value);
            b.set("is_normal_1", flag(norm.p_value > 0.01));
            b.set("is_normal_5", flag(norm.p_value > 0.05));
        }
    }

    // --- presence ---
    b.set("length", static_cast<double>(n_total));
    const std::size_t n_missing = n_total - n_present;
    b.set("num_none", static_cast<double>(n_missing));
    b.set("percentage_none",
          n_total ? static_cast<double>(n_missing) / static_cast<double>(n_total) : 0.0);
    b.set("has_none", flag(n_missing > 0));

    // --- raw value lengths ---
    if (n_present > 0) {
        std::vector<double> lens;
        lens.reserve(n_present);
        for (const auto& c : present) lens.push_back(static_cast<double>(c.size()));
        std::vector<double> sorted_lens = lens;
        std::sort(sorted_lens.begin(), sorted_lens.end());
        b.set("mean_value_length", vs::mean(lens));
        b.set("median_value_length", vs::quantile_sorted(sorted_lens, 0.5));
        b.set("min_length_of_value", sorted_lens.front());
        b.set("max_length_of_value", sorted_lens.back());
        if (n_present >= 2) b.set("std_length_of_value", vs::stddev_sample(lens));
    }

    // --- type flags ---
    b.set("data_type_is_string", flag(col.data_type == DataType::kString));
    b.set("data_type_is_integer", flag(col.data_type == DataType::kInteger));
    b.set("data_type_is_decimal", flag(col.data_type == DataType::kDecimal));
    b.set("data_type_is_datetime", flag(col.data_type == DataType::kDatetime));
    b.set("general_type_is_t", flag(col.general_type == GeneralType::kTemporal));
    b.set("general_type_is_q", flag(col.general_type == GeneralType::kQuantitative));
    b.set("general_type_is_c", flag(col.general_type == GeneralType::kCategorical));

    // --- name features ---
    const std::string& name = col.name;
    b.set("name_length", static_cast<double>(name.size()));
    b.set("field_name_length", static_cast<double>(trim(name).size()));
    b.set("number_of_words_in_name", static_cast<double>(name_words(name).size()));
    b.set("number_of_uppercase_char",
          static_cast<double>(std::count_if(name.begin(), name.end(), [](unsigned char c) {
              return std::isupper(c);
          })));
    b.set("first_char_upper_name",
          flag(!name.empty() && std::isupper(static_cast<unsigned char>(name[0]))));
    b.set("x_in_name", flag(contains_ci(name, "x")));
    b.set("y_in_name", flag(contains_ci(name, "y")));
    b.set("id_in_name", flag(contains_ci(name, "id")));
    b.set("time_in_name", flag(contains_ci(name, "time")));
    b.set("digit_in_name", flag(std::any_of(name.begin(), name.end(), [](unsigned char c) {
              return std::isdigit(c);
          })));
    b.set("space_in_name", flag(std::any_of(name.begin(), name.end(), [](unsigned char c) {
              return std::isspace(c);
          })));
    b.set("dollar_in_name", flag(name.find('$') != std::string::npos));
    b.set("pounds_in_name", flag(name.find("\xc2\xa3") != std::string::npos));
    b.set("euro_in_name", flag(name.find("\xe2\x82\xac") != std::string::npos));
    b.set("yen_in_name", flag(name.find("\xc2\xa5") != std::string::npos));

    return b.out;
}

namespace {

struct CrossBuilder {
    FeatureVector out;

    CrossBuilder() : out(cross_feature_defs().size()) {}

    void set(const char* name, std::optional<double> v) {
        const auto idx = cross_feature_index(name);
        out[*idx] = v;
    }
};

// rows where both cells parse to the column's numeric domain
std::pair<std::vector<double>, std::vector<double>> paired_numeric(const Column& a,
                                                                   const Column& b) {
    std::vector<double> xa, xb;
    const std::size_t n = std::min(a.numeric.size(), b.numeric.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.numeric[i] && b.numeric[i]) {
            xa.push_back(*a.numeric[i]);
            xb.push_back(*b.numeric[i]);
        }
    }
    return {std::move(xa), std::move(xb)};
}

std::vector<double> standardized(const std::vector<double>& v) {
    const double m = vs::mean(v);
    const double sd = vs::stddev_sample(v);
    std::vector<double> out(v.size(), 0.0);
    if (!std::isnan(sd) && sd > 0.0) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
    }
    return out;
}

// quartile bucket index (0..3) against precomputed edges
std::size_t quartile_bucket(double v, const std::array<double, 3>& edges) {
    if (v <= edges[0]) return 0;
    if (v <= edges[1]) return 1;
    if (v <= edges[2]) return 2;
    return 3;
}

// fraction of groups (keyed by parent value) whose child values are constant
double determination_score(const std::vector<std::string>& parent,
                           const std::vector<std::string>& child) {
    std::map<std::string, std::set<std::string>> groups;
    for (std::size_t i = 0; i < parent.size(); ++i) groups[parent[i]].insert(child[i]);
    if (groups.empty()) return vs::kNaN;
    std::size_t consistent = 0;
    for (const auto& [_, vals] : groups) {
        if (vals.size() == 1) ++consistent;
    }
    return static_cast<double>(consistent) / static_cast<double>(groups.size());
}

}  // namespace

FeatureVector extract_cross(const Column& a, const Column& b) {
    CrossBuilder cb;
    const auto pa = a.present_cells();
    const auto pb = b.present_cells();

    // --- raw shared elements ---
    if (!pa.empty() && !pb.empty()) {
        std::map<std::string, std::size_t> ca, cbn;
        for (const auto& v : pa) ++ca[v];
        for (const auto& v : pb) ++cbn[v];
        std::size_t shared = 0;
        for (const auto& [v, n] : ca) {
            const auto it = cbn.find(v);
            if (it != cbn.end()) shared += std::min(n, it->second);
        }
        cb.set("num_shared_elements", static_cast<double>(shared));
        cb.set("percent_shared_elements",
               static_cast<double>(shared) /
                   static_cast<double>(std::max(pa.size(), pb.size())));
        cb.set("has_shared_elements", flag(shared > 0));
        std::set<std::string> sa(pa.begin(), pa.end()), sb(pb.begin(), pb.end());
        std::vector<std::string> inter;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::back_inserter(inter));
        std::set<std::string> uni = sa;
        uni.insert(sb.begin(), sb.end());
        cb.set("num_shared_unique_elements", static_cast<double>(inter.size()));
        cb.set("percent_shared_unique_elements",
               static_cast<double>(inter.size()) / static_cast<double>(uni.size()));
        cb.set("has_shared_unique_elements", flag(!inter.empty()));
        cb.set("identical_unique", flag(sa == sb));
    }
    cb.set("identical", flag(a.cells == b.cells));

    // --- name words / distances ---
    {
        const auto wa = name_words(a.name);
        const auto wb = name_words(b.name);
        std::set<std::string> sa(wa.begin(), wa.end()), sb(wb.begin(), wb.end());
        std::vector<std::string> inter;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::back_inserter(inter));
        std::set<std::string> uni = sa;
        uni.insert(sb.begin(), sb.end());
        cb.set("num_shared_words", static_cast<double>(inter.size()));
        if (!uni.empty()) {
            cb.set("percent_shared_words",
                   static_cast<double>(inter.size()) / static_cast<double>(uni.size()));
        }
        cb.set("has_shared_words", flag(!inter.empty()));
        const std::size_t ed = vs::levenshtein(a.name, b.name);
        cb.set("edit_distance", static_cast<double>(ed));
        const std::size_t longest = std::max(a.name.size(), b.name.size());
        cb.set("normalized_edit_distance",
               longest ? static_cast<double>(ed) / static_cast<double>(longest) : 0.0);
    }

    // --- nestedness over raw paired rows ---
    {
        std::vector<std::string> ra, rb;
        const std::size_t n = std::min(a.cells.size(), b.cells.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!is_missing_cell(a.cells[i]) && !is_missing_cell(b.cells[i])) {
                ra.push_back(a.cells[i]);
                rb.push_back(b.cells[i]);
            }
        }
        if (!ra.empty()) {
            cb.set("nestedness",
                   std::max(determination_score(ra, rb), determination_score(rb, ra)));
        }
        // chi-squared over bucketed paired rows
        if (!ra.empty()) {
            auto buckets = [&](const Column& col, const std::vector<std::string>& raw,
                               std::vector<std::size_t>* out) {
                if (!numeric_type(col)) {
                    std::map<std::string, std::size_t> ids;
                    for (const auto& v : raw) ids.emplace(v, ids.size());
                    for (const auto& v : raw) out->push_back(ids[v]);
                    return ids.size();
                }
                std::vector<double> vals;
                for (const auto& v : raw) {
                    const auto parsed = col.general_type == GeneralType::kTemporal
                                            ? parse_datetime_cell(v)
                                            : parse_decimal_cell(v);
                    vals.push_back(parsed ? *parsed : vs::kNaN);
                }
                std::vector<double> clean;
                for (double v : vals) {
                    if (!std::isnan(v)) clean.push_back(v);
                }
                if (clean.empty()) return std::size_t{0};
                std::sort(clean.begin(), clean.end());
                const std::array<double, 3> edges{vs::quantile_sorted(clean, 0.25),
                                                  vs::quantile_sorted(clean, 0.5),
                                                  vs::quantile_sorted(clean, 0.75)};
                for (double v : vals) {
                    out->push_back(std::isnan(v) ? 0 : quartile_bucket(v, edges));
                }
                return std::size_t{4};
            };
            std::vector<std::size_t> bucket_a, bucket_b;
            const std::size_t ka = buckets(a, ra, &bucket_a);
            const std::size_t kb = buckets(b, rb, &bucket_b);
            if (ka >= 2 && kb >= 2 && bucket_a.size() == bucket_b.size()) {
                std::vector<std::vector<std::size_t>> table(ka,
                                                            std::vector<std::size_t>(kb, 0));
                for (std::size_t i = 0; i < bucket_a.size(); ++i) {
                    ++table[bucket_a[i]][bucket_b[i]];
                }
                const auto chi = vs::chi2_contingency(table);
                if (chi.valid) {
                    cb.set("chi2_statistic", chi.statistic);
                    cb.set("chi2_p", chi.p_value);
                    cb.set("chi2_significant_005", flag(chi.p_value < 0.05));
                }
            }
        }
    }

    // --- numeric cross statistics ---
    if (numeric_type(a) && numeric_type(b)) {
        const auto va = a.numeric_values();
        const auto vb = b.numeric_values();
        if (!va.empty() && !vb.empty()) {
            const double min_a = *std::min_element(va.begin(), va.end());
            const double max_a = *std::max_element(va.begin(), va.end());
            const double min_b = *std::min_element(vb.begin(), vb.end());
            const double max_b = *std::max_element(vb.begin(), vb.end());
            const double overlap = std::min(max_a, max_b) - std::max(min_a, min_b);
            const double span = std::max(max_a, max_b) - std::min(min_a, min_b);
            cb.set("has_range_overlap", flag(overlap > 0.0));
            if (span > 0.0) {
                cb.set("percent_range_overlap", std::max(0.0, overlap) / span);
            } else {
                cb.set("percent_range_overlap", overlap >= 0.0 ? 1.0 : 0.0);
            }
        }
        const auto [xa, xb] = paired_numeric(a, b);
        const auto pear = vs::pearson(xa, xb);
        if (pear.valid) {
            cb.set("correlation_value", pear.r);
            cb.set("correlation_p", pear.p_value);
            cb.set("correlation_significant_005", flag(pear.p_value < 0.05));
        }
        const auto lr = vs::linregress(xa, xb);
        if (lr.valid) {
            cb.set("linregress_err", lr.rmse);
            cb.set("linregress_p", lr.p_value);
            cb.set("linregress_significant_005", flag(lr.p_value < 0.05));
        }
        if (xa.size() >= 3) {
            const auto za = standardized(xa);
            const auto zb = standardized(xb);
            std::vector<std::pair<double, double>> pts;
            pts.reserve(za.size());
            for (std::size_t i = 0; i < za.size(); ++i) pts.emplace_back(za[i], zb[i]);
            for (std::size_t k : {std::size_t{3}, std::size_t{5}, std::size_t{6}}) {
                const double err = vs::kmeans_avg_err(pts, k);
                cb.set(("kmeans_" + std::to_string(k) + "_avg_err").c_str(), opt(err));
            }
        }
        const auto ks = vs::ks_two_sample(va, vb);
        if (ks.valid) {
            cb.set("ks_statistic", ks.statistic);
            cb.set("ks_p", ks.p_value);
            cb.set("ks_significant_005", flag(ks.p_value < 0.05));
        }
        const auto an = vs::anova_two_groups(va, vb);
        if (an.valid) {
            cb.set("one_way_anova_statistic", an.f_statistic);
            cb.set("one_way_anova_p", an.p_value);
            cb.set("one_way_anova_significant_005", flag(an.p_value < 0.05));
        }
    }

    // --- type-combination flags ---
    const GeneralType ta = a.general_type, tb = b.general_type;
    auto is_c = [](GeneralType t) { return t == GeneralType::kCategorical; };
    auto is_q = [](GeneralType t) { return t == GeneralType::kQuantitative; };
    auto is_t = [](GeneralType t) { return t == GeneralType::kTemporal; };
    cb.set("categorical_categorical", flag(is_c(ta) && is_c(tb)));
    cb.set("categorical_numerical", flag((is_c(ta) && is_q(tb)) || (is_q(ta) && is_c(tb))));
    cb.set("numerical_numerical", flag(is_q(ta) && is_q(tb)));
    cb.set("time_categorical", flag((is_t(ta) && is_c(tb)) || (is_c(ta) && is_t(tb))));
    cb.set("time_numerical", flag((is_t(ta) && is_q(tb)) || (is_q(ta) && is_t(tb))));
    cb.set("time_time", flag(is_t(ta) && is_t(tb)));

    return cb.out;
}

PairFeatures extract_pair(const Pair& pair) {
    PairFeatures pf;
    pf.id = pair.id;
    pf.column_names = {pair.columns[0].name, pair.columns[1].name};
    pf.single = {extract_single(pair.columns[0]), extract_single(pair.columns[1])};
    pf.cross = extract_cross(pair.columns[0], pair.columns[1]);
    return pf;
}

// --- dump IO ---------------------------------------------------------------

namespace {

json vector_to_json(const FeatureVector& v, const std::vector<FeatureDef>& defs) {
    json out;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (v[i]) {
            out[defs[i].name] = *v[i];
        } else {
            out[defs[i].name] = nullptr;
        }
    }
    return out;
}

FeatureVector vector_from_json(const json& j, FeatureScope scope) {
    const auto& defs =
        scope == FeatureScope::kSingle ? single_feature_defs() : cross_feature_defs();
    FeatureVector v(defs.size());
    for (const auto& [name, val] : j.items()) {
        const auto idx = scope == FeatureScope::kSingle ? single_feature_index(name)
                                                        : cross_feature_index(name);
        if (!idx) throw DataError("unknown feature in dump: " + name);
        if (!val.is_null()) v[*idx] = val.get<double>();
    }
    return v;
}

}  // namespace

void save_features(const FeatureDump& dump, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write features file: " + path);
    json header;
    header["schema"] = "vizbox.features/1";
    header["role"] = dump.role;
    out << header.dump() << '\n';
    for (const auto& rec : dump.records) {
        json j;
        j["id"] = rec.id;
        json single;
        for (std::size_t i = 0; i < 2; ++i) {
            std::string key = rec.column_names[i];
            if (i == 1 && key == rec.column_names[0]) key += "#2";
            single[key] = vector_to_json(rec.single[i], single_feature_defs());
        }
        j["single"] = std::move(single);
        j["cross"] = vector_to_json(rec.cross, cross_feature_defs());
        out << j.dump() << '\n';
    }
}

FeatureDump load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open features file: " + path);
    FeatureDump dump;
    std::string line;
    if (!std::getline(in, line)) throw DataError("features file is empty: " + path);
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object() ||
        header.value("schema", "") != "vizbox.features/1") {
        throw DataError("features file has no vizbox.features/1 header: " + path);
    }
    dump.role = header.value("role", "unspecified");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
            !j.contains("single") || !j.contains("cross") || j["single"].size() != 2) {
            throw DataError("bad feature record at line " + std::to_string(lineno));
        }
        PairFeatures rec;
        rec.id = j["id"].get<std::string>();
        std::size_t ci = 0;
        for (const auto& [name, fv] : j["single"].items()) {
            std::string clean = name;
            if (ci == 1 && clean.size() > 2 && clean.ends_with("#2")) {
                clean.resize(clean.size() - 2);
            }
            rec.column_names[ci] = clean;
            rec.single[ci] = vector_from_json(fv, FeatureScope::kSingle);
            ++ci;
        }
        rec.cross = vector_from_json(j["cross"], FeatureScope::kCross);
        dump.records.push_back(std::move(rec));
    }
    return dump;
}

}  // namespace vizbox
