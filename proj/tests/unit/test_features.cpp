#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <set>
#include <fstream>

#include "vizbox/common.hpp"
#include "vizbox/features.hpp"

using namespace vizbox;

namespace {

double fval(const FeatureVector& v, const char* name, FeatureScope scope = FeatureScope::kSingle) {
    const auto idx = scope == FeatureScope::kSingle ? single_feature_index(name)
                                                    : cross_feature_index(name);
    REQUIRE(idx.has_value());
    REQUIRE(v[*idx].has_value());
    return *v[*idx];
}

bool fmissing(const FeatureVector& v, const char* name,
              FeatureScope scope = FeatureScope::kSingle) {
    const auto idx = scope == FeatureScope::kSingle ? single_feature_index(name)
                                                    : cross_feature_index(name);
    REQUIRE(idx.has_value());
    return !v[*idx].has_value();
}

}  // namespace

TEST_CASE("registry shape: 80 single + 40 cross, fixed kinds and blocklist") {
    const auto& s = single_feature_defs();
    const auto& c = cross_feature_defs();
    CHECK(s.size() == 80);
    CHECK(c.size() == 40);
    std::size_t sbool = 0, cbool = 0, blocked = 0;
    for (const auto& d : s) {
        if (d.kind == FeatureKind::kBoolean) ++sbool;
        if (d.blocklisted) ++blocked;
    }
    for (const auto& d : c) {
        if (d.kind == FeatureKind::kBoolean) ++cbool;
        if (d.blocklisted) ++blocked;
    }
    CHECK(sbool == 30);
    CHECK(cbool == 17);
    CHECK(blocked == 13);
    // the spread statistics that never make good explanations
    for (const char* name : {"entropy", "gini", "kurtosis", "moment_5", "moment_6", "moment_7",
                             "moment_8", "moment_9", "moment_10", "normality_statistic"}) {
        CHECK(s[*single_feature_index(name)].blocklisted);
    }
    for (const char* name : {"ks_statistic", "chi2_statistic", "one_way_anova_statistic"}) {
        CHECK(c[*cross_feature_index(name)].blocklisted);
    }
    CHECK(single_feature_index("num_unique_elements").value() == 0);
    CHECK_FALSE(single_feature_index("not_a_feature"));
    // no duplicate names
    std::set<std::string> names;
    for (const auto& d : s) names.insert(d.name);
    for (const auto& d : c) names.insert(d.name);
    CHECK(names.size() == 120);
}

TEST_CASE("single features on a small integer column") {
    const auto col = make_column("Amount", {"1", "2", "3", "100"});
    const auto f = extract_single(col);
    CHECK(f.size() == 80);

    CHECK(fval(f, "num_unique_elements") == 4.0);
    CHECK(fval(f, "unique_percent") == 1.0);
    CHECK(fval(f, "is_unique") == 1.0);
    CHECK(fval(f, "length") == 4.0);
    CHECK(fval(f, "num_none") == 0.0);
    CHECK(fval(f, "has_none") == 0.0);

    CHECK(fval(f, "min") == 1.0);
    CHECK(fval(f, "max") == 100.0);
    CHECK(fval(f, "mean") == 26.5);
    CHECK(fval(f, "median") == 2.5);
    CHECK(fval(f, "range") == 99.0);
    CHECK(fval(f, "q25") == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(fval(f, "q75") == doctest::Approx(27.25).epsilon(1e-12));
    CHECK(fval(f, "quant_coeff_disp") == doctest::Approx(0.8793103448275862).epsilon(1e-12));
    CHECK(fval(f, "normalized_mean") == doctest::Approx(0.265).epsilon(1e-12));

    CHECK(fval(f, "percent_outliers_15iqr") == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fval(f, "percent_outliers_3iqr") == 0.0);
    CHECK(fval(f, "percent_outliers_3std") == 0.0);
    CHECK(fval(f, "percent_outliers_1_99") == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fval(f, "has_outliers_15iqr") == 1.0);
    CHECK(fval(f, "has_outliers_3std") == 0.0);

    CHECK(fval(f, "skewness") == doctest::Approx(1.1537390557978817).epsilon(1e-10));
    CHECK(fval(f, "std") == doctest::Approx(49.00680224893955).epsilon(1e-10));
    CHECK(fval(f, "coeff_var") == doctest::Approx(1.8493132924128133).epsilon(1e-10));
    CHECK(fval(f, "med_abs_dev") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fval(f, "avg_abs_dev") == doctest::Approx(25.0).epsilon(1e-12));

    CHECK(fval(f, "sortedness") == doctest::Approx(1.0));
    CHECK(fval(f, "is_sorted") == 1.0);
    CHECK(fval(f, "is_monotonic") == 1.0);

    CHECK(fmissing(f, "normality_p"));  // n < 8
    CHECK(fmissing(f, "is_normal_5"));

    CHECK(fval(f, "data_type_is_integer") == 1.0);
    CHECK(fval(f, "data_type_is_string") == 0.0);
    CHECK(fval(f, "general_type_is_q") == 1.0);
    CHECK(fval(f, "general_type_is_c") == 0.0);

    CHECK(fval(f, "mean_value_length") == doctest::Approx(1.5));
    CHECK(fval(f, "min_length_of_value") == 1.0);
    CHECK(fval(f, "max_length_of_value") == 3.0);

    // name "Amount": 6 chars, first upper, no x, no digits
    CHECK(fval(f, "name_length") == 6.0);
    CHECK(fval(f, "first_char_upper_name") == 1.0);
    CHECK(fval(f, "number_of_uppercase_char") == 1.0);
    CHECK(fval(f, "number_of_words_in_name") == 1.0);
    CHECK(fval(f, "x_in_name") == 0.0);
    CHECK(fval(f, "digit_in_name") == 0.0);
}

TEST_CASE("single features: missing cells and linear spacing") {
    const auto col = make_column("y pos$2", {"1.5", "", "2.5", "null", "3.5"});
    const auto f = extract_single(col);
    CHECK(fval(f, "length") == 5.0);
    CHECK(fval(f, "num_none") == 2.0);
    CHECK(fval(f, "percentage_none") == doctest::Approx(0.4));
    CHECK(fval(f, "has_none") == 1.0);
    CHECK(fval(f, "mean") == doctest::Approx(2.5));
    CHECK(fval(f, "lin_space_seq_coef") == doctest::Approx(0.0));
    CHECK(fval(f, "is_lin_space") == 1.0);
    CHECK(fval(f, "is_log_space") == 0.0);  // log spacing is not constant here
    CHECK(fval(f, "data_type_is_decimal") == 1.0);
    CHECK(fval(f, "y_in_name") == 1.0);
    CHECK(fval(f, "space_in_name") == 1.0);
    CHECK(fval(f, "digit_in_name") == 1.0);
    CHECK(fval(f, "dollar_in_name") == 1.0);
    CHECK(fval(f, "number_of_words_in_name") == 3.0);  // y, pos, 2
}

TEST_CASE("single features on a categorical column") {
    const auto col = make_column("team", {"b", "a", "b", "c"});
    const auto f = extract_single(col);
    CHECK(fval(f, "num_unique_elements") == 3.0);
    CHECK(fval(f, "entropy") == doctest::Approx(1.0397207708399179).epsilon(1e-12));
    CHECK(fval(f, "gini") == doctest::Approx(0.625).epsilon(1e-12));
    CHECK(fval(f, "percent_of_mode") == doctest::Approx(0.5));
    CHECK(fval(f, "sortedness") == doctest::Approx(2.0 / 3.0));  // a<=b, b<=c of 3 steps
    CHECK(fval(f, "is_sorted") == 0.0);
    CHECK(fval(f, "general_type_is_c") == 1.0);
    // numeric block is off the table for categorical data
    CHECK(fmissing(f, "mean"));
    CHECK(fmissing(f, "skewness"));
    CHECK(fmissing(f, "percent_outliers_15iqr"));
    CHECK(fmissing(f, "lin_space_seq_coef"));
    CHECK(fmissing(f, "is_lin_space"));
    CHECK(fval(f, "mean_value_length") == 1.0);
}

TEST_CASE("single features on a temporal column") {
    const auto col = make_column("date", {"2020-01-01", "2020-01-02", "2020-01-03"});
    const auto f = extract_single(col);
    CHECK(fval(f, "general_type_is_t") == 1.0);
    CHECK(fval(f, "data_type_is_datetime") == 1.0);
    CHECK(fval(f, "is_lin_space") == 1.0);  // exactly one day apart
    CHECK(fval(f, "is_sorted") == 1.0);
    CHECK(fval(f, "range") == doctest::Approx(2 * 86400.0));
    CHECK(fval(f, "time_in_name") == 0.0);
}

TEST_CASE("cross features: identical numeric columns") {
    const auto a = make_column("x", {"1", "2", "3"});
    const auto b = make_column("x2", {"1", "2", "3"});
    const auto f = extract_cross(a, b);
    CHECK(f.size() == 40);
    CHECK(fval(f, "identical", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "identical_unique", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "num_shared_elements", FeatureScope::kCross) == 3.0);
    CHECK(fval(f, "percent_shared_elements", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "num_shared_unique_elements", FeatureScope::kCross) == 3.0);
    CHECK(fval(f, "correlation_value", FeatureScope::kCross) == doctest::Approx(1.0));
    CHECK(fval(f, "correlation_p", FeatureScope::kCross) == 0.0);
    CHECK(fval(f, "correlation_significant_005", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "linregress_err", FeatureScope::kCross) == doctest::Approx(0.0));
    CHECK(fval(f, "ks_statistic", FeatureScope::kCross) == 0.0);
    CHECK(fval(f, "ks_p", FeatureScope::kCross) == doctest::Approx(1.0));
    CHECK(fval(f, "nestedness", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "numerical_numerical", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "categorical_numerical", FeatureScope::kCross) == 0.0);
    CHECK(fval(f, "percent_range_overlap", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "kmeans_3_avg_err", FeatureScope::kCross) == doctest::Approx(0.0));
}

TEST_CASE("cross features: categorical vs quantitative") {
    const auto a = make_column("group", {"a", "a", "b", "b"});
    const auto b = make_column("value", {"1", "1", "2", "2"});
    const auto f = extract_cross(a, b);
    CHECK(fval(f, "categorical_numerical", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "nestedness", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "chi2_statistic", FeatureScope::kCross) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(fval(f, "chi2_p", FeatureScope::kCross) ==
          doctest::Approx(0.04550026389635857).epsilon(1e-9));
    CHECK(fval(f, "chi2_significant_005", FeatureScope::kCross) == 1.0);
    // numeric-numeric statistics don't apply
    CHECK(fmissing(f, "correlation_value", FeatureScope::kCross));
    CHECK(fmissing(f, "ks_p", FeatureScope::kCross));
    CHECK(fmissing(f, "percent_range_overlap", FeatureScope::kCross));
    CHECK(fmissing(f, "kmeans_3_avg_err", FeatureScope::kCross));
}

TEST_CASE("cross features: names and ranges") {
    const auto a = make_column("total sales", {"0", "10"});
    const auto b = make_column("Total Cost", {"5", "20"});
    const auto f = extract_cross(a, b);
    CHECK(fval(f, "num_shared_words", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "percent_shared_words", FeatureScope::kCross) == doctest::Approx(1.0 / 3.0));
    CHECK(fval(f, "has_shared_words", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "has_range_overlap", FeatureScope::kCross) == 1.0);
    CHECK(fval(f, "percent_range_overlap", FeatureScope::kCross) == doctest::Approx(0.25));
    CHECK(fval(f, "identical", FeatureScope::kCross) == 0.0);

    const auto c = make_column("x", {"1", "2"});
    const auto d = make_column("y", {"1", "2"});
    const auto f2 = extract_cross(c, d);
    CHECK(fval(f2, "edit_distance", FeatureScope::kCross) == 1.0);
    CHECK(fval(f2, "normalized_edit_distance", FeatureScope::kCross) == 1.0);
    CHECK(fval(f2, "num_shared_words", FeatureScope::kCross) == 0.0);
}

TEST_CASE("nestedness is directional-max") {
    // parent b -> child values differ; child determines parent though
    const auto a = make_column("k", {"p", "p", "q", "q"});
    const auto b = make_column("v", {"1", "2", "3", "4"});
    const auto f = extract_cross(a, b);
    // k->v inconsistent (0/2), v->k fully consistent (4/4)
    CHECK(fval(f, "nestedness", FeatureScope::kCross) == 1.0);

    const auto c = make_column("m", {"p", "p", "q", "q"});
    const auto d = make_column("w", {"1", "2", "1", "2"});
    const auto f2 = extract_cross(c, d);
    CHECK(fval(f2, "nestedness", FeatureScope::kCross) == 0.0);
}

TEST_CASE("feature extraction never produces NaN, only missing") {
    const Corpus corpus = generate_synthetic_corpus(24, 123, default_rulebook());
    for (const auto& p : corpus.pairs) {
        const auto pf = extract_pair(p);
        for (const auto& vec : {pf.single[0], pf.single[1]}) {
            REQUIRE(vec.size() == 80);
            for (const auto& v : vec) {
                if (v) CHECK_FALSE(std::isnan(*v));
            }
        }
        REQUIRE(pf.cross.size() == 40);
        for (const auto& v : pf.cross) {
            if (v) CHECK_FALSE(std::isnan(*v));
        }
        // booleans are strictly 0/1
        for (std::size_t i = 0; i < 80; ++i) {
            if (single_feature_defs()[i].kind == FeatureKind::kBoolean && pf.single[0][i]) {
                CHECK((pf.single[0][i] == 0.0 || pf.single[0][i] == 1.0));
            }
        }
    }
}

TEST_CASE("feature dump round trip") {
    const Corpus corpus = generate_synthetic_corpus(6, 42, default_rulebook());
    FeatureDump dump;
    dump.role = "train";
    for (const auto& p : corpus.pairs) dump.records.push_back(extract_pair(p));
    const std::string path = "/tmp/vizbox_test_features.jsonl";
    save_features(dump, path);
    const auto back = load_features(path);
    CHECK(back.role == "train");
    REQUIRE(back.records.size() == dump.records.size());
    for (std::size_t i = 0; i < dump.records.size(); ++i) {
        CHECK(back.records[i].id == dump.records[i].id);
        CHECK(back.records[i].column_names == dump.records[i].column_names);
        for (std::size_t c = 0; c < 2; ++c) {
            REQUIRE(back.records[i].single[c].size() == 80);
            for (std::size_t k = 0; k < 80; ++k) {
                CHECK(back.records[i].single[c][k] == dump.records[i].single[c][k]);
            }
        }
        for (std::size_t k = 0; k < 40; ++k) {
            CHECK(back.records[i].cross[k] == dump.records[i].cross[k]);
        }
    }
    std::remove(path.c_str());

    std::ofstream bad("/tmp/vizbox_test_badfeat.jsonl");
    bad << "{\"schema\":\"other/9\"}\n";
    bad.close();
    CHECK_THROWS_AS(load_features("/tmp/vizbox_test_badfeat.jsonl"), DataError);
    std::remove("/tmp/vizbox_test_badfeat.jsonl");
}
