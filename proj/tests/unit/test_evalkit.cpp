#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "vizbox/boxmodel.hpp"
#include "vizbox/common.hpp"
#include "vizbox/corpus.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/evalkit.hpp"
#include "vizbox/features.hpp"
#include "vizbox/inference.hpp"
#include "vizbox/kgraph.hpp"

using namespace vizbox;
using nlohmann::ordered_json;

namespace {

AttentionNet flat_net(std::size_t d) {
    AttentionNet net;
    net.d = d;
    net.w1.assign(4 * d * d, 0.0);
    net.b1.assign(2 * d, 0.0);
    net.w2.assign(2 * d, 0.0);
    net.b2 = 0.0;
    net.wg.assign(2 * d * d, 0.0);
    net.bg.assign(d, 100.0);
    return net;
}

ModelParams hand_model(const std::vector<std::pair<EntityClass, std::string>>& extra,
                       const DiscretizationMap& bins) {
    ModelParams p;
    p.hyper.d = 2;
    p.bins_fingerprint = bins.fingerprint();
    p.entities.push_back({0, EntityClass::kVisAxis, "axis:x"});
    p.entities.push_back({1, EntityClass::kVisAxis, "axis:y"});
    for (ChartType t : kAllChartTypes) {
        p.entities.push_back({KnowledgeGraph::type_entity(t), EntityClass::kVisType,
                              std::string("type:") + to_string(t)});
    }
    for (const auto& [cls, label] : extra) {
        p.entities.push_back({static_cast<std::uint32_t>(p.entities.size()), cls, label});
    }
    p.points.assign(p.entities.size() * 2, 0.0);
    for (auto& r : p.relations) {
        r.shift.assign(2, 0.0);
        r.growth.assign(2, 0.0);
    }
    p.attention = flat_net(2);
    return p;
}

void set_point(ModelParams& p, std::uint32_t id, double x, double y) {
    p.points[id * 2] = x;
    p.points[id * 2 + 1] = y;
}

struct Fixture {
    Corpus corpus;
    DiscretizationMap bins;
    ModelParams params;
};

const Fixture& trained_fixture() {
    static const Fixture f = [] {
        Fixture fx;
        fx.corpus = generate_synthetic_corpus(12, 21, default_rulebook());
        FeatureDump dump;
        dump.role = "train";
        std::map<std::string, ChartType> labels;
        for (const auto& p : fx.corpus.pairs) {
            dump.records.push_back(extract_pair(p));
            labels[p.id] = *p.chart_type;
        }
        fx.bins = fit_all(dump, labels);
        const KnowledgeGraph kg = build_graph(dump, fx.corpus, fx.bins);
        Hyperparams h;
        h.d = 8;
        h.k = 4;
        h.epochs = 6;
        h.batch_size = 64;
        h.seed = 23;
        fx.params = train(kg, h);
        return fx;
    }();
    return f;
}

// Two pairs with byte-identical column data (one signature group), labels
// chosen per test. Both columns are strictly increasing unique integers, so
// is_sorted fires on each.
Pair sorted_pair(const std::string& id, ChartType label) {
    Pair p;
    p.id = id;
    p.columns = {make_column("a", {"1", "2", "3", "4"}),
                 make_column("b", {"2", "3", "5", "9"})};
    p.chart_type = label;
    p.axes = {Axis::kX, Axis::kY};
    return p;
}

// One recognized entity at c = (0.3, -0.7); axis:x and type:line sit exactly
// on c, every other landmark is far away. All distances are hand-computable.
ModelParams pinned_model(const DiscretizationMap& bins) {
    ModelParams m = hand_model({{EntityClass::kSingleFeature, "is_sorted=true"}}, bins);
    set_point(m, 6, 0.3, -0.7);
    set_point(m, KnowledgeGraph::kAxisX, 0.3, -0.7);
    set_point(m, KnowledgeGraph::kAxisY, 50.0, 50.0);
    set_point(m, KnowledgeGraph::type_entity(ChartType::kLine), 0.3, -0.7);
    set_point(m, KnowledgeGraph::type_entity(ChartType::kBox), 20.0, 20.0);
    set_point(m, KnowledgeGraph::type_entity(ChartType::kBar), 30.0, 30.0);
    set_point(m, KnowledgeGraph::type_entity(ChartType::kScatter), 40.0, 40.0);
    return m;
}

}  // namespace

TEST_CASE("mean rank is the arithmetic mean") {
    CHECK(mean_rank({1, 2, 1, 4}) == 2.0);
    CHECK(mean_rank({3}) == 3.0);
    CHECK(mean_rank({1, 1, 1}) == 1.0);
    CHECK_THROWS_AS(mean_rank({}), std::invalid_argument);
}

TEST_CASE("hits@k counts ranks at or below the cutoff") {
    const std::vector<std::size_t> ranks{1, 2, 3, 2};
    CHECK(hits_at_k(ranks, 1) == 0.25);
    CHECK(hits_at_k(ranks, 2) == 0.75);
    CHECK(hits_at_k(ranks, 3) == 1.0);
    CHECK(hits_at_k(ranks, 4) == 1.0);
    CHECK(hits_at_k(ranks, 0) == 0.0);
    CHECK_THROWS_AS(hits_at_k({}, 2), std::invalid_argument);

    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::size_t> r;
        for (int i = 0; i < 17; ++i) r.push_back(1 + rng.uniform_int(4));
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(hits_at_k(r, k) <= hits_at_k(r, k + 1));
        }
        CHECK(hits_at_k(r, 4) == 1.0);
    }
}

TEST_CASE("multi-label precision/recall/f1") {
    SUBCASE("partial overlap") {
        const auto s = multi_label_prf({{ChartType::kLine}},
                                       {{ChartType::kLine, ChartType::kBar}});
        CHECK(s.recall == 0.5);
        CHECK(s.precision == 1.0);
        CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("exact match") {
        const auto s = multi_label_prf({{ChartType::kBar, ChartType::kBox}},
                                       {{ChartType::kBox, ChartType::kBar}});
        CHECK(s.recall == 1.0);
        CHECK(s.precision == 1.0);
        CHECK(s.f1 == 1.0);
    }
    SUBCASE("empty prediction scores zero precision") {
        const auto s = multi_label_prf({{}}, {{ChartType::kBar}});
        CHECK(s.recall == 0.0);
        CHECK(s.precision == 0.0);
        CHECK(s.f1 == 0.0);
    }
    SUBCASE("duplicates in a set are ignored") {
        const auto a = multi_label_prf({{ChartType::kLine, ChartType::kLine}},
                                       {{ChartType::kLine, ChartType::kBar}});
        const auto b = multi_label_prf({{ChartType::kLine}},
                                       {{ChartType::kLine, ChartType::kBar}});
        CHECK(a.recall == b.recall);
        CHECK(a.precision == b.precision);
        CHECK(a.f1 == b.f1);
    }
    SUBCASE("macro averaging over two examples") {
        // example 1: R=0.5 P=1; example 2: R=1 P=0.5
        const auto s = multi_label_prf(
            {{ChartType::kLine}, {ChartType::kBar, ChartType::kScatter}},
            {{ChartType::kLine, ChartType::kBox}, {ChartType::kBar}});
        CHECK(s.recall == 0.75);
        CHECK(s.precision == 0.75);
        CHECK(s.f1 == 0.75);
    }
    SUBCASE("contract violations") {
        CHECK_THROWS_AS(multi_label_prf({{}}, {{}, {}}), std::invalid_argument);
        CHECK_THROWS_AS(multi_label_prf({}, {}), std::invalid_argument);
        CHECK_THROWS_AS(multi_label_prf({{ChartType::kBar}}, {{}}),
                        std::invalid_argument);
    }
}

TEST_CASE("signature grouping merges indistinguishable pairs") {
    const auto& fx = trained_fixture();
    Corpus c;
    c.pairs.push_back(sorted_pair("twin-1", ChartType::kLine));
    c.pairs.push_back(sorted_pair("twin-2", ChartType::kBar));
    c.pairs.push_back(fx.corpus.pairs[0]);

    const auto groups = group_by_signature(c, fx.bins);
    REQUIRE(groups.size() == 2);

    const auto* twins = &groups[0];
    if (twins->members.size() != 2) twins = &groups[1];
    REQUIRE(twins->members.size() == 2);
    CHECK(twins->members == std::vector<std::size_t>{0, 1});
    CHECK(twins->member_ids == std::vector<std::string>{"twin-1", "twin-2"});
    CHECK(twins->truth == std::vector<ChartType>{ChartType::kBar, ChartType::kLine});

    CHECK(std::is_sorted(groups.begin(), groups.end(),
                         [](const SignatureGroup& a, const SignatureGroup& b) {
                             return a.signature < b.signature;
                         }));
}

TEST_CASE("signature grouping refuses unlabeled pairs") {
    const auto& fx = trained_fixture();
    Corpus c;
    c.pairs.push_back(sorted_pair("u", ChartType::kLine));
    c.pairs[0].chart_type.reset();
    CHECK_THROWS_AS(group_by_signature(c, fx.bins), DataError);
}

TEST_CASE("signature grouping matches a brute-force pairwise oracle") {
    const auto& fx = trained_fixture();
    Corpus c = fx.corpus;
    // a few planted twins so non-trivial groups exist
    c.pairs.push_back(sorted_pair("o-1", ChartType::kLine));
    c.pairs.push_back(sorted_pair("o-2", ChartType::kBar));
    c.pairs.push_back(sorted_pair("o-3", ChartType::kLine));

    // Oracle signature: per pair, the two columns' sorted label vectors as an
    // unordered pair, plus the sorted cross labels. Compared structurally,
    // grouped by O(n^2) scan.
    using ColLabels = std::vector<std::string>;
    using Sig = std::pair<std::vector<ColLabels>, ColLabels>;
    const auto labels_of = [&](const FeatureVector& v,
                               const std::vector<FeatureDef>& defs) {
        ColLabels out;
        for (std::size_t i = 0; i < defs.size(); ++i) {
            if (defs[i].kind == FeatureKind::kContinuous) {
                const auto it = fx.bins.features.find(defs[i].name);
                if (it == fx.bins.features.end()) continue;
                if (!v[i].has_value() && !it->second.has_missing_bin) continue;
            }
            if (const auto l = feature_entity_label(defs[i], v[i], fx.bins))
                out.push_back(*l);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    std::vector<Sig> sigs;
    for (const auto& p : c.pairs) {
        const PairFeatures f = extract_pair(p);
        std::vector<ColLabels> cols{labels_of(f.single[0], single_feature_defs()),
                                    labels_of(f.single[1], single_feature_defs())};
        std::sort(cols.begin(), cols.end());
        sigs.push_back({std::move(cols), labels_of(f.cross, cross_feature_defs())});
    }
    std::vector<std::vector<std::size_t>> oracle;
    std::vector<bool> seen(c.pairs.size(), false);
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        if (seen[i]) continue;
        std::vector<std::size_t> g{i};
        for (std::size_t j = i + 1; j < sigs.size(); ++j) {
            if (!seen[j] && sigs[j] == sigs[i]) {
                g.push_back(j);
                seen[j] = true;
            }
        }
        oracle.push_back(std::move(g));
    }

    const auto groups = group_by_signature(c, fx.bins);
    std::set<std::vector<std::size_t>> got, want;
    for (const auto& g : groups) got.insert(g.members);
    for (const auto& g : oracle) want.insert(g);
    CHECK(got == want);

    // partition: every index exactly once
    std::vector<std::size_t> all;
    for (const auto& g : groups) all.insert(all.end(), g.members.begin(), g.members.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(c.pairs.size());
    for (std::size_t i = 0; i < expect.size(); ++i) expect[i] = i;
    CHECK(all == expect);

    // truth is the union of member labels
    for (const auto& g : groups) {
        std::set<ChartType> u;
        for (const auto idx : g.members) u.insert(*c.pairs[idx].chart_type);
        CHECK(g.truth == std::vector<ChartType>(u.begin(), u.end()));
    }
}

TEST_CASE("evaluate refuses bad corpora") {
    const auto& fx = trained_fixture();
    CHECK_THROWS_AS(evaluate(fx.params, fx.bins, Corpus{}), DataError);

    Corpus c;
    c.pairs.push_back(sorted_pair("m", ChartType::kLine));
    c.pairs[0].axes[1].reset();
    CHECK_THROWS_AS(evaluate(fx.params, fx.bins, c), DataError);
    c.pairs[0].axes[1] = Axis::kY;
    c.pairs[0].chart_type.reset();
    CHECK_THROWS_AS(evaluate(fx.params, fx.bins, c), DataError);
}

TEST_CASE("evaluate on a hand-placed model: every metric pinned") {
    DiscretizationMap bins;
    const ModelParams m = pinned_model(bins);

    SUBCASE("a model that nails every pair scores 1.0 across the board") {
        Corpus c;
        c.pairs.push_back(sorted_pair("p1", ChartType::kLine));
        c.pairs.push_back(sorted_pair("p2", ChartType::kLine));
        const EvalReport r = evaluate(m, bins, c);
        CHECK(r.n == 2);
        CHECK(r.axis_accuracy == 1.0);
        CHECK(r.type_mean_rank == 1.0);
        CHECK(r.type_hits_at_1 == 1.0);
        CHECK(r.type_hits_at_2 == 1.0);
        CHECK(r.n_groups == 1);
        CHECK(r.n_multi_groups == 0);
        CHECK(r.multi.recall == 0.0);  // no multi-label group to score
        CHECK(r.multi.precision == 0.0);
        CHECK(r.multi.f1 == 0.0);
    }

    SUBCASE("a two-label signature group feeds the multi-label metrics") {
        // Both pairs collapse to the same query box, whose contained set is
        // {line}: truth line ranks 1, truth bar ranks 3 (line and box score
        // strictly better), and the group's truth is {bar, line}.
        Corpus c;
        c.pairs.push_back(sorted_pair("p1", ChartType::kLine));
        c.pairs.push_back(sorted_pair("p2", ChartType::kBar));
        const EvalReport r = evaluate(m, bins, c);
        CHECK(r.axis_accuracy == 1.0);
        CHECK(r.type_mean_rank == 2.0);
        CHECK(r.type_hits_at_1 == 0.5);
        CHECK(r.type_hits_at_2 == 0.5);
        CHECK(r.n_groups == 1);
        CHECK(r.n_multi_groups == 1);
        CHECK(r.multi.recall == 0.5);
        CHECK(r.multi.precision == 1.0);
        CHECK(r.multi.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("evaluate on a trained model: ranges, determinism, ablation") {
    const auto& fx = trained_fixture();
    ordered_json cfg{{"seed", 7}, {"use_cross_features", true}};
    const EvalReport r = evaluate(fx.params, fx.bins, fx.corpus, {}, cfg);

    CHECK(r.n == fx.corpus.pairs.size());
    CHECK(r.axis_accuracy >= 0.0);
    CHECK(r.axis_accuracy <= 1.0);
    CHECK(r.type_mean_rank >= 1.0);
    CHECK(r.type_mean_rank <= 4.0);
    CHECK(r.type_hits_at_1 >= 0.0);
    CHECK(r.type_hits_at_1 <= r.type_hits_at_2);
    CHECK(r.type_hits_at_2 <= 1.0);
    CHECK(r.n_groups >= 1);
    CHECK(r.n_groups <= r.n);
    CHECK(r.n_multi_groups <= r.n_groups);
    CHECK(r.multi.recall >= 0.0);
    CHECK(r.multi.recall <= 1.0);
    CHECK(r.multi.precision >= 0.0);
    CHECK(r.multi.precision <= 1.0);
    CHECK(r.multi.f1 >= 0.0);
    CHECK(r.multi.f1 <= 1.0);

    const EvalReport again = evaluate(fx.params, fx.bins, fx.corpus, {}, cfg);
    CHECK(report_json(r).dump() == report_json(again).dump());

    InferenceOptions ablated;
    ablated.use_cross_features = false;
    const EvalReport no_cf = evaluate(fx.params, fx.bins, fx.corpus, ablated);
    CHECK(no_cf.n == r.n);
    CHECK(no_cf.n_groups == r.n_groups);  // grouping ignores inference options
}

TEST_CASE("report serialization") {
    const auto& fx = trained_fixture();
    const EvalReport r =
        evaluate(fx.params, fx.bins, fx.corpus, {}, ordered_json{{"seed", 7}});

    const ordered_json j = report_json(r);
    CHECK(j["schema"] == "vizbox.eval/1");
    CHECK(j["n"] == r.n);
    CHECK(j["axis_accuracy"] == r.axis_accuracy);
    CHECK(j["type_mean_rank"] == r.type_mean_rank);
    CHECK(j["type_hits_at_1"] == r.type_hits_at_1);
    CHECK(j["type_hits_at_2"] == r.type_hits_at_2);
    CHECK(j["multi_label"]["groups"] == r.n_groups);
    CHECK(j["multi_label"]["multi_groups"] == r.n_multi_groups);
    CHECK(j["multi_label"]["recall"] == r.multi.recall);
    CHECK(j["config"]["seed"] == 7);

    const EvalReport empty_cfg = evaluate(fx.params, fx.bins, fx.corpus);
    CHECK(report_json(empty_cfg)["config"].is_object());

    const std::string table = report_table(r);
    CHECK(table.find("axis accuracy") != std::string::npos);
    CHECK(table.find("type mean rank") != std::string::npos);
    CHECK(table.find("hits@2") != std::string::npos);
    CHECK(table.find("signature groups:") != std::string::npos);
    CHECK(table.find("f1") != std::string::npos);
}
