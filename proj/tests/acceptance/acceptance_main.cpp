// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the exit code is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vizbox/boxmodel.hpp"
#include "vizbox/common.hpp"
#include "vizbox/corpus.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/evalkit.hpp"
#include "vizbox/explain.hpp"
#include "vizbox/feature_registry.hpp"
#include "vizbox/features.hpp"
#include "vizbox/inference.hpp"
#include "vizbox/kgraph.hpp"

using namespace vizbox;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// ---- shared model-building helpers ----

KnowledgeGraph synth_graph(std::size_t n_pairs, std::uint64_t seed) {
    const Corpus corpus = generate_synthetic_corpus(n_pairs, seed, default_rulebook());
    FeatureDump dump;
    dump.role = "train";
    std::map<std::string, ChartType> labels;
    for (const auto& p : corpus.pairs) {
        dump.records.push_back(extract_pair(p));
        labels[p.id] = *p.chart_type;
    }
    const auto bins = fit_all(dump, labels);
    return build_graph(dump, corpus, bins);
}

std::vector<TrainQuery> sampled_batch(const KnowledgeGraph& kg, std::size_t stride,
                                      std::size_t cap, std::size_t k, Rng& rng) {
    auto all = build_training_queries(kg);
    std::vector<TrainQuery> batch;
    for (std::size_t i = 0; i < all.size() && batch.size() < cap; i += stride) {
        TrainQuery q = all[i];
        if (sample_negatives(q, kg.ids_of(q.tail_cls), k, rng)) batch.push_back(std::move(q));
    }
    for (auto it = all.rbegin(); it != all.rend() && batch.size() < cap + 8; ++it) {
        if (!it->composed) continue;
        TrainQuery q = *it;
        if (sample_negatives(q, kg.ids_of(q.tail_cls), k, rng)) batch.push_back(std::move(q));
    }
    return batch;
}

AttentionNet random_net(std::size_t d, Rng& rng) {
    AttentionNet net;
    net.d = d;
    net.w1.resize(4 * d * d);
    net.b1.resize(2 * d);
    net.w2.resize(2 * d);
    net.wg.resize(2 * d * d);
    net.bg.resize(d);
    for (double& x : net.w1) x = rng.uniform(-0.5, 0.5);
    for (double& x : net.b1) x = rng.uniform(-0.2, 0.2);
    for (double& x : net.w2) x = rng.uniform(-0.5, 0.5);
    net.b2 = rng.uniform(-0.2, 0.2);
    for (double& x : net.wg) x = rng.uniform(-0.5, 0.5);
    for (double& x : net.bg) x = rng.uniform(-0.2, 0.2);
    return net;
}

Box random_box(std::size_t d, Rng& rng) {
    Box b;
    b.center.resize(d);
    b.offset.resize(d);
    for (double& x : b.center) x = rng.uniform(-2.0, 2.0);
    for (double& x : b.offset) x = rng.uniform(0.0, 1.5);
    return b;
}

struct PipelineOut {
    ModelParams model;
    DiscretizationMap bins;
    Corpus test;
};

// split -> extract -> fit bins -> build graph -> train, all in process
PipelineOut run_pipeline(const Corpus& corpus, double fraction, std::uint64_t split_seed,
                         const Hyperparams& hyper) {
    auto [tr, te] = split_corpus(corpus, fraction, split_seed);
    FeatureDump dump;
    dump.role = "train";
    std::map<std::string, ChartType> labels;
    for (const auto& p : tr.pairs) {
        dump.records.push_back(extract_pair(p));
        labels[p.id] = *p.chart_type;
    }
    PipelineOut out;
    out.bins = fit_all(dump, labels);
    const KnowledgeGraph kg = build_graph(dump, tr, out.bins);
    out.model = train(kg, hyper);
    out.test = std::move(te);
    return out;
}

// criterion 3 artifacts, reused by the ablation criterion
struct RecoveryArtifacts {
    PipelineOut pipe;
    bool ready = false;
};
RecoveryArtifacts g_recovery;

// ---- criterion 1: gradient correctness ----

Outcome criterion_gradients() {
    const auto t0 = Clock::now();
    const KnowledgeGraph kg = synth_graph(10, 13);
    Hyperparams h;
    h.d = 8;
    h.k = 4;
    h.seed = 23;
    Rng init_rng(101);
    const ModelParams params = init_params(kg, h, init_rng);

    double worst = 0.0;
    for (int b = 0; b < 10; ++b) {
        Rng rng(1000 + b);
        const auto batch = sampled_batch(kg, 7 + b, 32, h.k, rng);
        if (batch.size() < 8) return {false, fmt("batch %d too small (%zu queries)", b, batch.size())};
        worst = std::max(worst, grad_check(params, batch, 40, 1e-5, rng));
    }
    const double secs = seconds_since(t0);
    if (!(worst < 1e-4)) return {false, fmt("max relative error %.3e >= 1e-4", worst)};
    if (secs >= 30.0) return {false, fmt("took %.1f s, budget 30 s", secs)};
    return {true, fmt("max relative error %.3e over 10 batches, %.1f s", worst, secs)};
}

// ---- criterion 2: box-algebra oracle suite ----

Outcome criterion_box_algebra() {
    const auto t0 = Clock::now();
    Rng rng(2026);
    int contained = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = 2 + rng.uniform_int(5);

        // dist_outside = 0 exactly when the point is contained
        const Box b = random_box(d, rng);
        std::vector<double> t(d);
        for (double& x : t) x = rng.uniform(-3.0, 3.0);
        const bool in = contains(b, t.data(), 0.0);
        contained += in;
        if ((dist_outside(t.data(), b) == 0.0) != in)
            return {false, fmt("containment mismatch at case %d", i)};

        // dist_box composes its three pieces
        const double alpha = rng.uniform(0.0, 1.0);
        const double beta = rng.uniform(0.0, 0.2);
        const double composed = dist_outside(t.data(), b) + alpha * dist_inside(t.data(), b) +
                                beta * box_size(b);
        if (std::abs(dist_box(t.data(), b, alpha, beta) - composed) > 1e-12)
            return {false, fmt("distance composition off at case %d", i)};

        // intersection: permutation invariant, offset below every input
        const AttentionNet net = random_net(d, rng);
        const std::size_t m = 2 + rng.uniform_int(4);
        std::vector<Box> boxes;
        for (std::size_t j = 0; j < m; ++j) boxes.push_back(random_box(d, rng));
        const Box base = intersect(boxes, net);

        std::vector<std::size_t> perm(m);
        for (std::size_t j = 0; j < m; ++j) perm[j] = j;
        rng.shuffle(perm);
        std::vector<Box> shuffled;
        for (std::size_t j : perm) shuffled.push_back(boxes[j]);
        const Box again = intersect(shuffled, net);
        if (base.center != again.center || base.offset != again.offset)
            return {false, fmt("intersection not permutation invariant at case %d", i)};

        for (std::size_t j = 0; j < d; ++j) {
            double min_off = boxes[0].offset[j];
            for (const Box& bb : boxes) min_off = std::min(min_off, bb.offset[j]);
            if (!(base.offset[j] <= min_off))
                return {false, fmt("intersection offset above an input at case %d", i)};
        }
    }
    const double secs = seconds_since(t0);
    if (contained == 0 || contained == 10000)
        return {false, "containment cases were one-sided"};
    if (secs >= 10.0) return {false, fmt("took %.1f s, budget 10 s", secs)};
    return {true, fmt("10000 cases (%d contained), %.1f s", contained, secs)};
}

// ---- criterion 3: synthetic rule recovery ----

Outcome criterion_rule_recovery() {
    const auto t0 = Clock::now();
    const Corpus corpus = generate_synthetic_corpus(2000, 41, default_rulebook());
    Hyperparams h;  // d=32, 100 epochs
    h.seed = 7;
    g_recovery.pipe = run_pipeline(corpus, 0.6667, 41, h);
    g_recovery.ready = true;
    const EvalReport r = evaluate(g_recovery.pipe.model, g_recovery.pipe.bins, g_recovery.pipe.test);
    const double secs = seconds_since(t0);
    const std::string stats = fmt("axis %.4f, hits@1 %.4f on %zu held-out pairs, %.0f s",
                                  r.axis_accuracy, r.type_hits_at_1, r.n, secs);
    if (secs >= 600.0) return {false, stats + ", budget 600 s"};
    if (!(r.axis_accuracy >= 0.90)) return {false, stats + ", axis threshold 0.90"};
    if (!(r.type_hits_at_1 >= 0.85)) return {false, stats + ", hits@1 threshold 0.85"};
    return {true, stats};
}

// ---- criterion 4: adaptive multi-answer ----

Outcome criterion_adaptive() {
    const Rulebook rb = adaptive_rulebook();
    const std::uint64_t seeds[3] = {91, 92, 93};
    int passing = 0;
    std::string per_seed;
    for (int i = 0; i < 3; ++i) {
        // plant a twin per pair: same columns, the archetype's other admissible type
        const Corpus base = generate_synthetic_corpus(360, seeds[i], rb);
        Corpus twinned;
        twinned.provenance = base.provenance;
        twinned.seed = base.seed;
        for (const auto& p : base.pairs) {
            twinned.pairs.push_back(p);
            Pair tw = p;
            tw.id += "-twin";
            for (ChartType t : rb.at(archetype_of_id(p.id)))
                if (t != *p.chart_type) tw.chart_type = t;
            twinned.pairs.push_back(std::move(tw));
        }

        Hyperparams h;
        h.gamma = 4.0;  // tight margin keeps positives inside their query boxes
        h.alpha = 0.1;
        h.beta = 0.005;
        h.seed = 7 + static_cast<std::uint64_t>(i);
        const PipelineOut po = run_pipeline(twinned, 0.6667, seeds[i], h);

        InferenceOptions opts;
        opts.containment_tol = 0.45;
        const EvalReport r = evaluate(po.model, po.bins, po.test, opts);
        const bool ok = r.multi.recall >= 0.70 && r.multi.precision >= 0.70;
        passing += ok;
        per_seed += fmt("%sseed %llu R %.4f P %.4f", i ? "; " : "",
                        static_cast<unsigned long long>(seeds[i]), r.multi.recall,
                        r.multi.precision);
    }
    const std::string stats = per_seed + fmt(" (%d/3 above 0.70/0.70)", passing);
    if (passing < 2) return {false, stats};
    return {true, stats};
}

// ---- criterion 5: ablation direction ----

Outcome criterion_ablation() {
    if (!g_recovery.ready) return {false, "rule-recovery pipeline artifacts unavailable"};
    Corpus slice;
    slice.provenance = g_recovery.pipe.test.provenance;
    slice.seed = g_recovery.pipe.test.seed;
    for (const auto& p : g_recovery.pipe.test.pairs)
        if (p.id.find("q+q_corr") != std::string::npos) slice.pairs.push_back(p);
    if (slice.pairs.size() < 20)
        return {false, fmt("correlated slice too small (%zu pairs)", slice.pairs.size())};

    InferenceOptions with_cf;
    InferenceOptions without_cf;
    without_cf.use_cross_features = false;
    const EvalReport on = evaluate(g_recovery.pipe.model, g_recovery.pipe.bins, slice, with_cf);
    const EvalReport off = evaluate(g_recovery.pipe.model, g_recovery.pipe.bins, slice, without_cf);
    const std::string stats = fmt("hits@1 %.4f with vs %.4f without cross features, %zu pairs",
                                  on.type_hits_at_1, off.type_hits_at_1, slice.pairs.size());
    if (!(on.type_hits_at_1 > off.type_hits_at_1)) return {false, stats + ", no degradation"};
    return {true, stats};
}

// ---- criterion 6: discretizer equals the brute-force oracle ----

// independent reimplementation: recursive, entropies recomputed from scratch
namespace oracle {

double entropy(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(labels.size());
        h -= p * std::log2(p);
    }
    return h;
}

void mdlp(std::vector<std::pair<double, int>> data, std::vector<double>* cuts) {
    std::sort(data.begin(), data.end());
    const std::size_t n = data.size();
    if (n < 2) return;
    std::vector<int> all;
    for (const auto& d : data) all.push_back(d.second);
    std::map<int, std::size_t> classes;
    for (int l : all) ++classes[l];
    if (classes.size() < 2) return;
    const double e_all = entropy(all);

    double best_gain = -1.0, best_t = 0.0;
    std::size_t best_pos = 0;
    for (std::size_t p = 1; p < n; ++p) {
        if (data[p].first == data[p - 1].first) continue;
        std::set<int> left_group, right_group;
        for (const auto& d : data) {
            if (d.first == data[p - 1].first) left_group.insert(d.second);
            if (d.first == data[p].first) right_group.insert(d.second);
        }
        if (left_group.size() == 1 && right_group.size() == 1 &&
            *left_group.begin() == *right_group.begin()) {
            continue;  // not a class boundary
        }
        std::vector<int> l(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(p));
        std::vector<int> r(all.begin() + static_cast<std::ptrdiff_t>(p), all.end());
        const double gain = e_all - (static_cast<double>(l.size()) / n * entropy(l) +
                                     static_cast<double>(r.size()) / n * entropy(r));
        if (gain > best_gain) {
            best_gain = gain;
            best_pos = p;
            best_t = (data[p - 1].first + data[p].first) / 2.0;
        }
    }
    if (best_gain < 0.0) return;

    std::vector<int> l(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(best_pos));
    std::vector<int> r(all.begin() + static_cast<std::ptrdiff_t>(best_pos), all.end());
    std::set<int> kl(l.begin(), l.end()), kr(r.begin(), r.end());
    const double e1 = entropy(l), e2 = entropy(r);
    const double k = static_cast<double>(classes.size());
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * e_all - static_cast<double>(kl.size()) * e1 -
                          static_cast<double>(kr.size()) * e2);
    const double threshold =
        (std::log2(static_cast<double>(n - 1)) + delta) / static_cast<double>(n);
    if (best_gain <= threshold) return;

    cuts->push_back(best_t);
    mdlp({data.begin(), data.begin() + static_cast<std::ptrdiff_t>(best_pos)}, cuts);
    mdlp({data.begin() + static_cast<std::ptrdiff_t>(best_pos), data.end()}, cuts);
}

std::vector<double> fit(const std::vector<double>& values, const std::vector<int>& labels) {
    std::vector<std::pair<double, int>> data;
    for (std::size_t i = 0; i < values.size(); ++i) data.emplace_back(values[i], labels[i]);
    std::vector<double> cuts;
    mdlp(std::move(data), &cuts);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

}  // namespace oracle

Outcome criterion_mdlp() {
    const auto t0 = Clock::now();
    std::size_t cases = 0;
    std::string mismatch;

    // every labeling in {0..alphabet-1}^n over the given values
    const auto sweep = [&](const std::vector<double>& values, int alphabet) {
        const std::size_t n = values.size();
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(alphabet);
        std::vector<int> labels(n);
        for (std::size_t code = 0; code < total && mismatch.empty(); ++code) {
            std::size_t c = code;
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = static_cast<int>(c % static_cast<std::size_t>(alphabet));
                c /= static_cast<std::size_t>(alphabet);
            }
            if (fit_mdlp(values, labels) != oracle::fit(values, labels)) {
                std::ostringstream os;
                os << "mismatch at n=" << n << " labels";
                for (int l : labels) os << ' ' << l;
                mismatch = os.str();
                return;
            }
            ++cases;
        }
    };

    for (std::size_t n = 1; n <= 16 && mismatch.empty(); ++n) {
        std::vector<double> distinct(n);
        for (std::size_t i = 0; i < n; ++i) distinct[i] = static_cast<double>(i);
        sweep(distinct, 2);
    }
    for (std::size_t n = 1; n <= 12 && mismatch.empty(); ++n) {
        std::vector<double> tied(n);  // duplicated values exercise boundary skipping
        for (std::size_t i = 0; i < n; ++i) tied[i] = static_cast<double>(i / 2);
        sweep(tied, 2);
    }
    for (std::size_t n = 1; n <= 8 && mismatch.empty(); ++n) {
        std::vector<double> distinct(n);
        for (std::size_t i = 0; i < n; ++i) distinct[i] = static_cast<double>(i);
        sweep(distinct, 3);
    }

    if (!mismatch.empty()) return {false, mismatch};
    return {true, fmt("%zu exhaustive cases exact, %.1f s", cases, seconds_since(t0))};
}

// ---- criterion 7: metric oracles ----

Outcome criterion_metrics() {
    if (mean_rank({1, 2, 1, 4}) != 2.0) return {false, "mean_rank fixture"};
    if (hits_at_k({1, 2, 3, 2}, 1) != 0.25) return {false, "hits@1 fixture"};
    if (hits_at_k({1, 2, 3, 2}, 2) != 0.75) return {false, "hits@2 fixture"};
    if (hits_at_k({1, 2, 3, 2}, 4) != 1.0) return {false, "hits@4 fixture"};

    using CT = ChartType;
    const MultiLabelScores a = multi_label_prf({{CT::kLine}}, {{CT::kLine, CT::kBar}});
    if (a.recall != 0.5 || a.precision != 1.0 || a.f1 != 2.0 / 3.0)
        return {false, fmt("half-coverage fixture: R %.17g P %.17g F1 %.17g", a.recall,
                           a.precision, a.f1)};

    const MultiLabelScores b =
        multi_label_prf({{CT::kLine}, {CT::kBar, CT::kBox}}, {{CT::kLine, CT::kBar}, {CT::kBar}});
    if (b.recall != 0.75 || b.precision != 0.75 || b.f1 != 0.75)
        return {false, fmt("macro fixture: R %.17g P %.17g F1 %.17g", b.recall, b.precision, b.f1)};

    const MultiLabelScores c = multi_label_prf({{}}, {{CT::kLine}});
    if (c.recall != 0.0 || c.precision != 0.0 || c.f1 != 0.0)
        return {false, "empty-prediction fixture"};
    return {true, "mean rank, hits@k, and multi-label fixtures exact"};
}

// ---- criterion 8: explanation constraints ----

Outcome criterion_explanations() {
    Rng rng(8001);
    const auto& sdefs = single_feature_defs();
    const auto& cdefs = cross_feature_defs();

    std::vector<std::string> blocked_words;
    std::map<std::string, FeatureKind> kind_of;
    for (const auto& defs : {sdefs, cdefs}) {
        for (const auto& d : defs) {
            kind_of[d.name] = d.kind;
            if (!d.blocklisted) continue;
            std::string w = d.name;
            std::replace(w.begin(), w.end(), '_', ' ');
            blocked_words.push_back(w);
        }
    }

    DiscretizationMap bins;
    for (const auto& defs : {sdefs, cdefs}) {
        for (const auto& d : defs) {
            if (d.kind != FeatureKind::kContinuous) continue;
            std::vector<double> cuts;
            const std::size_t n = rng.uniform_int(5);
            for (std::size_t k = 0; k < n; ++k) cuts.push_back(static_cast<double>(k + 1));
            bins.features[d.name] = {cuts, rng.uniform() < 0.3};
        }
    }

    const auto random_label = [&](const std::vector<FeatureDef>& defs) {
        const auto& def = defs[rng.uniform_int(defs.size())];
        if (def.kind == FeatureKind::kBoolean)
            return def.name + (rng.uniform() < 0.3 ? "=false" : "=true");
        if (rng.uniform() < 0.15) return def.name + "=missing";
        const std::size_t n_bins = bins.features.at(def.name).cuts.size() + 1;
        return def.name + "=b" + std::to_string(rng.uniform_int(n_bins));
    };
    const auto branch = [](std::string label, int column, double weight) {
        BranchTrace b;
        b.label = std::move(label);
        b.column = column;
        b.weight = weight;
        return b;
    };

    for (int trial = 0; trial < 1000; ++trial) {
        InferenceTrace tr;
        for (int c = 0; c < 2; ++c) {
            const std::size_t n = 1 + rng.uniform_int(6);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = rng.uniform(0.01, 1.0);
                tr.columns[c].branches.push_back(branch(random_label(sdefs), c, w));
                sum += w;
            }
            for (auto& br : tr.columns[c].branches) br.weight /= sum;
        }
        const std::size_t n_cf = rng.uniform_int(6);
        std::vector<double> w = {rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)};
        for (std::size_t i = 0; i < n_cf; ++i) w.push_back(rng.uniform(0.01, 1.0));
        double wsum = 0.0;
        for (double x : w) wsum += x;
        tr.dataset.branches.push_back(branch("left", 0, w[0] / wsum));
        tr.dataset.branches.push_back(branch("right", 1, w[1] / wsum));
        for (std::size_t i = 0; i < n_cf; ++i)
            tr.dataset.branches.push_back(branch(random_label(cdefs), -1, w[2 + i] / wsum));

        const auto imp = feature_importances(tr);
        double isum = 0.0;
        for (const auto& e : imp) isum += e.weight;
        if (std::abs(isum - 1.0) > 1e-12)
            return {false, fmt("trial %d: raw importances sum to %.17g", trial, isum)};

        const auto sel = select_features(imp, bins);
        if (sel.size() > 4) return {false, fmt("trial %d: %zu features selected", trial, sel.size())};
        if (!sel.empty()) {
            double ssum = 0.0;
            for (const auto& f : sel) ssum += f.importance;
            if (std::abs(ssum - 1.0) > 1e-12)
                return {false, fmt("trial %d: selected importances sum to %.17g", trial, ssum)};
        }
        for (const auto& f : sel)
            if (kind_of.at(f.name) == FeatureKind::kBoolean && !f.boolean_polarity)
                return {false, fmt("trial %d: negative-polarity boolean '%s'", trial, f.name.c_str())};

        const ChartType t = kAllChartTypes[rng.uniform_int(4)];
        const std::string text = render({t}, sel, {"Left", "Right"});
        for (const auto& word : blocked_words)
            if (text.find(word) != std::string::npos)
                return {false, fmt("trial %d: blocklisted '%s' rendered", trial, word.c_str())};
    }
    return {true, "1000 random traces within caps, blocklist, polarity, and weight budget"};
}

// ---- criterion 9: determinism ----

std::optional<std::string> slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "vizbox_acceptance_determinism";
    std::error_code ec;
    fs::remove_all(root, ec);
    const std::array<fs::path, 2> dirs = {root / "a", root / "b"};
    for (const auto& d : dirs) fs::create_directories(d);

    const char* steps[] = {
        "synth --n 120 --seed 5 --rulebook default --output c.jsonl",
        "split --corpus c.jsonl --fraction 0.6667 --seed 5 --train-output tr.jsonl"
        " --test-output te.jsonl",
        "extract --corpus tr.jsonl --role train --output trf.json",
        "fit-bins --features trf.json --corpus tr.jsonl --output bins.json",
        "build-kg --features trf.json --corpus tr.jsonl --bins bins.json --output kg.json",
        "train --graph kg.json --d 8 --k 4 --epochs 5 --batch-size 64 --seed 9"
        " --output model.json",
        "recommend --model model.json --bins bins.json --corpus te.jsonl --output recs.jsonl",
        "evaluate --model model.json --bins bins.json --corpus te.jsonl --output report.json",
    };
    for (const auto& dir : dirs) {
        for (const char* step : steps) {
            const std::string cmd = "cd '" + dir.string() + "' && '" + VIZBOX_BIN + "' " + step +
                                    " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0)
                return {false, fmt("pipeline step failed in %s: %s", dir.filename().c_str(), step)};
        }
    }
    for (const char* name : {"model.json", "report.json", "recs.jsonl"}) {
        const auto a = slurp(dirs[0] / name);
        const auto b = slurp(dirs[1] / name);
        if (!a || !b || a->empty()) return {false, fmt("missing artifact %s", name)};
        if (*a != *b) return {false, fmt("%s differs between same-seed runs", name)};
    }
    fs::remove_all(root, ec);
    return {true, "model, report, and recommendations byte-identical across two seeded runs"};
}

void run(int idx, const char* name, Outcome (*fn)(), int& failures) {
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %d. %s (%s)\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

}  // namespace

int main() {
    std::printf("vizbox acceptance suite\n");
    int failures = 0;
    run(1, "gradient correctness", criterion_gradients, failures);
    run(2, "box-algebra oracle suite", criterion_box_algebra, failures);
    run(3, "synthetic rule recovery", criterion_rule_recovery, failures);
    run(4, "adaptive multi-answer", criterion_adaptive, failures);
    run(5, "ablation direction", criterion_ablation, failures);
    run(6, "discretizer equals brute-force oracle", criterion_mdlp, failures);
    run(7, "metric oracles", criterion_metrics, failures);
    run(8, "explanation constraints", criterion_explanations, failures);
    run(9, "determinism", criterion_determinism, failures);
    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures;
}
