#include "vizbox/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vizbox/common.hpp"
#include "vizbox/corpus.hpp"
#include "vizbox/discretizer.hpp"
#include "vizbox/evalkit.hpp"
#include "vizbox/explain.hpp"
#include "vizbox/features.hpp"
#include "vizbox/inference.hpp"
#include "vizbox/kgraph.hpp"

namespace vizbox {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (const char c : k) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

std::string read_text(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError(std::string("cannot read ") + what + ": " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write: " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

// `key = value` lines, '#' comments, quoted strings (no escapes), booleans,
// integers, floats. Enough for a flat RunConfig; nested tables are not.
ordered_json parse_flat_toml(const std::string& text, const std::string& path) {
    ordered_json doc = ordered_json::object();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string at = path + ":" + std::to_string(lineno);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError(at + ": expected `key = value`");
        const std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (!valid_key(key)) throw UsageError(at + ": bad key '" + key + "'");
        if (doc.contains(key)) throw UsageError(at + ": duplicate key '" + key + "'");
        if (!val.empty() && val[0] == '"') {
            const auto close = val.find('"', 1);
            if (close == std::string::npos)
                throw UsageError(at + ": unterminated string");
            const std::string rest = trim(val.substr(close + 1));
            if (!rest.empty() && rest[0] != '#')
                throw UsageError(at + ": trailing characters after string");
            doc[key] = val.substr(1, close - 1);
            continue;
        }
        const auto hash = val.find('#');
        if (hash != std::string::npos) val = trim(val.substr(0, hash));
        if (val == "true" || val == "false") {
            doc[key] = val == "true";
            continue;
        }
        {
            std::int64_t i = 0;
            const auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), i);
            if (ec == std::errc() && p == val.data() + val.size()) {
                doc[key] = i;
                continue;
            }
        }
        try {
            std::size_t used = 0;
            const double d = std::stod(val, &used);
            if (used == val.size()) {
                doc[key] = d;
                continue;
            }
        } catch (const std::exception&) {
        }
        throw UsageError(at + ": cannot parse value `" + val + "`");
    }
    return doc;
}

double need_number(const ordered_json& v, const std::string& key) {
    if (!v.is_number()) throw UsageError("config key '" + key + "': expected a number");
    return v.get<double>();
}

std::uint64_t need_uint(const ordered_json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw UsageError("config key '" + key + "': expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string need_string(const ordered_json& v, const std::string& key) {
    if (!v.is_string()) throw UsageError("config key '" + key + "': expected a string");
    return v.get<std::string>();
}

bool need_bool(const ordered_json& v, const std::string& key) {
    if (!v.is_boolean()) throw UsageError("config key '" + key + "': expected a boolean");
    return v.get<bool>();
}

const std::string& need_path(const std::string& v, const char* name) {
    if (v.empty())
        throw UsageError(std::string("missing required path: --") + name +
                         " (or config key '" + name + "')");
    return v;
}

InferenceOptions inference_options(const RunConfig& cfg) {
    InferenceOptions o;
    o.use_cross_features = cfg.use_cross_features;
    o.project_columns_before_ds_intersection = cfg.project_columns_before_ds_intersection;
    o.containment_tol = cfg.containment_tol;
    return o;
}

Corpus load_corpus_logged(const std::string& path, bool require_labels) {
    LoadReport rep = load_corpus(path, require_labels);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    return std::move(rep.corpus);
}

}  // namespace

ordered_json load_config_file(const std::string& path) {
    const std::string text = read_text(path, "config file");
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        const ordered_json doc = ordered_json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
            throw UsageError("config file is not a JSON object: " + path);
        return doc;
    }
    return parse_flat_toml(text, path);
}

void apply_config(RunConfig& cfg, const ordered_json& doc) {
    for (const auto& [key, v] : doc.items()) {
        if (key == "d") cfg.hyper.d = need_uint(v, key);
        else if (key == "gamma") cfg.hyper.gamma = need_number(v, key);
        else if (key == "alpha") cfg.hyper.alpha = need_number(v, key);
        else if (key == "beta") cfg.hyper.beta = need_number(v, key);
        else if (key == "k") cfg.hyper.k = need_uint(v, key);
        else if (key == "learning_rate") cfg.hyper.learning_rate = need_number(v, key);
        else if (key == "epochs") cfg.hyper.epochs = need_uint(v, key);
        else if (key == "batch_size") cfg.hyper.batch_size = need_uint(v, key);
        else if (key == "seed") cfg.hyper.seed = need_uint(v, key);
        else if (key == "corpus") cfg.corpus = need_string(v, key);
        else if (key == "bins") cfg.bins = need_string(v, key);
        else if (key == "graph") cfg.graph = need_string(v, key);
        else if (key == "model") cfg.model = need_string(v, key);
        else if (key == "output") cfg.output = need_string(v, key);
        else if (key == "use_cross_features") cfg.use_cross_features = need_bool(v, key);
        else if (key == "project_columns_before_ds_intersection")
            cfg.project_columns_before_ds_intersection = need_bool(v, key);
        else if (key == "containment_tol") cfg.containment_tol = need_number(v, key);
        else throw UsageError("unknown config key '" + key + "'");
    }
}

ordered_json run_config_json(const RunConfig& cfg) {
    ordered_json j;
    j["d"] = cfg.hyper.d;
    j["gamma"] = cfg.hyper.gamma;
    j["alpha"] = cfg.hyper.alpha;
    j["beta"] = cfg.hyper.beta;
    j["k"] = cfg.hyper.k;
    j["learning_rate"] = cfg.hyper.learning_rate;
    j["epochs"] = cfg.hyper.epochs;
    j["batch_size"] = cfg.hyper.batch_size;
    j["seed"] = cfg.hyper.seed;
    j["corpus"] = cfg.corpus;
    j["bins"] = cfg.bins;
    j["graph"] = cfg.graph;
    j["model"] = cfg.model;
    j["output"] = cfg.output;
    j["use_cross_features"] = cfg.use_cross_features;
    j["project_columns_before_ds_intersection"] = cfg.project_columns_before_ds_intersection;
    j["containment_tol"] = cfg.containment_tol;
    return j;
}

void write_run_manifest(const RunConfig& cfg, const std::string& command,
                        const std::string& artifact) {
    ordered_json j;
    j["schema"] = "vizbox.run/1";
    j["command"] = command;
    j["config"] = run_config_json(cfg);
    write_text(artifact + ".run.json", j.dump(2) + "\n");
}

void cmd_synth(const RunConfig& cfg, std::size_t n, const std::string& rulebook) {
    if (n == 0) throw UsageError("--n must be positive");
    need_path(cfg.output, "output");
    const Corpus corpus = generate_synthetic_corpus(n, cfg.hyper.seed, resolve_rulebook(rulebook));
    save_corpus(corpus, cfg.output);
    write_run_manifest(cfg, "synth", cfg.output);
}

void cmd_split(const RunConfig& cfg, double fraction, const std::string& train_out,
               const std::string& test_out) {
    need_path(cfg.corpus, "corpus");
    if (train_out.empty() || test_out.empty())
        throw UsageError("split needs --train-output and --test-output");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw UsageError("--fraction must be in (0, 1)");
    const Corpus corpus = load_corpus_logged(cfg.corpus, true);
    const auto [train_part, test_part] = split_corpus(corpus, fraction, cfg.hyper.seed);
    save_corpus(train_part, train_out);
    save_corpus(test_part, test_out);
    write_run_manifest(cfg, "split", train_out);
    write_run_manifest(cfg, "split", test_out);
}

void cmd_extract(const RunConfig& cfg, const std::string& role) {
    need_path(cfg.corpus, "corpus");
    need_path(cfg.output, "output");
    if (role != "train" && role != "test" && role != "unspecified")
        throw UsageError("--role must be train, test, or unspecified");
    const Corpus corpus = load_corpus_logged(cfg.corpus, false);
    FeatureDump dump;
    dump.role = role;
    dump.records.reserve(corpus.pairs.size());
    for (const auto& p : corpus.pairs) dump.records.push_back(extract_pair(p));
    save_features(dump, cfg.output);
    write_run_manifest(cfg, "extract", cfg.output);
}

void cmd_fit_bins(const RunConfig& cfg, const std::string& features) {
    need_path(cfg.corpus, "corpus");
    need_path(cfg.output, "output");
    if (features.empty()) throw UsageError("fit-bins needs --features");
    const FeatureDump dump = load_features(features);
    const Corpus corpus = load_corpus_logged(cfg.corpus, true);
    std::map<std::string, ChartType> labels;
    for (const auto& p : corpus.pairs) labels[p.id] = *p.chart_type;
    save_bins(fit_all(dump, labels), cfg.output);
    write_run_manifest(cfg, "fit-bins", cfg.output);
}

void cmd_build_kg(const RunConfig& cfg, const std::string& features,
                  bool negative_polarity) {
    need_path(cfg.corpus, "corpus");
    need_path(cfg.bins, "bins");
    need_path(cfg.output, "output");
    if (features.empty()) throw UsageError("build-kg needs --features");
    const FeatureDump dump = load_features(features);
    const Corpus corpus = load_corpus_logged(cfg.corpus, true);
    GraphBuildOptions opts;
    opts.include_negative_polarity = negative_polarity;
    const KnowledgeGraph kg = build_graph(dump, corpus, load_bins(cfg.bins), opts);
    save_graph(kg, cfg.output);
    write_run_manifest(cfg, "build-kg", cfg.output);
}

void cmd_train(const RunConfig& cfg) {
    need_path(cfg.graph, "graph");
    need_path(cfg.output, "output");
    const KnowledgeGraph kg = load_graph(cfg.graph);
    TrainReport report;
    const ModelParams params = train(kg, cfg.hyper, &report);
    save_model(params, cfg.output);
    write_run_manifest(cfg, "train", cfg.output);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (!report.epoch_mean_loss.empty()) {
        std::cout << "trained d=" << cfg.hyper.d << " model, "
                  << report.epoch_mean_loss.size() << " epochs, final mean loss "
                  << report.epoch_mean_loss.back() << "\n";
    }
}

void cmd_recommend(const RunConfig& cfg) {
    need_path(cfg.model, "model");
    need_path(cfg.bins, "bins");
    need_path(cfg.corpus, "corpus");
    need_path(cfg.output, "output");
    const ModelParams model = load_model(cfg.model);
    const DiscretizationMap bins = load_bins(cfg.bins);
    const Recommender rec(model, bins, inference_options(cfg));
    const Corpus corpus = load_corpus_logged(cfg.corpus, false);

    ordered_json header;
    header["schema"] = "vizbox.recs/1";
    header["config"] = run_config_json(cfg);
    std::string out = header.dump() + "\n";
    for (const auto& pair : corpus.pairs) {
        const Recommendation r = rec.recommend(pair);
        ordered_json line;
        line["id"] = pair.id;
        line["recommendation"] = recommendation_json(r, "trace");
        line["trace"] = trace_json(r.trace);
        line["explanation"] = explanation_json(explain(r, bins));
        out += line.dump() + "\n";
    }
    write_text(cfg.output, out);
    write_run_manifest(cfg, "recommend", cfg.output);
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& table_out) {
    need_path(cfg.model, "model");
    need_path(cfg.bins, "bins");
    need_path(cfg.corpus, "corpus");
    need_path(cfg.output, "output");
    const ModelParams model = load_model(cfg.model);
    const DiscretizationMap bins = load_bins(cfg.bins);
    const Corpus corpus = load_corpus_logged(cfg.corpus, true);
    const EvalReport report =
        evaluate(model, bins, corpus, inference_options(cfg), run_config_json(cfg));
    write_text(cfg.output, report_json(report).dump(2) + "\n");
    write_run_manifest(cfg, "evaluate", cfg.output);
    table_out << report_table(report);
}

}  // namespace vizbox
