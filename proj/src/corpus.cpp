#include "vizbox/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "vizbox/common.hpp"

namespace vizbox {

using json = nlohmann::ordered_json;

const char* to_string(ChartType t) {
    switch (t) {
        case ChartType::kBar: return "bar";
        case ChartType::kLine: return "line";
        case ChartType::kScatter: return "scatter";
        case ChartType::kBox: return "box";
    }
    return "?";
}

std::optional<ChartType> chart_type_from_string(const std::string& s) {
    for (ChartType t : kAllChartTypes) {
        if (s == to_string(t)) return t;
    }
    return std::nullopt;
}

const char* to_string(Axis a) { return a == Axis::kX ? "x" : "y"; }

namespace {

std::string cell_from_json(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();  // numbers keep their shortest round-trip form
}

std::optional<Pair> parse_pair_record(const json& rec, bool require_labels, std::string* why) {
    if (!rec.is_object()) {
        *why = "record is not an object";
        return std::nullopt;
    }
    Pair p;
    if (!rec.contains("id") || !rec["id"].is_string()) {
        *why = "missing string id";
        return std::nullopt;
    }
    p.id = rec["id"].get<std::string>();
    if (!rec.contains("columns") || !rec["columns"].is_array() || rec["columns"].size() != 2) {
        *why = "expected exactly two columns";
        return std::nullopt;
    }
    for (const auto& cj : rec["columns"]) {
        if (!cj.is_object() || !cj.contains("name") || !cj["name"].is_string() ||
            !cj.contains("values") || !cj["values"].is_array()) {
            *why = "column needs a name and a values array";
            return std::nullopt;
        }
        std::vector<std::string> cells;
        cells.reserve(cj["values"].size());
        for (const auto& v : cj["values"]) cells.push_back(cell_from_json(v));
        p.columns.push_back(make_column(cj["name"].get<std::string>(), std::move(cells)));
    }
    if (p.columns[0].cells.empty() || p.columns[1].cells.empty()) {
        *why = "empty column";
        return std::nullopt;
    }
    const bool has_labels = rec.contains("chart_type") || rec.contains("axes");
    if (!has_labels && !require_labels) return p;
    if (!rec.contains("chart_type") || !rec["chart_type"].is_string()) {
        *why = "missing chart_type";
        return std::nullopt;
    }
    p.chart_type = chart_type_from_string(rec["chart_type"].get<std::string>());
    if (!p.chart_type) {
        *why = "unknown chart_type '" + rec["chart_type"].get<std::string>() + "'";
        return std::nullopt;
    }
    if (!rec.contains("axes") || !rec["axes"].is_object() || rec["axes"].size() != 2) {
        *why = "axes must map both column names";
        return std::nullopt;
    }
    for (const auto& [name, axj] : rec["axes"].items()) {
        int idx = -1;
        if (name == p.columns[0].name) {
            idx = 0;
        } else if (name == p.columns[1].name) {
            idx = 1;
        } else {
            *why = "axes references unknown column '" + name + "'";
            return std::nullopt;
        }
        if (!axj.is_string() || (axj != "x" && axj != "y")) {
            *why = "axis must be \"x\" or \"y\"";
            return std::nullopt;
        }
        p.axes[static_cast<std::size_t>(idx)] = (axj == "x") ? Axis::kX : Axis::kY;
    }
    if (!p.axes[0] || !p.axes[1] || p.axes[0] == p.axes[1]) {
        *why = "axes must assign one x and one y";
        return std::nullopt;
    }
    return p;
}

}  // namespace

LoadReport load_corpus(const std::string& path, bool require_labels) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    LoadReport report;
    report.corpus.provenance = "loaded:" + path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) {
            report.warnings.push_back("line " + std::to_string(lineno) + ": unparseable JSON");
            continue;
        }
        std::string why;
        auto p = parse_pair_record(rec, require_labels, &why);
        if (!p) {
            report.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
            continue;
        }
        report.corpus.pairs.push_back(std::move(*p));
    }
    return report;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus file: " + path);
    for (const auto& p : corpus.pairs) {
        json rec;
        rec["id"] = p.id;
        rec["columns"] = json::array();
        for (const auto& c : p.columns) {
            json cj;
            cj["name"] = c.name;
            cj["values"] = c.cells;
            rec["columns"].push_back(std::move(cj));
        }
        if (p.chart_type) {
            rec["chart_type"] = to_string(*p.chart_type);
            json axes;
            for (std::size_t i = 0; i < 2; ++i) axes[p.columns[i].name] = to_string(*p.axes[i]);
            rec["axes"] = std::move(axes);
        }
        out << rec.dump() << '\n';
    }
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double fraction,
                                       std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) throw UsageError("split fraction must be in [0,1]");
    const std::size_t n = corpus.pairs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);
    const auto train_n =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<bool> in_train(n, false);
    for (std::size_t i = 0; i < train_n && i < n; ++i) in_train[order[i]] = true;
    Corpus train, test;
    train.provenance = corpus.provenance + ":train";
    test.provenance = corpus.provenance + ":test";
    train.seed = test.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? train : test).pairs.push_back(corpus.pairs[i]);
    }
    return {std::move(train), std::move(test)};
}

// --- synthetic corpus ------------------------------------------------------

Rulebook default_rulebook() {
    return {
        {"t+q", {ChartType::kLine}},
        {"c+q", {ChartType::kBar}},
        {"q+q_corr", {ChartType::kScatter}},
        {"q+q_indep", {ChartType::kBox}},
    };
}

Rulebook adaptive_rulebook() {
    return {
        {"t+q", {ChartType::kLine, ChartType::kBar}},
        {"c+q", {ChartType::kBar, ChartType::kBox}},
        {"q+q_corr", {ChartType::kScatter, ChartType::kLine}},
    };
}

Rulebook resolve_rulebook(const std::string& name_or_path) {
    if (name_or_path == "default") return default_rulebook();
    if (name_or_path == "adaptive") return adaptive_rulebook();
    std::ifstream in(name_or_path);
    if (!in) throw DataError("cannot open rulebook: " + name_or_path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.empty()) {
        throw DataError("rulebook must be a JSON object {archetype: [chart types]}");
    }
    Rulebook rb;
    for (const auto& [arch, types] : j.items()) {
        if (archetype_of_id("synth-" + arch + "-0").empty()) {
            throw DataError("unknown archetype '" + arch + "' in rulebook");
        }
        if (!types.is_array() || types.empty()) {
            throw DataError("rulebook entry '" + arch + "' needs a non-empty type array");
        }
        std::vector<ChartType> list;
        for (const auto& t : types) {
            auto ct = t.is_string() ? chart_type_from_string(t.get<std::string>()) : std::nullopt;
            if (!ct) throw DataError("rulebook entry '" + arch + "' has an unknown chart type");
            list.push_back(*ct);
        }
        rb[arch] = std::move(list);
    }
    return rb;
}

std::string archetype_of_id(const std::string& id) {
    static const std::vector<std::string> kArchetypes{"t+q", "c+q", "q+q_corr", "q+q_indep"};
    if (id.rfind("synth-", 0) != 0) return "";
    for (const auto& a : kArchetypes) {
        if (id.compare(6, a.size(), a) == 0 && id.size() > 6 + a.size() &&
            id[6 + a.size()] == '-') {
            return a;
        }
    }
    return "";
}

namespace {

std::string fmt4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

const std::vector<std::string>& temporal_names() {
    static const std::vector<std::string> v{"date", "time", "timestamp", "month", "period"};
    return v;
}
const std::vector<std::string>& value_names() {
    static const std::vector<std::string> v{"y", "value", "price", "amount", "score", "total"};
    return v;
}
const std::vector<std::string>& category_names() {
    static const std::vector<std::string> v{"group", "region", "label", "class", "team"};
    return v;
}
const std::vector<std::string>& xish_names() {
    static const std::vector<std::string> v{"x", "index", "idx", "x_value", "x_pos"};
    return v;
}
const std::vector<std::string>& category_tokens() {
    static const std::vector<std::string> v{"alpha", "beta",  "gamma", "delta", "north", "south",
                                            "east",  "west",  "red",   "blue",  "green", "gold"};
    return v;
}

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
    return pool[static_cast<std::size_t>(rng.uniform_int(pool.size()))];
}

Column make_temporal_column(std::size_t len, Rng& rng) {
    int year = 1998 + static_cast<int>(rng.uniform_int(21));
    int month = 1 + static_cast<int>(rng.uniform_int(12));
    std::vector<std::string> cells;
    cells.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-01", year, month);
        cells.emplace_back(buf);
        if (++month > 12) {
            month = 1;
            ++year;
        }
    }
    return make_column(pick(temporal_names(), rng), std::move(cells));
}

Column make_walk_column(std::size_t len, Rng& rng) {
    const bool integer = rng.uniform() < 0.25;
    std::vector<std::string> cells;
    cells.reserve(len);
    double v = rng.uniform(0.0, 100.0);
    for (std::size_t i = 0; i < len; ++i) {
        if (integer) {
            cells.push_back(std::to_string(static_cast<long long>(std::llround(v))));
        } else {
            cells.push_back(fmt4(v));
        }
        v += rng.uniform(-5.0, 5.0);
    }
    return make_column(pick(value_names(), rng), std::move(cells));
}

Column make_category_column(std::size_t len, Rng& rng) {
    const std::size_t m = 3 + static_cast<std::size_t>(rng.uniform_int(4));
    std::vector<std::string> tokens = category_tokens();
    rng.shuffle(tokens);
    tokens.resize(m);
    std::vector<std::string> cells;
    cells.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        cells.push_back(tokens[static_cast<std::size_t>(rng.uniform_int(m))]);
    }
    return make_column(pick(category_names(), rng), std::move(cells));
}

// q+q pairs: first column draws, second column a linear response. The
// independent variant reuses the same response recipe on a permuted copy of
// the first column, so single-column marginals match the correlated variant
// and only the cross-column relationship differs.
std::pair<Column, Column> make_qq_columns(std::size_t len, bool correlated, Rng& rng) {
    std::vector<double> a(len);
    for (auto& v : a) v = rng.uniform(0.0, 100.0);
    const double slope = rng.uniform(0.5, 3.0);
    const double intercept = rng.uniform(-20.0, 20.0);
    std::vector<double> base = a;
    if (!correlated) {
        std::vector<std::size_t> perm(len);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        rng.shuffle(perm);
        for (std::size_t i = 0; i < len; ++i) base[i] = a[perm[i]];
    }
    std::vector<std::string> ca, cb;
    ca.reserve(len);
    cb.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        ca.push_back(fmt4(a[i]));
        cb.push_back(fmt4(slope * base[i] + intercept + rng.uniform(-3.0, 3.0)));
    }
    return {make_column(pick(xish_names(), rng), std::move(ca)),
            make_column(pick(value_names(), rng), std::move(cb))};
}

void maybe_blank_cells(Pair& p, Rng& rng) {
    if (rng.uniform() >= 0.1) return;
    auto& col = p.columns[rng.uniform_int(2)];
    const std::size_t holes = 1 + static_cast<std::size_t>(rng.uniform_int(2));
    for (std::size_t h = 0; h < holes; ++h) {
        col.cells[static_cast<std::size_t>(rng.uniform_int(col.cells.size()))] = "";
    }
    // retype with the holes in place
    auto refreshed = make_column(col.name, col.cells);
    col = std::move(refreshed);
}

}  // namespace

Corpus generate_synthetic_corpus(std::size_t n, std::uint64_t seed, const Rulebook& rulebook) {
    if (rulebook.empty()) throw UsageError("rulebook has no archetypes");
    std::vector<std::string> archetypes;
    for (const auto& [k, _] : rulebook) archetypes.push_back(k);
    Corpus corpus;
    corpus.seed = seed;
    corpus.provenance = "synthetic";
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& arch = archetypes[i % archetypes.size()];
        const auto& admissible = rulebook.at(arch);
        const std::size_t len = 24 + static_cast<std::size_t>(rng.uniform_int(25));
        Pair p;
        char idbuf[80];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%s-%06zu", arch.c_str(), i);
        p.id = idbuf;
        if (arch == "t+q") {
            p.columns.push_back(make_temporal_column(len, rng));
            p.columns.push_back(make_walk_column(len, rng));
        } else if (arch == "c+q") {
            p.columns.push_back(make_category_column(len, rng));
            p.columns.push_back(make_walk_column(len, rng));
        } else {
            auto [qa, qb] = make_qq_columns(len, arch == "q+q_corr", rng);
            p.columns.push_back(std::move(qa));
            p.columns.push_back(std::move(qb));
        }
        // first column is the x role by construction; swap storage order for
        // the typed archetypes so the model can't lean on position. q+q pairs
        // stay in order because the x/y tie there is broken by column order.
        p.axes = {Axis::kX, Axis::kY};
        if ((arch == "t+q" || arch == "c+q") && rng.uniform() < 0.5) {
            std::swap(p.columns[0], p.columns[1]);
            p.axes = {Axis::kY, Axis::kX};
        }
        p.chart_type = admissible[static_cast<std::size_t>(rng.uniform_int(admissible.size()))];
        maybe_blank_cells(p, rng);
        corpus.pairs.push_back(std::move(p));
    }
    return corpus;
}

}  // namespace vizbox
