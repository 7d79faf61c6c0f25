#include "vizbox/kgraph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vizbox/common.hpp"

namespace vizbox {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kGraphSchema = "vizbox.kg/1";

const char* kEntityClassNames[kNumEntityClasses] = {
    "single_feature", "cross_feature", "column", "dataset", "vis_axis", "vis_type"};
const char* kRelationNames[kNumRelations] = {"sf_to_col", "cf_to_ds", "col_to_ds",
                                             "col_to_axis", "ds_to_type"};

}  // namespace

const char* to_string(EntityClass cls) {
    return kEntityClassNames[static_cast<std::size_t>(cls)];
}

const char* to_string(RelationClass rel) {
    return kRelationNames[static_cast<std::size_t>(rel)];
}

EntityClass head_class(RelationClass rel) {
    switch (rel) {
        case RelationClass::kSfToCol: return EntityClass::kSingleFeature;
        case RelationClass::kCfToDs: return EntityClass::kCrossFeature;
        case RelationClass::kColToDs: return EntityClass::kColumn;
        case RelationClass::kColToAxis: return EntityClass::kColumn;
        case RelationClass::kDsToType: return EntityClass::kDataset;
    }
    throw std::logic_error("bad relation class");
}

EntityClass tail_class(RelationClass rel) {
    switch (rel) {
        case RelationClass::kSfToCol: return EntityClass::kColumn;
        case RelationClass::kCfToDs: return EntityClass::kDataset;
        case RelationClass::kColToDs: return EntityClass::kDataset;
        case RelationClass::kColToAxis: return EntityClass::kVisAxis;
        case RelationClass::kDsToType: return EntityClass::kVisType;
    }
    throw std::logic_error("bad relation class");
}

const std::vector<std::uint32_t>& KnowledgeGraph::tails(std::uint32_t head,
                                                       RelationClass rel) const {
    static const std::vector<std::uint32_t> kEmpty;
    const auto it = index.find({head, static_cast<std::uint32_t>(rel)});
    return it == index.end() ? kEmpty : it->second;
}

std::vector<std::uint32_t> KnowledgeGraph::ids_of(EntityClass cls) const {
    std::vector<std::uint32_t> out;
    for (const auto& e : entities) {
        if (e.cls == cls) out.push_back(e.id);
    }
    return out;
}

std::optional<std::uint32_t> KnowledgeGraph::find(EntityClass cls,
                                                 const std::string& label) const {
    for (const auto& e : entities) {
        if (e.cls == cls && e.label == label) return e.id;
    }
    return std::nullopt;
}

std::optional<std::string> feature_entity_label(const FeatureDef& def,
                                                const std::optional<double>& value,
                                                const DiscretizationMap& bins,
                                                const GraphBuildOptions& opts) {
    if (def.kind == FeatureKind::kBoolean) {
        if (!value.has_value()) return std::nullopt;
        if (*value != 0.0) return def.name + "=true";
        if (opts.include_negative_polarity) return def.name + "=false";
        return std::nullopt;
    }
    const auto it = bins.features.find(def.name);
    if (!value.has_value()) {
        if (it == bins.features.end()) return std::nullopt;
        if (!it->second.has_missing_bin) {
            throw DataError("feature '" + def.name +
                            "' has a missing value but the bins were fitted without one; "
                            "feature dump and bins file do not match");
        }
        return def.name + "=missing";
    }
    if (it == bins.features.end()) {
        throw DataError("feature '" + def.name + "' is not covered by the bins file");
    }
    const std::size_t bin = transform(*value, it->second.cuts);
    return def.name + "=b" + std::to_string(bin);
}

namespace {

struct GraphBuilder {
    KnowledgeGraph kg;
    std::map<std::pair<std::uint8_t, std::string>, std::uint32_t> interned;

    GraphBuilder() {
        add(EntityClass::kVisAxis, "axis:x");
        add(EntityClass::kVisAxis, "axis:y");
        for (ChartType t : kAllChartTypes) {
            add(EntityClass::kVisType, std::string("type:") + to_string(t));
        }
    }

    std::uint32_t add(EntityClass cls, const std::string& label) {
        const auto key = std::make_pair(static_cast<std::uint8_t>(cls), label);
        const auto it = interned.find(key);
        if (it != interned.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(kg.entities.size());
        kg.entities.push_back({id, cls, label});
        interned.emplace(key, id);
        return id;
    }

    void link(std::uint32_t head, RelationClass rel, std::uint32_t tail) {
        kg.triples.push_back({head, static_cast<std::uint32_t>(rel), tail});
    }

    // One entity per observed (feature, value) or none for inactive booleans.
    std::optional<std::uint32_t> feature_entity(EntityClass cls, const FeatureDef& def,
                                                const std::optional<double>& value,
                                                const DiscretizationMap& bins,
                                                const GraphBuildOptions& opts) {
        const auto label = feature_entity_label(def, value, bins, opts);
        if (!label) return std::nullopt;
        return add(cls, *label);
    }
};

void finish(KnowledgeGraph& kg) {
    std::sort(kg.triples.begin(), kg.triples.end());
    kg.triples.erase(std::unique(kg.triples.begin(), kg.triples.end()), kg.triples.end());
    kg.index.clear();
    for (const auto& t : kg.triples) {
        kg.index[{t.head, t.relation}].push_back(t.tail);
    }
}

}  // namespace

KnowledgeGraph build_graph(const FeatureDump& dump, const Corpus& labels,
                           const DiscretizationMap& bins, const GraphBuildOptions& opts) {
    std::map<std::string, const Pair*> by_id;
    for (const auto& p : labels.pairs) by_id[p.id] = &p;

    GraphBuilder b;
    b.kg.bins_fingerprint = bins.fingerprint();
    const auto& sdefs = single_feature_defs();
    const auto& cdefs = cross_feature_defs();

    for (const auto& rec : dump.records) {
        const auto it = by_id.find(rec.id);
        if (it == by_id.end()) {
            throw DataError("pair '" + rec.id + "' from the feature dump is not in the corpus");
        }
        const Pair& pair = *it->second;
        if (!pair.chart_type || !pair.axes[0] || !pair.axes[1]) {
            throw DataError("pair '" + rec.id + "' lacks chart type or axis labels");
        }
        if (*pair.axes[0] == *pair.axes[1]) {
            throw DataError("pair '" + rec.id + "' assigns both columns to the same axis");
        }

        const std::uint32_t ds = b.add(EntityClass::kDataset, "ds:" + rec.id);
        for (std::size_t j = 0; j < 2; ++j) {
            const std::uint32_t col =
                b.add(EntityClass::kColumn, "col:" + rec.id + ":" + std::to_string(j));
            b.link(col, RelationClass::kColToDs, ds);
            b.link(col, RelationClass::kColToAxis, KnowledgeGraph::axis_entity(*pair.axes[j]));
            for (std::size_t f = 0; f < sdefs.size(); ++f) {
                const auto sf = b.feature_entity(EntityClass::kSingleFeature, sdefs[f],
                                                 rec.single[j][f], bins, opts);
                if (sf) b.link(*sf, RelationClass::kSfToCol, col);
            }
        }
        b.link(ds, RelationClass::kDsToType, KnowledgeGraph::type_entity(*pair.chart_type));
        for (std::size_t f = 0; f < cdefs.size(); ++f) {
            const auto cf =
                b.feature_entity(EntityClass::kCrossFeature, cdefs[f], rec.cross[f], bins, opts);
            if (cf) b.link(*cf, RelationClass::kCfToDs, ds);
        }
    }

    finish(b.kg);
    return b.kg;
}

std::vector<PositiveGroup> positive_triples(const KnowledgeGraph& kg) {
    std::vector<PositiveGroup> out;
    out.reserve(kg.index.size());
    for (const auto& [key, tails] : kg.index) {
        out.push_back({key.first, key.second, tails});
    }
    return out;
}

SignatureIndex build_signature_index(const KnowledgeGraph& kg) {
    SignatureIndex idx;
    for (const auto& t : kg.triples) {
        switch (static_cast<RelationClass>(t.relation)) {
            case RelationClass::kSfToCol:
                idx.column_signature[t.tail].push_back(t.head);
                break;
            case RelationClass::kCfToDs:
                idx.dataset_cross[t.tail].push_back(t.head);
                break;
            case RelationClass::kColToDs:
                idx.dataset_columns[t.tail].push_back(t.head);
                break;
            default:
                break;
        }
    }
    for (auto* m : {&idx.column_signature, &idx.dataset_cross, &idx.dataset_columns}) {
        for (auto& [_, v] : *m) std::sort(v.begin(), v.end());
    }
    for (const auto& e : kg.entities) {
        if (e.cls == EntityClass::kColumn) idx.column_signature.try_emplace(e.id);
        if (e.cls == EntityClass::kDataset) {
            idx.dataset_cross.try_emplace(e.id);
            idx.dataset_columns.try_emplace(e.id);
        }
    }

    std::map<std::vector<std::uint32_t>, std::vector<std::uint32_t>> col_groups;
    for (const auto& [col, sig] : idx.column_signature) col_groups[sig].push_back(col);
    for (const auto& [_, cols] : col_groups) {
        std::set<std::uint32_t> axes;
        for (const auto col : cols) {
            for (const auto a : kg.tails(col, RelationClass::kColToAxis)) axes.insert(a);
        }
        const std::vector<std::uint32_t> axis_union(axes.begin(), axes.end());
        for (const auto col : cols) {
            idx.equivalent_columns[col] = cols;
            idx.axis_answers[col] = axis_union;
        }
    }

    // dataset signature: the multiset of its columns' signatures + CF set
    using DsKey = std::pair<std::vector<std::vector<std::uint32_t>>, std::vector<std::uint32_t>>;
    std::map<DsKey, std::vector<std::uint32_t>> ds_groups;
    for (const auto& [ds, cols] : idx.dataset_columns) {
        std::vector<std::vector<std::uint32_t>> sigs;
        for (const auto col : cols) sigs.push_back(idx.column_signature.at(col));
        std::sort(sigs.begin(), sigs.end());
        ds_groups[{std::move(sigs), idx.dataset_cross.at(ds)}].push_back(ds);
    }
    for (const auto& [_, dss] : ds_groups) {
        std::set<std::uint32_t> types;
        for (const auto ds : dss) {
            for (const auto t : kg.tails(ds, RelationClass::kDsToType)) types.insert(t);
        }
        const std::vector<std::uint32_t> type_union(types.begin(), types.end());
        for (const auto ds : dss) {
            idx.equivalent_datasets[ds] = dss;
            idx.type_answers[ds] = type_union;
        }
    }
    for (const auto& [ds, cols] : idx.dataset_columns) {
        for (const auto col : cols) idx.dataset_answers[col] = idx.equivalent_datasets.at(ds);
    }
    return idx;
}

nlohmann::ordered_json graph_stats(const KnowledgeGraph& kg) {
    json entity_counts = json::object();
    for (const auto* name : kEntityClassNames) entity_counts[name] = 0;
    for (const auto& e : kg.entities) {
        entity_counts[to_string(e.cls)] = entity_counts[to_string(e.cls)].get<int>() + 1;
    }
    json triple_counts = json::object();
    for (const auto* name : kRelationNames) triple_counts[name] = 0;
    for (const auto& t : kg.triples) {
        const auto* name = kRelationNames[t.relation];
        triple_counts[name] = triple_counts[name].get<int>() + 1;
    }
    // 1-to-N profile: how many (head, relation) groups have each tail-set size
    std::array<std::map<std::size_t, std::size_t>, kNumRelations> hist;
    for (const auto& [key, tails] : kg.index) hist[key.second][tails.size()]++;
    json tail_sizes = json::object();
    for (std::size_t r = 0; r < kNumRelations; ++r) {
        json h = json::object();
        for (const auto& [size, count] : hist[r]) h[std::to_string(size)] = count;
        tail_sizes[kRelationNames[r]] = std::move(h);
    }
    return json{{"entities", entity_counts},
                {"triples", triple_counts},
                {"tail_set_sizes", tail_sizes}};
}

std::string canonical_form(const KnowledgeGraph& kg, bool anonymize_instances) {
    // canonical label per entity; instance entities optionally replaced by
    // structural ordinals (datasets ranked by structure, then their columns)
    std::vector<std::string> label(kg.entities.size());
    for (const auto& e : kg.entities) label[e.id] = e.label;

    if (anonymize_instances) {
        std::map<std::uint32_t, std::string> col_sig, ds_sig;
        for (const auto& e : kg.entities) {
            if (e.cls != EntityClass::kColumn) continue;
            std::ostringstream os;
            std::vector<std::string> parts;
            for (const auto& t : kg.triples) {
                if (t.relation == static_cast<std::uint32_t>(RelationClass::kSfToCol) &&
                    t.tail == e.id) {
                    parts.push_back(kg.entities[t.head].label);
                }
            }
            std::sort(parts.begin(), parts.end());
            for (const auto& p : parts) os << p << ";";
            for (const auto a : kg.tails(e.id, RelationClass::kColToAxis)) {
                os << "@" << kg.entities[a].label;
            }
            col_sig[e.id] = os.str();
        }
        for (const auto& e : kg.entities) {
            if (e.cls != EntityClass::kDataset) continue;
            std::vector<std::string> cols, cfs;
            for (const auto& t : kg.triples) {
                if (t.relation == static_cast<std::uint32_t>(RelationClass::kColToDs) &&
                    t.tail == e.id) {
                    cols.push_back(col_sig.at(t.head));
                }
                if (t.relation == static_cast<std::uint32_t>(RelationClass::kCfToDs) &&
                    t.tail == e.id) {
                    cfs.push_back(kg.entities[t.head].label);
                }
            }
            std::sort(cols.begin(), cols.end());
            std::sort(cfs.begin(), cfs.end());
            std::ostringstream os;
            for (const auto& c : cols) os << "[" << c << "]";
            for (const auto& c : cfs) os << c << ";";
            for (const auto t : kg.tails(e.id, RelationClass::kDsToType)) {
                os << "@" << kg.entities[t].label;
            }
            ds_sig[e.id] = os.str();
        }
        // rank datasets by structure; identical structures are automorphic,
        // so the residual original-id tie-break cannot change the output
        std::vector<std::uint32_t> ds_order;
        for (const auto& [ds, _] : ds_sig) ds_order.push_back(ds);
        std::stable_sort(ds_order.begin(), ds_order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return ds_sig[a] < ds_sig[b]; });
        std::map<std::uint32_t, std::size_t> ds_rank;
        for (std::size_t i = 0; i < ds_order.size(); ++i) {
            ds_rank[ds_order[i]] = i;
            label[ds_order[i]] = "ds#" + std::to_string(i);
        }
        std::vector<std::uint32_t> col_order;
        for (const auto& [col, _] : col_sig) col_order.push_back(col);
        std::stable_sort(col_order.begin(), col_order.end(),
                         [&](std::uint32_t a, std::uint32_t b) {
                             const auto da = kg.tails(a, RelationClass::kColToDs);
                             const auto db = kg.tails(b, RelationClass::kColToDs);
                             const auto ra = da.empty() ? SIZE_MAX : ds_rank.at(da[0]);
                             const auto rb = db.empty() ? SIZE_MAX : ds_rank.at(db[0]);
                             if (ra != rb) return ra < rb;
                             return col_sig[a] < col_sig[b];
                         });
        for (std::size_t i = 0; i < col_order.size(); ++i) {
            label[col_order[i]] = "col#" + std::to_string(i);
        }
    }

    std::vector<std::uint32_t> order(kg.entities.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (kg.entities[a].cls != kg.entities[b].cls) return kg.entities[a].cls < kg.entities[b].cls;
        return label[a] < label[b];
    });
    std::vector<std::uint32_t> renum(kg.entities.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) renum[order[i]] = i;

    std::ostringstream os;
    for (const auto id : order) {
        os << "E " << to_string(kg.entities[id].cls) << " " << label[id] << "\n";
    }
    std::vector<Triple> ts;
    ts.reserve(kg.triples.size());
    for (const auto& t : kg.triples) ts.push_back({renum[t.head], t.relation, renum[t.tail]});
    std::sort(ts.begin(), ts.end());
    for (const auto& t : ts) {
        os << "T " << t.head << " " << kRelationNames[t.relation] << " " << t.tail << "\n";
    }
    return os.str();
}

void save_graph(const KnowledgeGraph& kg, const std::string& path) {
    json entities = json::array();
    for (const auto& e : kg.entities) {
        entities.push_back({{"id", e.id}, {"class", to_string(e.cls)}, {"label", e.label}});
    }
    json triples = json::array();
    for (const auto& t : kg.triples) triples.push_back({t.head, t.relation, t.tail});
    json relations = json::array();
    for (const auto* name : kRelationNames) relations.push_back(name);

    const json doc{{"schema", kGraphSchema},
                   {"bins_fingerprint", kg.bins_fingerprint},
                   {"relations", relations},
                   {"entities", entities},
                   {"triples", triples}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write graph file: " + path);
    out << doc.dump(2) << "\n";
}

KnowledgeGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read graph file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("graph file is not valid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object() || doc.value("schema", "") != kGraphSchema) {
        throw DataError("graph file lacks schema '" + std::string(kGraphSchema) + "'");
    }

    KnowledgeGraph kg;
    kg.bins_fingerprint = doc.value("bins_fingerprint", "");
    std::map<std::string, EntityClass> class_by_name;
    for (std::size_t i = 0; i < kNumEntityClasses; ++i) {
        class_by_name[kEntityClassNames[i]] = static_cast<EntityClass>(i);
    }
    std::set<std::pair<std::uint8_t, std::string>> seen;
    for (const auto& e : doc.at("entities")) {
        Entity ent;
        ent.id = e.at("id").get<std::uint32_t>();
        const std::string cls = e.at("class").get<std::string>();
        const auto it = class_by_name.find(cls);
        if (it == class_by_name.end()) throw DataError("unknown entity class: " + cls);
        ent.cls = it->second;
        ent.label = e.at("label").get<std::string>();
        if (ent.id != kg.entities.size()) throw DataError("entity ids must be dense and ordered");
        if (!seen.insert({static_cast<std::uint8_t>(ent.cls), ent.label}).second) {
            throw DataError("duplicate entity label in class: " + ent.label);
        }
        kg.entities.push_back(std::move(ent));
    }
    for (const auto& t : doc.at("triples")) {
        Triple tr{t.at(0).get<std::uint32_t>(), t.at(1).get<std::uint32_t>(),
                  t.at(2).get<std::uint32_t>()};
        if (tr.head >= kg.entities.size() || tr.tail >= kg.entities.size() ||
            tr.relation >= kNumRelations) {
            throw DataError("triple references an unknown entity or relation");
        }
        const auto rel = static_cast<RelationClass>(tr.relation);
        if (kg.entities[tr.head].cls != head_class(rel) ||
            kg.entities[tr.tail].cls != tail_class(rel)) {
            throw DataError("triple classes do not match its relation");
        }
        kg.triples.push_back(tr);
    }
    finish(kg);
    return kg;
}

}  // namespace vizbox
