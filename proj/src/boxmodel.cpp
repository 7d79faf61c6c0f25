#include "vizbox/boxmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "boxmodel_internal.hpp"

namespace vizbox {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kModelSchema = "vizbox.model/1";

EntityClass parse_entity_class(const std::string& name) {
    for (std::size_t c = 0; c < kNumEntityClasses; ++c) {
        const auto cls = static_cast<EntityClass>(c);
        if (to_string(cls) == name) return cls;
    }
    throw DataError("model file: unknown entity class '" + name + "'");
}

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError(std::string("model file: non-finite value in ") + what);
    }
}

std::vector<double> read_vec(const ordered_json& j, std::size_t n, const char* what) {
    if (!j.is_array() || j.size() != n)
        throw DataError(std::string("model file: ") + what + " must be an array of " +
                        std::to_string(n) + " numbers");
    std::vector<double> out;
    out.reserve(n);
    for (const auto& x : j) {
        if (!x.is_number()) throw DataError(std::string("model file: ") + what + " has a non-number");
        out.push_back(x.get<double>());
    }
    check_finite(out, what);
    return out;
}

}  // namespace

void Hyperparams::validate() const {
    if (d == 0 || d > 4096) throw UsageError("dim must be between 1 and 4096");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("gamma must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw UsageError("alpha must be >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw UsageError("beta must be >= 0");
    if (k == 0) throw UsageError("negatives-per-positive must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw UsageError("learning rate must be >= 0");
    if (batch_size == 0) throw UsageError("batch size must be >= 1");
}

std::optional<std::uint32_t> ModelParams::find(EntityClass cls, const std::string& label) const {
    for (std::uint32_t id = 0; id < entities.size(); ++id) {
        if (entities[id].cls == cls && entities[id].label == label) return id;
    }
    return std::nullopt;
}

ModelParams init_params(const KnowledgeGraph& kg, const Hyperparams& hyper, Rng& rng) {
    hyper.validate();
    ModelParams p;
    p.hyper = hyper;
    p.bins_fingerprint = kg.bins_fingerprint;
    p.entities = kg.entities;

    const std::size_t d = hyper.d;
    const double bound = hyper.gamma / (2.0 * std::sqrt(static_cast<double>(d)));

    p.points.resize(p.entities.size() * d);
    for (double& x : p.points) x = rng.uniform(-bound, bound);

    for (auto& rel : p.relations) {
        rel.shift.resize(d);
        rel.growth.resize(d);
        for (double& x : rel.shift) x = rng.uniform(-bound, bound);
        for (double& x : rel.growth) x = rng.uniform(0.0, bound);
    }

    AttentionNet& net = p.attention;
    net.d = d;
    net.w1.resize(4 * d * d);
    net.b1.assign(2 * d, 0.0);
    net.w2.resize(2 * d);
    net.b2 = 0.0;
    net.wg.resize(2 * d * d);
    net.bg.assign(d, 0.0);
    for (double& x : net.w1) x = rng.uniform(-0.1, 0.1);
    for (double& x : net.w2) x = rng.uniform(-0.1, 0.1);
    for (double& x : net.wg) x = rng.uniform(-0.1, 0.1);
    return p;
}

// --- box algebra ---

Box project_point(const double* point, const RelationEmbedding& rel, std::size_t d) {
    Box b;
    b.center.resize(d);
    b.offset.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        b.center[j] = point[j] + rel.shift[j];
        b.offset[j] = rel.growth[j];
    }
    return b;
}

Box project_box(const Box& box, const RelationEmbedding& rel) {
    const std::size_t d = box.center.size();
    Box b;
    b.center.resize(d);
    b.offset.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        b.center[j] = box.center[j] + rel.shift[j];
        b.offset[j] = box.offset[j] + rel.growth[j];
    }
    return b;
}

namespace detail {

void eval_branch(const AttentionNet& net, const double* cen, const double* off, double* h_out,
                 double* s_out) {
    const std::size_t d = net.d;
    const std::size_t two_d = 2 * d;
    double s = net.b2;
    for (std::size_t r = 0; r < two_d; ++r) {
        const double* row = net.w1.data() + r * two_d;
        double acc = net.b1[r];
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * cen[j];
        for (std::size_t j = 0; j < d; ++j) acc += row[d + j] * off[j];
        const double h = std::tanh(acc);
        h_out[r] = h;
        s += net.w2[r] * h;
    }
    *s_out = s;
}

void pool_branches(const AttentionNet& net, const std::vector<const double*>& cens,
                   const std::vector<const double*>& offs, const std::vector<const double*>& hs,
                   const std::vector<double>& scores, PoolEval& ev) {
    const std::size_t d = net.d;
    const std::size_t two_d = 2 * d;
    const std::size_t m = cens.size();

    ev.order.resize(m);
    for (std::size_t i = 0; i < m; ++i) ev.order[i] = i;
    std::stable_sort(ev.order.begin(), ev.order.end(), [&](std::size_t a, std::size_t b) {
        const double* ca = cens[a];
        const double* cb = cens[b];
        for (std::size_t j = 0; j < d; ++j) {
            if (ca[j] != cb[j]) return ca[j] < cb[j];
        }
        const double* oa = offs[a];
        const double* ob = offs[b];
        for (std::size_t j = 0; j < d; ++j) {
            if (oa[j] != ob[j]) return oa[j] < ob[j];
        }
        return false;
    });

    // softmax over scores, max-subtracted, sums in canonical order
    ev.weights.resize(m);
    double smax = scores[ev.order[0]];
    for (std::size_t i = 1; i < m; ++i) smax = std::max(smax, scores[ev.order[i]]);
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = std::exp(scores[ev.order[i]] - smax);
        ev.weights[i] = e;
        z += e;
    }
    for (std::size_t i = 0; i < m; ++i) ev.weights[i] /= z;

    ev.out.center.assign(d, 0.0);
    ev.big_h.assign(two_d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double w = ev.weights[i];
        const double* c = cens[ev.order[i]];
        for (std::size_t j = 0; j < d; ++j) ev.out.center[j] += w * c[j];
        const double* h = hs[ev.order[i]];
        for (std::size_t r = 0; r < two_d; ++r) ev.big_h[r] += w * h[r];
    }

    ev.gate_pre.resize(d);
    ev.gate.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double* row = net.wg.data() + j * two_d;
        double acc = net.bg[j];
        for (std::size_t r = 0; r < two_d; ++r) acc += row[r] * ev.big_h[r];
        ev.gate_pre[j] = acc;
        ev.gate[j] = sigmoid(acc);
    }

    ev.argmin.assign(d, 0);
    ev.out.offset.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t best = 0;
        double omin = offs[ev.order[0]][j];
        for (std::size_t i = 1; i < m; ++i) {
            const double o = offs[ev.order[i]][j];
            if (o < omin) {
                omin = o;
                best = i;
            }
        }
        ev.argmin[j] = best;
        ev.out.offset[j] = ev.gate[j] * omin;
    }
}

void eval_dist(const double* t, const double* cen, const double* off, std::size_t d, double alpha,
               double beta, DistEval& ev) {
    ev.outside = 0.0;
    ev.inside = 0.0;
    ev.out_hi.resize(d);
    ev.out_lo.resize(d);
    ev.v_sign.resize(d);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = cen[j] - off[j];
        const double hi = cen[j] + off[j];
        const double above = t[j] - hi;
        const double below = lo - t[j];
        ev.out_hi[j] = above > 0.0 ? 1 : 0;
        ev.out_lo[j] = below > 0.0 ? 1 : 0;
        if (above > 0.0) ev.outside += above;
        if (below > 0.0) ev.outside += below;
        const double clamped = std::min(hi, std::max(lo, t[j]));
        const double v = cen[j] - clamped;
        ev.v_sign[j] = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        ev.inside += std::abs(v);
        sq += (hi - lo) * (hi - lo);
    }
    ev.size = std::sqrt(sq);
    ev.total = ev.outside + alpha * ev.inside + beta * ev.size;
}

}  // namespace detail

std::vector<double> attention_weights(const std::vector<Box>& boxes, const AttentionNet& net) {
    std::vector<double> w;
    intersect(boxes, net, &w);
    return w;
}

Box intersect(const std::vector<Box>& boxes, const AttentionNet& net,
              std::vector<double>* weights_out) {
    if (boxes.empty()) throw std::invalid_argument("intersect: no boxes");
    const std::size_t d = net.d;
    const std::size_t m = boxes.size();
    for (const Box& b : boxes) {
        if (b.center.size() != d || b.offset.size() != d)
            throw std::invalid_argument("intersect: box dimension mismatch");
    }

    std::vector<std::vector<double>> h(m, std::vector<double>(2 * d));
    std::vector<double> scores(m);
    std::vector<const double*> cens(m), offs(m), hs(m);
    for (std::size_t i = 0; i < m; ++i) {
        detail::eval_branch(net, boxes[i].center.data(), boxes[i].offset.data(), h[i].data(),
                            &scores[i]);
        cens[i] = boxes[i].center.data();
        offs[i] = boxes[i].offset.data();
        hs[i] = h[i].data();
    }

    detail::PoolEval ev;
    detail::pool_branches(net, cens, offs, hs, scores, ev);
    if (weights_out) {
        weights_out->assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) (*weights_out)[ev.order[i]] = ev.weights[i];
    }
    return std::move(ev.out);
}

double dist_outside(const double* t, const Box& b) {
    detail::DistEval ev;
    detail::eval_dist(t, b.center.data(), b.offset.data(), b.center.size(), 0.0, 0.0, ev);
    return ev.outside;
}

double dist_inside(const double* t, const Box& b) {
    detail::DistEval ev;
    detail::eval_dist(t, b.center.data(), b.offset.data(), b.center.size(), 0.0, 0.0, ev);
    return ev.inside;
}

double box_size(const Box& b) {
    double sq = 0.0;
    for (double o : b.offset) sq += (2.0 * o) * (2.0 * o);
    return std::sqrt(sq);
}

double dist_box(const double* t, const Box& b, double alpha, double beta) {
    detail::DistEval ev;
    detail::eval_dist(t, b.center.data(), b.offset.data(), b.center.size(), alpha, beta, ev);
    return ev.total;
}

bool contains(const Box& b, const double* t, double tol) {
    for (std::size_t j = 0; j < b.center.size(); ++j) {
        if (t[j] < b.center[j] - b.offset[j] - tol) return false;
        if (t[j] > b.center[j] + b.offset[j] + tol) return false;
    }
    return true;
}

double loss_fn(double pos_dist, const std::vector<double>& neg_dists, double gamma) {
    if (neg_dists.empty()) throw std::invalid_argument("loss_fn: no negatives");
    double loss = detail::softplus(pos_dist - gamma);
    double neg = 0.0;
    for (double nd : neg_dists) neg += detail::softplus(gamma - nd);
    return loss + neg / static_cast<double>(neg_dists.size());
}

// --- serialization ---

void save_model(const ModelParams& params, const std::string& path) {
    const std::size_t d = params.hyper.d;
    ordered_json j;
    j["schema"] = kModelSchema;
    j["bins_fingerprint"] = params.bins_fingerprint;
    j["hyper"] = {{"d", params.hyper.d},
                  {"gamma", params.hyper.gamma},
                  {"alpha", params.hyper.alpha},
                  {"beta", params.hyper.beta},
                  {"k", params.hyper.k},
                  {"learning_rate", params.hyper.learning_rate},
                  {"epochs", params.hyper.epochs},
                  {"batch_size", params.hyper.batch_size},
                  {"seed", params.hyper.seed}};
    auto ents = ordered_json::array();
    for (const Entity& e : params.entities)
        ents.push_back({{"class", to_string(e.cls)}, {"label", e.label}});
    j["entities"] = std::move(ents);
    auto pts = ordered_json::array();
    for (std::size_t i = 0; i < params.entities.size(); ++i) {
        const double* p = params.points.data() + i * d;
        pts.push_back(std::vector<double>(p, p + d));
    }
    j["points"] = std::move(pts);
    auto rels = ordered_json::object();
    for (std::size_t r = 0; r < kNumRelations; ++r) {
        const RelationEmbedding& rel = params.relations[r];
        rels[to_string(static_cast<RelationClass>(r))] = {{"shift", rel.shift},
                                                          {"growth", rel.growth}};
    }
    j["relations"] = std::move(rels);
    j["attention"] = {{"w1", params.attention.w1}, {"b1", params.attention.b1},
                      {"w2", params.attention.w2}, {"b2", params.attention.b2},
                      {"wg", params.attention.wg}, {"bg", params.attention.bg}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing model file: " + path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw DataError("model file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object() || j.value("schema", "") != kModelSchema)
        throw DataError("model file: unsupported schema");

    ModelParams p;
    try {
        const auto& h = j.at("hyper");
        p.hyper.d = h.at("d").get<std::size_t>();
        p.hyper.gamma = h.at("gamma").get<double>();
        p.hyper.alpha = h.at("alpha").get<double>();
        p.hyper.beta = h.at("beta").get<double>();
        p.hyper.k = h.at("k").get<std::size_t>();
        p.hyper.learning_rate = h.at("learning_rate").get<double>();
        p.hyper.epochs = h.at("epochs").get<std::size_t>();
        p.hyper.batch_size = h.at("batch_size").get<std::size_t>();
        p.hyper.seed = h.at("seed").get<std::uint64_t>();
        p.bins_fingerprint = j.at("bins_fingerprint").get<std::string>();

        const std::size_t d = p.hyper.d;
        const auto& ents = j.at("entities");
        if (!ents.is_array() || ents.empty()) throw DataError("model file: no entities");
        for (std::uint32_t id = 0; id < ents.size(); ++id) {
            const auto& e = ents[id];
            p.entities.push_back(Entity{id, parse_entity_class(e.at("class").get<std::string>()),
                                        e.at("label").get<std::string>()});
        }
        const auto& pts = j.at("points");
        if (!pts.is_array() || pts.size() != p.entities.size())
            throw DataError("model file: points/entities size mismatch");
        p.points.reserve(p.entities.size() * d);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            auto row = read_vec(pts[i], d, "points row");
            p.points.insert(p.points.end(), row.begin(), row.end());
        }
        const auto& rels = j.at("relations");
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            const auto& rj = rels.at(to_string(static_cast<RelationClass>(r)));
            auto& rel = p.relations[r];
            rel.shift = read_vec(rj.at("shift"), d, "relation shift");
            rel.growth = read_vec(rj.at("growth"), d, "relation growth");
        }
        const auto& a = j.at("attention");
        p.attention.d = d;
        p.attention.w1 = read_vec(a.at("w1"), 4 * d * d, "attention w1");
        p.attention.b1 = read_vec(a.at("b1"), 2 * d, "attention b1");
        p.attention.w2 = read_vec(a.at("w2"), 2 * d, "attention w2");
        if (!a.at("b2").is_number()) throw DataError("model file: attention b2 must be a number");
        p.attention.b2 = a.at("b2").get<double>();
        p.attention.wg = read_vec(a.at("wg"), 2 * d * d, "attention wg");
        p.attention.bg = read_vec(a.at("bg"), d, "attention bg");
    } catch (const DataError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError("model file: missing or malformed field (" + std::string(e.what()) + ")");
    }
    p.hyper.validate();
    check_finite(p.points, "points");

    // duplicate (class, label) pairs would make lookups ambiguous
    std::vector<std::pair<int, std::string>> keys;
    keys.reserve(p.entities.size());
    for (const Entity& e : p.entities) keys.emplace_back(static_cast<int>(e.cls), e.label);
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
        throw DataError("model file: duplicate entity label within a class");
    return p;
}

}  // namespace vizbox
