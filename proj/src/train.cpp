#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "boxmodel_internal.hpp"
#include "vizbox/boxmodel.hpp"

namespace vizbox {

namespace {

// Linear layout of every trainable coordinate: entity points first, then the
// five relation embeddings, then the attention net. Gradients and Adam
// moments live in one flat vector addressed through this.
struct ParamLayout {
    std::size_t d = 0;
    std::size_t n_entities = 0;
    std::size_t off_points = 0;
    std::array<std::size_t, kNumRelations> off_shift{};
    std::array<std::size_t, kNumRelations> off_growth{};
    std::size_t off_w1 = 0, off_b1 = 0, off_w2 = 0, off_b2 = 0, off_wg = 0, off_bg = 0;
    std::size_t dense_begin = 0;  // first non-point coordinate
    std::size_t total = 0;

    explicit ParamLayout(const ModelParams& p) {
        d = p.hyper.d;
        n_entities = p.entities.size();
        std::size_t at = 0;
        off_points = at;
        at += n_entities * d;
        dense_begin = at;
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            off_shift[r] = at;
            at += d;
            off_growth[r] = at;
            at += d;
        }
        off_w1 = at;
        at += 4 * d * d;
        off_b1 = at;
        at += 2 * d;
        off_w2 = at;
        at += 2 * d;
        off_b2 = at;
        at += 1;
        off_wg = at;
        at += 2 * d * d;
        off_bg = at;
        at += d;
        total = at;
    }

    std::size_t point_coord(std::uint32_t e, std::size_t j) const {
        return off_points + static_cast<std::size_t>(e) * d + j;
    }

    double& coord(ModelParams& p, std::size_t i) const {
        if (i < dense_begin) return p.points[i];
        for (std::size_t r = 0; r < kNumRelations; ++r) {
            if (i < off_growth[r]) return p.relations[r].shift[i - off_shift[r]];
            if (i < (r + 1 < kNumRelations ? off_shift[r + 1] : off_w1))
                return p.relations[r].growth[i - off_growth[r]];
        }
        if (i < off_b1) return p.attention.w1[i - off_w1];
        if (i < off_w2) return p.attention.b1[i - off_b1];
        if (i < off_b2) return p.attention.w2[i - off_w2];
        if (i < off_wg) return p.attention.b2;
        if (i < off_bg) return p.attention.wg[i - off_wg];
        return p.attention.bg[i - off_bg];
    }
};

// Flat gradient buffer; the point block is cleared sparsely via the touched
// list, the rest densely.
struct GradBuf {
    std::vector<double> g;
    std::vector<std::uint32_t> touched;
    std::vector<unsigned char> mark;

    explicit GradBuf(const ParamLayout& layout)
        : g(layout.total, 0.0), mark(layout.n_entities, 0) {}

    void touch(std::uint32_t e) {
        if (!mark[e]) {
            mark[e] = 1;
            touched.push_back(e);
        }
    }

    void clear(const ParamLayout& layout) {
        for (std::uint32_t e : touched) {
            std::fill_n(g.begin() + static_cast<std::ptrdiff_t>(layout.point_coord(e, 0)),
                        layout.d, 0.0);
            mark[e] = 0;
        }
        touched.clear();
        std::fill(g.begin() + static_cast<std::ptrdiff_t>(layout.dense_begin), g.end(), 0.0);
    }
};

// Per-batch cache of evaluated branches. A branch is one (entity, relation)
// projection; composed queries in the same batch share them. dpre collects
// the pre-tanh gradients so the W1/b1 backward runs once per branch.
struct BranchCache {
    std::unordered_map<std::uint64_t, std::uint32_t> slot_of;
    std::vector<std::uint32_t> ent, rel;
    std::vector<double> cen;   // slots x d
    std::vector<double> h;     // slots x 2d
    std::vector<double> s;     // slots
    std::vector<double> dpre;  // slots x 2d

    void clear() {
        slot_of.clear();
        ent.clear();
        rel.clear();
        cen.clear();
        h.clear();
        s.clear();
        dpre.clear();
    }

    std::uint32_t get(const ModelParams& p, std::uint32_t e, std::uint32_t r) {
        const std::uint64_t key = (static_cast<std::uint64_t>(e) << 3) | r;
        auto it = slot_of.find(key);
        if (it != slot_of.end()) return it->second;
        const std::size_t d = p.hyper.d;
        const auto slot = static_cast<std::uint32_t>(ent.size());
        ent.push_back(e);
        rel.push_back(r);
        const std::size_t cb = cen.size();
        cen.resize(cb + d);
        const double* pt = p.point(e);
        const double* shift = p.relations[r].shift.data();
        for (std::size_t j = 0; j < d; ++j) cen[cb + j] = pt[j] + shift[j];
        const std::size_t hb = h.size();
        h.resize(hb + 2 * d);
        dpre.resize(hb + 2 * d, 0.0);
        double score = 0.0;
        detail::eval_branch(p.attention, cen.data() + cb, p.relations[r].growth.data(),
                            h.data() + hb, &score);
        s.push_back(score);
        slot_of.emplace(key, slot);
        return slot;
    }
};

struct Workspace {
    BranchCache cache;
    detail::PoolEval ev;
    std::vector<detail::DistEval> devs;
    std::vector<std::uint32_t> slots;
    std::vector<const double*> cens, offs, hs;
    std::vector<double> scores;
    std::vector<double> neg_totals;
    std::vector<double> box_cen, box_off;
    std::vector<double> dc, doff, dh_pool, dw_branch, ds_branch;
};

void record_dist(const detail::DistEval& dev, std::vector<signed char>* sig) {
    if (!sig) return;
    sig->insert(sig->end(), dev.out_hi.begin(), dev.out_hi.end());
    sig->insert(sig->end(), dev.out_lo.begin(), dev.out_lo.end());
    sig->insert(sig->end(), dev.v_sign.begin(), dev.v_sign.end());
    sig->push_back(dev.size > 0.0 ? 1 : 0);
}

// Backward of one dist_box evaluation. u is the upstream factor; the box
// gradient lands in (dc, doff), the target-point gradient directly in gb.
void dist_backward(const detail::DistEval& dev, const double* off, double alpha, double beta,
                   double u, double* dc, double* doff, GradBuf& gb, const ParamLayout& layout,
                   std::uint32_t tail) {
    const std::size_t d = dev.out_hi.size();
    double* gt = gb.g.data() + layout.point_coord(tail, 0);
    gb.touch(tail);
    for (std::size_t j = 0; j < d; ++j) {
        if (dev.out_hi[j]) {
            gt[j] += u;
            dc[j] -= u;
            doff[j] -= u;
        }
        if (dev.out_lo[j]) {
            gt[j] -= u;
            dc[j] += u;
            doff[j] -= u;
        }
        const double s = dev.v_sign[j];
        if (dev.out_hi[j]) {
            doff[j] -= u * alpha * s;
        } else if (dev.out_lo[j]) {
            doff[j] += u * alpha * s;
        } else {
            dc[j] += u * alpha * s;
            gt[j] -= u * alpha * s;
        }
        if (dev.size > 0.0) doff[j] += u * beta * 4.0 * off[j] / dev.size;
    }
}

// Mean loss over the batch; analytic gradients of that mean into gb when
// given; branch decisions recorded into ksig when given (finite-difference
// kink detection). One code path serves the trainer and grad_check.
double compute_batch(ModelParams& p, const std::vector<const TrainQuery*>& batch,
                     const ParamLayout& layout, GradBuf* gb, std::vector<signed char>* ksig,
                     Workspace& ws) {
    const std::size_t d = p.hyper.d;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    if (gb) gb->clear(layout);
    ws.cache.clear();
    // compensated sum: the loss is differenced at 1e-5 scale by grad_check,
    // so plain accumulation error would drown small finite differences
    double loss_sum = 0.0;
    double loss_comp = 0.0;

    for (const TrainQuery* qp : batch) {
        const TrainQuery& q = *qp;
        if (q.branches.empty()) throw std::invalid_argument("train query has no branches");
        if (q.negatives.empty()) throw std::invalid_argument("train query has no negatives");

        // forward: query box
        const double* box_cen = nullptr;
        const double* box_off = nullptr;
        const std::size_t m = q.branches.size();
        if (!q.composed) {
            const auto [e, r] = q.branches[0];
            ws.box_cen.resize(d);
            const double* pt = p.point(e);
            const double* shift = p.relations[r].shift.data();
            for (std::size_t j = 0; j < d; ++j) ws.box_cen[j] = pt[j] + shift[j];
            box_cen = ws.box_cen.data();
            box_off = p.relations[r].growth.data();
        } else {
            ws.slots.clear();
            ws.cens.clear();
            ws.offs.clear();
            ws.hs.clear();
            ws.scores.clear();
            for (const auto& [e, r] : q.branches) {
                const std::uint32_t slot = ws.cache.get(p, e, r);
                ws.slots.push_back(slot);
            }
            // slot storage may reallocate while filling, so take pointers after
            for (std::size_t i = 0; i < m; ++i) {
                const std::uint32_t slot = ws.slots[i];
                ws.cens.push_back(ws.cache.cen.data() + static_cast<std::size_t>(slot) * d);
                ws.offs.push_back(p.relations[q.branches[i].second].growth.data());
                ws.hs.push_back(ws.cache.h.data() + static_cast<std::size_t>(slot) * 2 * d);
                ws.scores.push_back(ws.cache.s[slot]);
            }
            detail::pool_branches(p.attention, ws.cens, ws.offs, ws.hs, ws.scores, ws.ev);
            box_cen = ws.ev.out.center.data();
            box_off = ws.ev.out.offset.data();
            if (ksig) {
                for (std::size_t i = 0; i < m; ++i)
                    ksig->push_back(static_cast<signed char>(ws.ev.order[i]));
                for (std::size_t j = 0; j < d; ++j)
                    ksig->push_back(static_cast<signed char>(ws.ev.argmin[j]));
            }
        }

        // forward: distances and loss
        const std::size_t n_neg = q.negatives.size();
        ws.devs.resize(1 + n_neg);
        detail::eval_dist(p.point(q.positive), box_cen, box_off, d, p.hyper.alpha, p.hyper.beta,
                          ws.devs[0]);
        record_dist(ws.devs[0], ksig);
        ws.neg_totals.resize(n_neg);
        for (std::size_t i = 0; i < n_neg; ++i) {
            detail::eval_dist(p.point(q.negatives[i]), box_cen, box_off, d, p.hyper.alpha,
                              p.hyper.beta, ws.devs[1 + i]);
            record_dist(ws.devs[1 + i], ksig);
            ws.neg_totals[i] = ws.devs[1 + i].total;
        }
        {
            const double y = loss_fn(ws.devs[0].total, ws.neg_totals, p.hyper.gamma) - loss_comp;
            const double t = loss_sum + y;
            loss_comp = (t - loss_sum) - y;
            loss_sum = t;
        }
        if (!gb) continue;

        // backward: loss -> per-distance upstream factors -> box gradient
        GradBuf& g = *gb;
        ws.dc.assign(d, 0.0);
        ws.doff.assign(d, 0.0);
        const double u_pos = detail::sigmoid(ws.devs[0].total - p.hyper.gamma) * inv_b;
        dist_backward(ws.devs[0], box_off, p.hyper.alpha, p.hyper.beta, u_pos, ws.dc.data(),
                      ws.doff.data(), g, layout, q.positive);
        for (std::size_t i = 0; i < n_neg; ++i) {
            const double u_neg = -detail::sigmoid(p.hyper.gamma - ws.neg_totals[i]) * inv_b /
                                 static_cast<double>(n_neg);
            dist_backward(ws.devs[1 + i], box_off, p.hyper.alpha, p.hyper.beta, u_neg,
                          ws.dc.data(), ws.doff.data(), g, layout, q.negatives[i]);
        }

        if (!q.composed) {
            const auto [e, r] = q.branches[0];
            double* gp = g.g.data() + layout.point_coord(e, 0);
            double* gs = g.g.data() + layout.off_shift[r];
            double* gg = g.g.data() + layout.off_growth[r];
            g.touch(e);
            for (std::size_t j = 0; j < d; ++j) {
                gp[j] += ws.dc[j];
                gs[j] += ws.dc[j];
                gg[j] += ws.doff[j];
            }
            continue;
        }

        // backward through the pooled intersection
        const detail::PoolEval& ev = ws.ev;
        const std::size_t two_d = 2 * d;
        ws.dh_pool.assign(two_d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t src = ev.order[ev.argmin[j]];
            const double o_min = ws.offs[src][j];
            const double da = ev.gate[j] * (1.0 - ev.gate[j]) * ws.doff[j] * o_min;
            double* gwg = g.g.data() + layout.off_wg + j * two_d;
            const double* wg = p.attention.wg.data() + j * two_d;
            for (std::size_t r2 = 0; r2 < two_d; ++r2) {
                gwg[r2] += da * ev.big_h[r2];
                ws.dh_pool[r2] += wg[r2] * da;
            }
            g.g[layout.off_bg + j] += da;
            // the min path feeds the argmin branch's growth directly
            g.g[layout.off_growth[q.branches[src].second] + j] += ws.doff[j] * ev.gate[j];
        }

        ws.dw_branch.resize(m);
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t b = ev.order[i];
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += ws.dc[j] * ws.cens[b][j];
            for (std::size_t r2 = 0; r2 < two_d; ++r2) acc += ws.dh_pool[r2] * ws.hs[b][r2];
            ws.dw_branch[i] = acc;
            dot += ev.weights[i] * acc;
        }
        ws.ds_branch.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            ws.ds_branch[i] = ev.weights[i] * (ws.dw_branch[i] - dot);

        double* gw2 = g.g.data() + layout.off_w2;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t b = ev.order[i];
            const double dsi = ws.ds_branch[i];
            const double wi = ev.weights[i];
            g.g[layout.off_b2] += dsi;
            double* dpre = ws.cache.dpre.data() + static_cast<std::size_t>(ws.slots[b]) * two_d;
            const double* hb = ws.hs[b];
            for (std::size_t r2 = 0; r2 < two_d; ++r2) {
                gw2[r2] += dsi * hb[r2];
                const double dh = dsi * p.attention.w2[r2] + wi * ws.dh_pool[r2];
                dpre[r2] += (1.0 - hb[r2] * hb[r2]) * dh;
            }
            const auto [e, r] = q.branches[b];
            double* gp = g.g.data() + layout.point_coord(e, 0);
            double* gs = g.g.data() + layout.off_shift[r];
            g.touch(e);
            for (std::size_t j = 0; j < d; ++j) {
                gp[j] += wi * ws.dc[j];
                gs[j] += wi * ws.dc[j];
            }
        }
    }

    // flush the cached branches: dpre -> W1, b1, and each branch's inputs
    if (gb) {
        GradBuf& g = *gb;
        const std::size_t two_d = 2 * d;
        std::vector<double> dz(two_d);
        for (std::size_t slot = 0; slot < ws.cache.ent.size(); ++slot) {
            const double* dpre = ws.cache.dpre.data() + slot * two_d;
            const std::uint32_t e = ws.cache.ent[slot];
            const std::uint32_t r = ws.cache.rel[slot];
            const double* cen = ws.cache.cen.data() + slot * d;
            const double* growth = p.relations[r].growth.data();
            std::fill(dz.begin(), dz.end(), 0.0);
            for (std::size_t r2 = 0; r2 < two_d; ++r2) {
                const double dp = dpre[r2];
                if (dp == 0.0) continue;
                g.g[layout.off_b1 + r2] += dp;
                double* gw1 = g.g.data() + layout.off_w1 + r2 * two_d;
                const double* w1 = p.attention.w1.data() + r2 * two_d;
                for (std::size_t j = 0; j < d; ++j) {
                    gw1[j] += dp * cen[j];
                    gw1[d + j] += dp * growth[j];
                }
                for (std::size_t c = 0; c < two_d; ++c) dz[c] += w1[c] * dp;
            }
            double* gp = g.g.data() + layout.point_coord(e, 0);
            double* gs = g.g.data() + layout.off_shift[r];
            double* gg = g.g.data() + layout.off_growth[r];
            g.touch(e);
            for (std::size_t j = 0; j < d; ++j) {
                gp[j] += dz[j];
                gs[j] += dz[j];
                gg[j] += dz[d + j];
            }
        }
    }
    return loss_sum * inv_b;
}

}  // namespace

std::vector<TrainQuery> build_training_queries(const KnowledgeGraph& kg) {
    std::vector<TrainQuery> out;
    const SignatureIndex sig = build_signature_index(kg);

    // plain triples, answer sets widened to everything the query cannot
    // distinguish from the positive
    for (const PositiveGroup& grp : positive_triples(kg)) {
        const auto rel = static_cast<RelationClass>(grp.relation);
        for (std::uint32_t tail : grp.tails) {
            TrainQuery q;
            q.branches = {{grp.head, grp.relation}};
            q.composed = false;
            q.positive = tail;
            q.tail_cls = tail_class(rel);
            switch (rel) {
                case RelationClass::kSfToCol:
                case RelationClass::kCfToDs:
                    q.answer_set = grp.tails;
                    break;
                case RelationClass::kColToDs:
                    q.answer_set = sig.dataset_answers.at(grp.head);
                    break;
                case RelationClass::kColToAxis:
                    q.answer_set = sig.axis_answers.at(grp.head);
                    break;
                case RelationClass::kDsToType:
                    q.answer_set = sig.type_answers.at(grp.head);
                    break;
            }
            out.push_back(std::move(q));
        }
    }

    // one composed column query per distinct feature signature; the answer is
    // every column carrying all the signature's features (supersets included)
    for (const auto& [col, equivalents] : sig.equivalent_columns) {
        if (equivalents.front() != col) continue;  // one representative per signature
        const auto sit = sig.column_signature.find(col);
        if (sit == sig.column_signature.end() || sit->second.empty()) continue;
        const std::vector<std::uint32_t>& sfs = sit->second;
        std::vector<std::uint32_t> answer = kg.tails(sfs[0], RelationClass::kSfToCol);
        for (std::size_t i = 1; i < sfs.size() && !answer.empty(); ++i) {
            const auto& t = kg.tails(sfs[i], RelationClass::kSfToCol);
            std::vector<std::uint32_t> merged;
            std::set_intersection(answer.begin(), answer.end(), t.begin(), t.end(),
                                  std::back_inserter(merged));
            answer = std::move(merged);
        }
        TrainQuery base;
        for (std::uint32_t sf : sfs)
            base.branches.emplace_back(sf, static_cast<std::uint32_t>(RelationClass::kSfToCol));
        base.composed = true;
        base.tail_cls = EntityClass::kColumn;
        base.answer_set = answer;
        for (std::uint32_t member : answer) {
            TrainQuery q = base;
            q.positive = member;
            out.push_back(std::move(q));
        }
    }

    // one composed dataset query per dataset instance: its two columns plus
    // its cross features
    for (const auto& [ds, cols] : sig.dataset_columns) {
        TrainQuery q;
        for (std::uint32_t col : cols)
            q.branches.emplace_back(col, static_cast<std::uint32_t>(RelationClass::kColToDs));
        const auto cit = sig.dataset_cross.find(ds);
        if (cit != sig.dataset_cross.end())
            for (std::uint32_t cf : cit->second)
                q.branches.emplace_back(cf, static_cast<std::uint32_t>(RelationClass::kCfToDs));
        if (q.branches.empty()) continue;
        q.composed = true;
        q.positive = ds;
        q.tail_cls = EntityClass::kDataset;
        q.answer_set = sig.equivalent_datasets.at(ds);
        out.push_back(std::move(q));
    }
    return out;
}

bool sample_negatives(TrainQuery& q, const std::vector<std::uint32_t>& class_pool, std::size_t k,
                      Rng& rng) {
    q.negatives.clear();
    const auto excluded = [&](std::uint32_t id) {
        return std::binary_search(q.answer_set.begin(), q.answer_set.end(), id);
    };
    // answers are tails, so they all sit in the tail-class pool
    const std::size_t eligible_n = class_pool.size() - q.answer_set.size();
    if (eligible_n == 0) return false;

    if (eligible_n <= 4 * k) {
        std::vector<std::uint32_t> eligible;
        eligible.reserve(eligible_n);
        for (std::uint32_t id : class_pool)
            if (!excluded(id)) eligible.push_back(id);
        if (eligible.size() >= k) {
            rng.shuffle(eligible);
            q.negatives.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
            for (std::size_t i = 0; i < k; ++i)
                q.negatives.push_back(eligible[rng.uniform_int(eligible.size())]);
        }
        return true;
    }
    while (q.negatives.size() < k) {
        const std::uint32_t cand = class_pool[rng.uniform_int(class_pool.size())];
        if (excluded(cand)) continue;
        if (std::find(q.negatives.begin(), q.negatives.end(), cand) != q.negatives.end()) continue;
        q.negatives.push_back(cand);
    }
    return true;
}

ModelParams train(const KnowledgeGraph& kg, const Hyperparams& hyper, TrainReport* report) {
    hyper.validate();
    Rng rng(hyper.seed);
    ModelParams params = init_params(kg, hyper, rng);
    const ParamLayout layout(params);

    std::vector<TrainQuery> queries = build_training_queries(kg);
    if (queries.empty()) throw DataError("graph has no trainable queries");

    std::array<std::vector<std::uint32_t>, kNumEntityClasses> pools;
    for (std::size_t c = 0; c < kNumEntityClasses; ++c)
        pools[c] = kg.ids_of(static_cast<EntityClass>(c));

    GradBuf grads(layout);
    Workspace ws;
    std::vector<double> m1(layout.total, 0.0), m2(layout.total, 0.0);
    std::uint64_t step = 0;
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;

    std::vector<std::size_t> order;
    std::vector<const TrainQuery*> batch;
    bool warned_skips = false;

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        order.clear();
        std::size_t skipped = 0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            if (sample_negatives(queries[i], pools[static_cast<std::size_t>(queries[i].tail_cls)],
                                 hyper.k, rng))
                order.push_back(i);
            else
                ++skipped;
        }
        if (report) {
            report->skipped_queries += skipped;
            if (skipped > 0 && !warned_skips) {
                report->warnings.push_back(std::to_string(skipped) +
                                           " queries have an empty negative pool and are skipped");
                warned_skips = true;
            }
        }
        if (order.empty()) throw DataError("all training queries have empty negative pools");
        rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t epoch_n = 0;
        for (std::size_t at = 0; at < order.size(); at += hyper.batch_size) {
            const std::size_t stop = std::min(order.size(), at + hyper.batch_size);
            batch.clear();
            for (std::size_t i = at; i < stop; ++i) batch.push_back(&queries[order[i]]);

            const double loss = compute_batch(params, batch, layout, &grads, nullptr, ws);
            if (!std::isfinite(loss))
                throw NumericError("training loss became non-finite at epoch " +
                                   std::to_string(epoch + 1));
            epoch_loss += loss * static_cast<double>(batch.size());
            epoch_n += batch.size();

            // Adam, bias-corrected; entity points update lazily (touched only)
            ++step;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            const auto update = [&](std::size_t i, double& theta) {
                const double gi = grads.g[i];
                m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * gi;
                m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * gi * gi;
                theta -= hyper.learning_rate * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + kEps);
            };
            for (std::uint32_t e : grads.touched) {
                const std::size_t base = layout.point_coord(e, 0);
                for (std::size_t j = 0; j < layout.d; ++j)
                    update(base + j, params.points[base + j]);
            }
            for (std::size_t i = layout.dense_begin; i < layout.total; ++i)
                update(i, layout.coord(params, i));
            for (auto& rel : params.relations)
                for (double& gr : rel.growth) gr = std::max(0.0, gr);
        }
        if (report) report->epoch_mean_loss.push_back(epoch_loss / static_cast<double>(epoch_n));
    }
    return params;
}

double grad_check(const ModelParams& params, const std::vector<TrainQuery>& batch,
                  std::size_t n_coords, double eps, Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("grad_check: empty batch");
    ModelParams p = params;
    const ParamLayout layout(p);
    std::vector<const TrainQuery*> bp;
    bp.reserve(batch.size());
    for (const TrainQuery& q : batch) bp.push_back(&q);

    GradBuf grads(layout);
    Workspace ws;
    compute_batch(p, bp, layout, &grads, nullptr, ws);

    double max_rel = 0.0;
    std::size_t done = 0;
    std::size_t tries = 0;
    const std::size_t max_tries = 200 * n_coords + 200;
    std::vector<signed char> sig_plus, sig_minus;
    while (done < n_coords && tries < max_tries) {
        ++tries;
        const auto idx = static_cast<std::size_t>(rng.uniform_int(layout.total));
        double& x = layout.coord(p, idx);
        const double x0 = x;
        sig_plus.clear();
        sig_minus.clear();
        x = x0 + eps;
        const double lp = compute_batch(p, bp, layout, nullptr, &sig_plus, ws);
        x = x0 - eps;
        const double lm = compute_batch(p, bp, layout, nullptr, &sig_minus, ws);
        x = x0;
        if (sig_plus != sig_minus) continue;  // perturbation crossed a kink
        const double fd = (lp - lm) / (2.0 * eps);
        const double a = grads.g[idx];
        // The denominator floor is the finite-difference resolution: central
        // differences on a double-precision loss cannot certify gradients
        // below ~1e-10 absolute, so anything under the floor is compared
        // absolutely instead of relatively.
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
        max_rel = std::max(max_rel, rel);
        ++done;
    }
    if (done < n_coords)
        throw NumericError("grad_check could not find enough kink-free coordinates");
    return max_rel;
}

}  // namespace vizbox
