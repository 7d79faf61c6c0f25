#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vizbox/common.hpp"
#include "vizbox/kgraph.hpp"

namespace vizbox {

struct Hyperparams {
    std::size_t d = 32;
    double gamma = 12.0;  // margin
    double alpha = 0.2;   // weight of the inside-distance term
    double beta = 0.02;   // weight of the box-size term
    std::size_t k = 8;    // negatives per positive
    double learning_rate = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 512;
    std::uint64_t seed = 17;

    void validate() const;  // throws UsageError on out-of-range values
};

// Axis-aligned box: [center - offset, center + offset], offset >= 0.
struct Box {
    std::vector<double> center;
    std::vector<double> offset;
};

// Two-layer scorer over [center; offset] with a second head that emits the
// elementwise shrink gate used by intersection. Shared by every intersection
// (and reused as feature importance at explanation time).
struct AttentionNet {
    std::size_t d = 0;
    std::vector<double> w1;  // 2d x 2d, row-major
    std::vector<double> b1;  // 2d
    std::vector<double> w2;  // 2d
    double b2 = 0.0;
    std::vector<double> wg;  // d x 2d, row-major
    std::vector<double> bg;  // d
};

struct RelationEmbedding {
    std::vector<double> shift;   // added to the center
    std::vector<double> growth;  // added to the offset, kept >= 0
};

struct ModelParams {
    Hyperparams hyper;
    std::string bins_fingerprint;
    std::vector<Entity> entities;  // copied from the graph; position == id
    std::vector<double> points;    // entities.size() x d, row-major
    std::array<RelationEmbedding, kNumRelations> relations;
    AttentionNet attention;

    const double* point(std::uint32_t id) const { return points.data() + id * hyper.d; }
    std::optional<std::uint32_t> find(EntityClass cls, const std::string& label) const;
};

ModelParams init_params(const KnowledgeGraph& kg, const Hyperparams& hyper, Rng& rng);

void save_model(const ModelParams& params, const std::string& path);
ModelParams load_model(const std::string& path);

// --- box algebra ---

Box project_point(const double* point, const RelationEmbedding& rel, std::size_t d);
Box project_box(const Box& box, const RelationEmbedding& rel);

// Softmax over per-box scores, aligned with the input order.
std::vector<double> attention_weights(const std::vector<Box>& boxes, const AttentionNet& net);

// Attention-weighted center, gated elementwise-min offset. Inputs are pooled
// in a canonical value order, so any permutation of the same boxes produces a
// bit-identical result. weights_out, if given, receives the attention
// weights aligned with the input order.
Box intersect(const std::vector<Box>& boxes, const AttentionNet& net,
              std::vector<double>* weights_out = nullptr);

double dist_outside(const double* t, const Box& b);
double dist_inside(const double* t, const Box& b);
double box_size(const Box& b);
double dist_box(const double* t, const Box& b, double alpha, double beta);
bool contains(const Box& b, const double* t, double tol);

// -log sigmoid(gamma - pos) - (1/k) sum log sigmoid(neg_i - gamma)
double loss_fn(double pos_dist, const std::vector<double>& neg_dists, double gamma);

// --- training ---

// One positive example: a (possibly composed) query plus its full answer set.
// Plain triples have a single branch and no intersection; composed queries
// route their branches through intersect(). answer_set covers every entity
// the query cannot distinguish from the positive (feature-identical
// instances included), and is excluded from negative sampling.
struct TrainQuery {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> branches;  // (entity, relation)
    bool composed = false;
    std::uint32_t positive = 0;
    std::vector<std::uint32_t> answer_set;  // sorted
    EntityClass tail_cls = EntityClass::kColumn;
    std::vector<std::uint32_t> negatives;  // filled by sample_negatives
};

// Deterministic query inventory: every plain triple of the five relations,
// one composed column query per distinct feature signature, one composed
// dataset query per dataset instance.
std::vector<TrainQuery> build_training_queries(const KnowledgeGraph& kg);

// k tails of the query's tail class outside its answer set; uniform without
// replacement, with replacement when the pool is smaller than k. Returns
// false (and leaves the query empty) when the pool is empty.
bool sample_negatives(TrainQuery& q, const std::vector<std::uint32_t>& class_pool,
                      std::size_t k, Rng& rng);

struct TrainReport {
    std::vector<double> epoch_mean_loss;
    std::size_t skipped_queries = 0;  // empty negative pool, summed over epochs
    std::vector<std::string> warnings;
};

// Minibatch Adam over entity points, relation embeddings, and the attention
// net; offsets re-clamped to >= 0 after every step. Deterministic for a
// fixed seed. Throws NumericError if the loss stops being finite.
ModelParams train(const KnowledgeGraph& kg, const Hyperparams& hyper,
                  TrainReport* report = nullptr);

// Max relative error between analytic gradients and central finite
// differences over n_coords randomly chosen parameter coordinates of the
// batch loss. Coordinates whose perturbation crosses a max/min/clamp kink
// are rejected and resampled; gradients below the finite-difference noise
// floor (1e-6) are compared absolutely. Queries must have negatives filled.
double grad_check(const ModelParams& params, const std::vector<TrainQuery>& batch,
                  std::size_t n_coords, double eps, Rng& rng);

}  // namespace vizbox
