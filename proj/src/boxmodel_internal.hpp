#pragma once

// Shared low-level pieces of the box model. The trainer, the public
// intersect(), and inference all pool branches through this code so the
// floating-point operation order is identical everywhere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "vizbox/boxmodel.hpp"

namespace vizbox::detail {

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// h = tanh(W1 [cen; off] + b1), s = w2 . h + b2
void eval_branch(const AttentionNet& net, const double* cen, const double* off, double* h_out,
                 double* s_out);

struct PoolEval {
    std::vector<std::size_t> order;    // canonical branch order (indices into inputs)
    std::vector<double> weights;       // softmax over scores, canonical order
    std::vector<double> big_h;         // 2d: weighted sum of branch h
    std::vector<double> gate_pre;      // d: Wg big_h + bg
    std::vector<double> gate;          // d: sigmoid(gate_pre)
    std::vector<std::size_t> argmin;   // d: canonical index of the offset minimum
    Box out;
};

// Canonical order: branches sorted by (center, offset) lexicographically,
// ties by input position. Center = attention-weighted mix; offset =
// gate * elementwise-min. All sums run in canonical order.
void pool_branches(const AttentionNet& net, const std::vector<const double*>& cens,
                   const std::vector<const double*>& offs, const std::vector<const double*>& hs,
                   const std::vector<double>& scores, PoolEval& ev);

// dist_box pieces with the branch decisions exposed for gradient routing and
// kink detection. For each coordinate: out_hi = t above the box top,
// out_lo = t below the box bottom, v_sign = sign(center - clamped t).
struct DistEval {
    double outside = 0.0;
    double inside = 0.0;
    double size = 0.0;
    double total = 0.0;
    std::vector<signed char> out_hi, out_lo, v_sign;  // d each
};
void eval_dist(const double* t, const double* cen, const double* off, std::size_t d, double alpha,
               double beta, DistEval& ev);

}  // namespace vizbox::detail
