#pragma once

#include <cstdint>
#include <vector>

#include "dml/matrix.hpp"

namespace dml {

using Label = std::int32_t;
using InstanceId = std::int64_t;

enum class WeightScheme { Contrastive, Triplet, MultiSimilarity };

struct LossHyperparams {
    WeightScheme scheme = WeightScheme::Contrastive;
    double contrastive_lambda = 0.5;  // negative similarity threshold
    double triplet_eta = 0.1;         // margin for violator counting
    double ms_beta = 50.0;            // negative exponent scale
    double ms_alpha = 2.0;            // positive exponent scale
    double ms_lambda = 1.0;           // similarity offset

    void validate() const;  // throws ConfigError
};

// Cosine similarities between a batch of anchors (rows) and a constant side
// ("others": the batch itself or memory content). Carries labels, instance
// ids, and the constant-side embedding rows needed by the loss gradient.
struct SimilarityMatrix {
    DenseMatrix values;  // m x n
    DenseMatrix others;  // n x d
    std::vector<Label> anchor_labels;
    std::vector<Label> other_labels;
    std::vector<InstanceId> anchor_ids;
    std::vector<InstanceId> other_ids;

    std::size_t anchor_count() const { return values.rows(); }
    std::size_t other_count() const { return values.cols(); }
    // Pairing an instance with any stored copy of itself is excluded.
    bool is_self(std::size_t i, std::size_t j) const {
        return other_ids[j] == anchor_ids[i];
    }
    bool is_positive(std::size_t i, std::size_t j) const {
        return other_labels[j] == anchor_labels[i] && !is_self(i, j);
    }
    bool is_negative(std::size_t i, std::size_t j) const {
        return other_labels[j] != anchor_labels[i];
    }
};

struct PairWeightMatrix {
    DenseMatrix values;  // m x n, nonnegative, self entries zero
};

struct PairLossResult {
    double loss = 0.0;
    DenseMatrix grad_anchor;  // m x d, d(loss)/d(anchor rows)
    std::size_t valid_negative_count = 0;  // negative pairs with nonzero weight
    std::size_t valid_positive_count = 0;  // positive pairs with nonzero weight
};

SimilarityMatrix similarity(const DenseMatrix& anchors,
                            const DenseMatrix& others,
                            std::vector<Label> anchor_labels,
                            std::vector<Label> other_labels,
                            std::vector<InstanceId> anchor_ids,
                            std::vector<InstanceId> other_ids);

// In-batch convenience: others = anchors, shared labels/ids.
SimilarityMatrix self_similarity(const DenseMatrix& batch,
                                 const std::vector<Label>& labels,
                                 const std::vector<InstanceId>& ids);

// Negative pairs weigh 1 iff similarity > lambda (strict), positives 1.
PairWeightMatrix contrastive_weights(const SimilarityMatrix& sim, double lambda);

// Negative pair (i,j): count of positives k with S_ik < S_ij + eta (strict).
// Positive pair (i,k): count of negatives j with S_ij > S_ik - eta (strict).
PairWeightMatrix triplet_weights(const SimilarityMatrix& sim, double eta);

// Softmax-style relative weights, evaluated with a max shift so large
// exponents cannot overflow:
//   neg: exp(beta (S_ij - lambda)) / (1 + sum_{k in N_i} exp(beta (S_ik - lambda)))
//   pos: exp(-alpha (S_ij - lambda)) / (1 + sum_{k in P_i} exp(-alpha (S_ik - lambda)))
PairWeightMatrix multi_similarity_weights(const SimilarityMatrix& sim, double beta,
                                          double alpha, double lambda);

PairWeightMatrix pair_weights(const SimilarityMatrix& sim, const LossHyperparams& h);

// loss = (1/m) sum_i [ sum_{neg j} w_ij S_ij - sum_{pos j} w_ij S_ij ].
// Weights and the constant side are stop-gradients; grad_anchor row i is
// (1/m) [ sum_{neg j} w_ij others_j - sum_{pos j} w_ij others_j ].
PairLossResult weighted_pair_loss(const SimilarityMatrix& sim, const PairWeightMatrix& w);

// Count of negative pairs whose weight under h would be nonzero.
std::size_t count_valid_negatives(const SimilarityMatrix& sim, const LossHyperparams& h);

const char* scheme_name(WeightScheme s);
WeightScheme parse_scheme(const std::string& name);  // throws ConfigError

}  // namespace dml
