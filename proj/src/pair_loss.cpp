#include "dml/pair_loss.hpp"

#include <cmath>
#include <string>

namespace dml {

void LossHyperparams::validate() const {
    if (!(ms_beta > 0.0)) throw ConfigError("loss.ms_beta must be > 0");
    if (!(ms_alpha > 0.0)) throw ConfigError("loss.ms_alpha must be > 0");
    if (!(triplet_eta >= 0.0)) throw ConfigError("loss.triplet_eta must be >= 0");
    if (!std::isfinite(contrastive_lambda)) throw ConfigError("loss.contrastive_lambda must be finite");
    if (!std::isfinite(ms_lambda)) throw ConfigError("loss.ms_lambda must be finite");
}

SimilarityMatrix similarity(const DenseMatrix& anchors,
                            const DenseMatrix& others,
                            std::vector<Label> anchor_labels,
                            std::vector<Label> other_labels,
                            std::vector<InstanceId> anchor_ids,
                            std::vector<InstanceId> other_ids) {
    if (anchors.cols() != others.cols()) {
        throw ShapeError("similarity: embedding dims " + std::to_string(anchors.cols()) +
                         " vs " + std::to_string(others.cols()));
    }
    if (anchor_labels.size() != anchors.rows() || anchor_ids.size() != anchors.rows()) {
        throw ShapeError("similarity: anchor labels/ids do not match anchor rows");
    }
    if (other_labels.size() != others.rows() || other_ids.size() != others.rows()) {
        throw ShapeError("similarity: other labels/ids do not match other rows");
    }
    SimilarityMatrix sim;
    sim.values = matmul_transposed(anchors, others);
    sim.others = others;
    sim.anchor_labels = std::move(anchor_labels);
    sim.other_labels = std::move(other_labels);
    sim.anchor_ids = std::move(anchor_ids);
    sim.other_ids = std::move(other_ids);
    return sim;
}

SimilarityMatrix self_similarity(const DenseMatrix& batch,
                                 const std::vector<Label>& labels,
                                 const std::vector<InstanceId>& ids) {
    return similarity(batch, batch, labels, labels, ids, ids);
}

PairWeightMatrix contrastive_weights(const SimilarityMatrix& sim, double lambda) {
    PairWeightMatrix w;
    w.values = DenseMatrix(sim.anchor_count(), sim.other_count());
    for (std::size_t i = 0; i < sim.anchor_count(); ++i) {
        for (std::size_t j = 0; j < sim.other_count(); ++j) {
            if (sim.is_self(i, j)) continue;
            if (sim.is_positive(i, j)) {
                w.values(i, j) = 1.0;
            } else if (sim.values(i, j) > lambda) {
                w.values(i, j) = 1.0;
            }
        }
    }
    return w;
}

PairWeightMatrix triplet_weights(const SimilarityMatrix& sim, double eta) {
    PairWeightMatrix w;
    w.values = DenseMatrix(sim.anchor_count(), sim.other_count());
    for (std::size_t i = 0; i < sim.anchor_count(); ++i) {
        for (std::size_t j = 0; j < sim.other_count(); ++j) {
            if (sim.is_self(i, j)) continue;
            std::size_t count = 0;
            if (sim.is_negative(i, j)) {
                // positives within eta of this negative
                for (std::size_t k = 0; k < sim.other_count(); ++k) {
                    if (!sim.is_positive(i, k)) continue;
                    if (sim.values(i, k) < sim.values(i, j) + eta) ++count;
                }
            } else {
                // negatives within eta of this positive
                for (std::size_t k = 0; k < sim.other_count(); ++k) {
                    if (!sim.is_negative(i, k)) continue;
                    if (sim.values(i, k) > sim.values(i, j) - eta) ++count;
                }
            }
            w.values(i, j) = static_cast<double>(count);
        }
    }
    return w;
}

PairWeightMatrix multi_similarity_weights(const SimilarityMatrix& sim, double beta,
                                          double alpha, double lambda) {
    if (!(beta > 0.0) || !(alpha > 0.0)) {
        throw ConfigError("multi_similarity_weights: beta and alpha must be > 0");
    }
    const std::size_t m = sim.anchor_count();
    const std::size_t n = sim.other_count();
    PairWeightMatrix w;
    w.values = DenseMatrix(m, n);
    std::vector<double> exps(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (int branch = 0; branch < 2; ++branch) {
            const bool positive = branch == 1;
            // Shift every exponent (including the implicit exp(0) = 1 term of
            // the denominator) by the running max so nothing overflows.
            double max_t = 0.0;
            bool any = false;
            for (std::size_t j = 0; j < n; ++j) {
                const bool member = positive ? sim.is_positive(i, j)
                                             : (sim.is_negative(i, j) && !sim.is_self(i, j));
                if (!member) continue;
                const double t = positive ? -alpha * (sim.values(i, j) - lambda)
                                          : beta * (sim.values(i, j) - lambda);
                exps[j] = t;
                max_t = any ? std::max(max_t, t) : std::max(0.0, t);
                any = true;
            }
            if (!any) continue;
            double denom = std::exp(-max_t);  // the 1 term, shifted
            for (std::size_t j = 0; j < n; ++j) {
                const bool member = positive ? sim.is_positive(i, j)
                                             : (sim.is_negative(i, j) && !sim.is_self(i, j));
                if (member) denom += std::exp(exps[j] - max_t);
            }
            if (!std::isfinite(denom) || denom <= 0.0) {
                throw NumericError("multi_similarity_weights: denominator overflow");
            }
            for (std::size_t j = 0; j < n; ++j) {
                const bool member = positive ? sim.is_positive(i, j)
                                             : (sim.is_negative(i, j) && !sim.is_self(i, j));
                if (member) w.values(i, j) = std::exp(exps[j] - max_t) / denom;
            }
        }
    }
    ensure_finite(w.values, "multi_similarity_weights");
    return w;
}

PairWeightMatrix pair_weights(const SimilarityMatrix& sim, const LossHyperparams& h) {
    switch (h.scheme) {
        case WeightScheme::Contrastive:
            return contrastive_weights(sim, h.contrastive_lambda);
        case WeightScheme::Triplet:
            return triplet_weights(sim, h.triplet_eta);
        case WeightScheme::MultiSimilarity:
            return multi_similarity_weights(sim, h.ms_beta, h.ms_alpha, h.ms_lambda);
    }
    throw ConfigError("pair_weights: unknown scheme");
}

PairLossResult weighted_pair_loss(const SimilarityMatrix& sim, const PairWeightMatrix& w) {
    const std::size_t m = sim.anchor_count();
    const std::size_t n = sim.other_count();
    if (w.values.rows() != m || w.values.cols() != n) {
        throw ShapeError("weighted_pair_loss: weight shape mismatch");
    }
    if (m == 0) throw ShapeError("weighted_pair_loss: no anchors");

    PairLossResult res;
    res.grad_anchor = DenseMatrix(m, sim.others.cols());
    const double inv_m = 1.0 / static_cast<double>(m);
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (sim.is_self(i, j)) continue;
            const double wij = w.values(i, j);
            if (wij == 0.0) continue;
            const double sign = sim.is_negative(i, j) ? 1.0 : -1.0;
            if (sign > 0.0) {
                ++res.valid_negative_count;
            } else {
                ++res.valid_positive_count;
            }
            loss += sign * wij * sim.values(i, j);
            const double scale = sign * wij * inv_m;
            auto other = sim.others.row(j);
            for (std::size_t d = 0; d < other.size(); ++d) {
                res.grad_anchor(i, d) += scale * other[d];
            }
        }
    }
    res.loss = loss * inv_m;
    if (!std::isfinite(res.loss)) throw NumericError("weighted_pair_loss: non-finite loss");
    ensure_finite(res.grad_anchor, "weighted_pair_loss");
    return res;
}

std::size_t count_valid_negatives(const SimilarityMatrix& sim, const LossHyperparams& h) {
    const PairWeightMatrix w = pair_weights(sim, h);
    std::size_t count = 0;
    for (std::size_t i = 0; i < sim.anchor_count(); ++i) {
        for (std::size_t j = 0; j < sim.other_count(); ++j) {
            if (sim.is_self(i, j) || !sim.is_negative(i, j)) continue;
            if (w.values(i, j) != 0.0) ++count;
        }
    }
    return count;
}

const char* scheme_name(WeightScheme s) {
    switch (s) {
        case WeightScheme::Contrastive: return "contrastive";
        case WeightScheme::Triplet: return "triplet";
        case WeightScheme::MultiSimilarity: return "ms";
    }
    return "unknown";
}

WeightScheme parse_scheme(const std::string& name) {
    if (name == "contrastive") return WeightScheme::Contrastive;
    if (name == "triplet") return WeightScheme::Triplet;
    if (name == "ms") return WeightScheme::MultiSimilarity;
    throw ConfigError("loss.scheme: unknown scheme '" + name + "'");
}

}  // namespace dml
