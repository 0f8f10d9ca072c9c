// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
// Tolerances and task settings are pinned here; run via ctest or directly.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "dml/commands.hpp"
#include "dml/dataset.hpp"
#include "dml/drift.hpp"
#include "dml/eval.hpp"
#include "dml/memory.hpp"
#include "dml/net.hpp"
#include "dml/pair_loss.hpp"
#include "dml/trainer.hpp"

namespace fs = std::filesystem;
using namespace dml;

namespace {

// --- pinned tolerances and task settings ------------------------------------

constexpr double kGradStep = 1e-5;         // central-difference step
constexpr double kGradRelTol = 1e-5;       // parameter-gradient relative error
constexpr std::size_t kGradInstances = 120;  // per scheme, >= 100 required
constexpr double kGradBudgetSec = 60.0;

constexpr double kReductionTol = 1e-12;
constexpr std::size_t kReductionTrials = 1000;  // per scheme

constexpr std::size_t kFifoSequences = 10000;

constexpr double kHalvingTol = 1e-9;       // quadratic-scaling ratio vs 4.0
constexpr std::size_t kHalvingTrials = 200;
constexpr std::size_t kPerturbTrials = 1000;

// Desk-scale task shared by the directional criteria: Gaussian class clusters
// on the input sphere, small MLP embedding, PK batches of 8, contrastive loss.
constexpr std::size_t kClasses = 100;
constexpr std::size_t kTrainPerClass = 20;
constexpr std::size_t kHoldoutPerClass = 5;
constexpr std::size_t kInputDim = 32;
constexpr std::size_t kHiddenDim = 64;
constexpr std::size_t kEmbeddingDim = 16;
constexpr double kNoiseSigma = 0.25;
constexpr std::int64_t kIterations = 3000;
constexpr std::int64_t kWarmup = 200;
constexpr std::int64_t kDecayAt = 2000;
constexpr double kLearningRate = 0.01;
constexpr double kDecayFactor = 0.1;
constexpr int kSeedCount = 5;

constexpr double kDriftBudgetSec = 300.0;
constexpr double kMiningGapMin = 10.0;     // memory vs batch valid negatives
constexpr double kRecallGapMin = 0.05;     // absolute Recall@1 points
constexpr int kMinWins = 4;                // out of kSeedCount
constexpr double kExperimentBudgetSec = 600.0;

constexpr std::size_t kRetrievalTrials = 1000;

// --- helpers -----------------------------------------------------------------

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

DenseMatrix random_unit_rows(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    DenseMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            m(i, j) = gauss(rng);
            sq += m(i, j) * m(i, j);
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t j = 0; j < d; ++j) m(i, j) *= inv;
    }
    return m;
}

LossHyperparams scheme_params(WeightScheme s) {
    LossHyperparams h;
    h.scheme = s;
    return h;
}

const WeightScheme kSchemes[] = {WeightScheme::Contrastive, WeightScheme::Triplet,
                                 WeightScheme::MultiSimilarity};

// --- 1. parameter gradients vs central differences ---------------------------

// Replays the forward pass by hand to keep the check away from ReLU kinks and
// from near-zero pre-normalization rows, where finite differences are invalid.
bool kink_safe(const EmbeddingNet& net, const DenseMatrix& x) {
    DenseMatrix cur = x;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const Layer& layer = net.layer(l);
        const bool last = l + 1 == net.layer_count();
        DenseMatrix nxt(cur.rows(), layer.weight.rows());
        for (std::size_t i = 0; i < cur.rows(); ++i) {
            double row_sq = 0.0;
            for (std::size_t o = 0; o < layer.weight.rows(); ++o) {
                double v = layer.bias[o];
                for (std::size_t c = 0; c < cur.cols(); ++c) v += cur(i, c) * layer.weight(o, c);
                if (!last && std::abs(v) < 1e-3) return false;
                nxt(i, o) = last ? v : std::max(v, 0.0);
                row_sq += v * v;
            }
            if (last && row_sq < 1e-4) return false;
        }
        cur = std::move(nxt);
    }
    return true;
}

struct GradCase {
    EmbeddingNet net;
    DenseMatrix inputs;   // m x d_in
    DenseMatrix others;   // n x d_out, constant side
    std::vector<Label> anchor_labels, other_labels;
    std::vector<InstanceId> anchor_ids, other_ids;
};

GradCase make_grad_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> din(4, 8), hid(8, 16), dout(4, 8), bsz(3, 5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        GradCase c;
        std::vector<std::size_t> dims = {din(rng), hid(rng), dout(rng)};
        if (rng() % 2 == 0) dims.insert(dims.begin() + 2, hid(rng));
        c.net = init_params(dims, rng());
        const std::size_t m = bsz(rng);
        c.inputs = DenseMatrix(m, dims.front());
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < dims.front(); ++j) c.inputs(i, j) = gauss(rng);
        if (!kink_safe(c.net, c.inputs)) continue;

        const std::size_t n = 5 + rng() % 6;
        const std::size_t d = dims.back();
        auto anchors = c.net.forward(c.inputs).first;
        c.others = DenseMatrix(n, d);
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                c.others(j, k) = anchors(j % m, k) + 0.6 * gauss(rng);
                sq += c.others(j, k) * c.others(j, k);
            }
            const double inv = 1.0 / std::sqrt(sq);
            for (std::size_t k = 0; k < d; ++k) c.others(j, k) *= inv;
        }
        for (std::size_t i = 0; i < m; ++i) {
            c.anchor_labels.push_back(static_cast<Label>(i % 2));
            c.anchor_ids.push_back(static_cast<InstanceId>(i));
        }
        for (std::size_t j = 0; j < n; ++j) {
            c.other_labels.push_back(static_cast<Label>(j % 3));
            c.other_ids.push_back(static_cast<InstanceId>(1000 + j));
        }
        return c;
    }
}

double frozen_loss(const GradCase& c, const PairWeightMatrix& w) {
    auto anchors = c.net.forward(c.inputs).first;
    auto sims = similarity(anchors, c.others, c.anchor_labels, c.other_labels,
                           c.anchor_ids, c.other_ids);
    return weighted_pair_loss(sims, w).loss;
}

Outcome criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xace1u);
    double max_err = 0.0;
    std::size_t checks = 0;
    for (std::size_t trial = 0; trial < kGradInstances; ++trial) {
        GradCase c = make_grad_case(rng);
        for (WeightScheme s : kSchemes) {
            const LossHyperparams h = scheme_params(s);
            auto [anchors, cache] = c.net.forward(c.inputs);
            auto sims = similarity(anchors, c.others, c.anchor_labels, c.other_labels,
                                   c.anchor_ids, c.other_ids);
            const PairWeightMatrix w = pair_weights(sims, h);
            const PairLossResult res = weighted_pair_loss(sims, w);
            const ParamGradients analytic = c.net.backward(cache, res.grad_anchor);

            double diff_sq = 0.0, an_sq = 0.0, fd_sq = 0.0;
            for (std::size_t l = 0; l < c.net.layer_count(); ++l) {
                Layer& layer = c.net.mutable_layer(l);
                auto probe = [&](double& param, double analytic_g) {
                    const double saved = param;
                    param = saved + kGradStep;
                    const double up = frozen_loss(c, w);
                    param = saved - kGradStep;
                    const double dn = frozen_loss(c, w);
                    param = saved;
                    const double fd = (up - dn) / (2.0 * kGradStep);
                    diff_sq += (fd - analytic_g) * (fd - analytic_g);
                    an_sq += analytic_g * analytic_g;
                    fd_sq += fd * fd;
                };
                for (std::size_t r = 0; r < layer.weight.rows(); ++r)
                    for (std::size_t cc = 0; cc < layer.weight.cols(); ++cc)
                        probe(layer.weight(r, cc), analytic.layers[l].weight(r, cc));
                for (std::size_t r = 0; r < layer.bias.size(); ++r)
                    probe(layer.bias[r], analytic.layers[l].bias[r]);
            }
            const double denom = std::max(std::sqrt(std::max(an_sq, fd_sq)), 1e-12);
            const double err = std::sqrt(diff_sq) / denom;
            max_err = std::max(max_err, an_sq + fd_sq < 1e-24 ? 0.0 : err);
            ++checks;
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.seconds = secs;
    o.pass = max_err < kGradRelTol && secs < kGradBudgetSec && checks >= 300;
    o.detail = fmt("max rel err %.2e (tol %.0e) over %zu net/batch checks, 3 schemes",
                   max_err, kGradRelTol, checks);
    return o;
}

// --- 2. memory loss reduces to the in-batch loss -----------------------------

Outcome criterion_reduction() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xace2u);
    double worst = 0.0;
    for (std::size_t trial = 0; trial < kReductionTrials; ++trial) {
        const std::size_t b = 2 + rng() % 5, d = 3 + rng() % 4;
        const DenseMatrix emb = random_unit_rows(b, d, rng);
        std::vector<Label> labels(b);
        std::vector<InstanceId> ids(b);
        for (std::size_t i = 0; i < b; ++i) {
            labels[i] = static_cast<Label>(rng() % 3);
            ids[i] = static_cast<InstanceId>(i);
        }
        CrossBatchMemory mem(b, b);
        mem.update(emb, labels, ids, 0);
        for (WeightScheme s : kSchemes) {
            const LossHyperparams h = scheme_params(s);
            const PairLossResult via_mem = mem.loss(emb, labels, ids, h);
            auto sims = self_similarity(emb, labels, ids);
            const PairLossResult direct = weighted_pair_loss(sims, pair_weights(sims, h));
            worst = std::max(worst, std::abs(via_mem.loss - direct.loss));
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    worst = std::max(worst, std::abs(via_mem.grad_anchor(i, j) -
                                                     direct.grad_anchor(i, j)));
        }
    }
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = worst <= kReductionTol;
    o.detail = fmt("max |memory - in-batch| %.2e (tol %.0e) over %zu trials x 3 schemes",
                   worst, kReductionTol, kReductionTrials);
    return o;
}

// --- 3. FIFO queue semantics vs a reference oracle ----------------------------

Outcome criterion_fifo() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xace3u);
    const std::size_t d = 3;
    std::size_t updates = 0;
    bool ok = true;
    for (std::size_t seq = 0; ok && seq < kFifoSequences; ++seq) {
        const std::size_t cap = 2 + rng() % 31;
        CrossBatchMemory mem(cap, cap + rng() % 100);
        struct Ref {
            std::vector<double> emb;
            Label label;
            InstanceId id;
            std::int64_t iter;
        };
        std::deque<Ref> oracle;
        InstanceId next_id = static_cast<InstanceId>(seq) * 10000;
        const std::size_t rounds = 3 + rng() % 10;
        for (std::size_t r = 0; ok && r < rounds; ++r) {
            const std::size_t b = 1 + rng() % cap;
            const DenseMatrix emb = random_unit_rows(b, d, rng);
            std::vector<Label> labels(b);
            std::vector<InstanceId> ids(b);
            for (std::size_t i = 0; i < b; ++i) {
                labels[i] = static_cast<Label>(rng() % 5);
                ids[i] = next_id++;
                std::vector<double> row(d);
                for (std::size_t j = 0; j < d; ++j) row[j] = emb(i, j);
                oracle.push_back({row, labels[i], ids[i], static_cast<std::int64_t>(r)});
            }
            while (oracle.size() > cap) oracle.pop_front();
            mem.update(emb, labels, ids, static_cast<std::int64_t>(r));
            ++updates;
            ok = mem.size() == oracle.size() && mem.size() <= mem.capacity();
            for (std::size_t i = 0; ok && i < oracle.size(); ++i) {
                const MemoryEntry& e = mem.entry(i);
                ok = e.id == oracle[i].id && e.label == oracle[i].label &&
                     e.iteration == oracle[i].iter && e.embedding == oracle[i].emb;
            }
        }
    }
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = ok;
    o.detail = fmt("%zu sequences (%zu updates) %s the deque oracle, capacity never exceeded",
                   kFifoSequences, updates, ok ? "match" : "DIVERGED from");
    return o;
}

// --- 4. stale-gradient error is exactly quadratic ------------------------------

Outcome criterion_stale_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xace4u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const EmbeddingNet net = init_params({6, 12, 5}, 77);
    const std::size_t d = net.output_dim();

    DenseMatrix anchor(1, 6);
    for (std::size_t j = 0; j < 6; ++j) anchor(0, j) = gauss(rng);

    auto unit = [&](std::size_t n) {
        std::vector<double> v(n);
        double sq = 0.0;
        for (double& x : v) {
            x = gauss(rng);
            sq += x * x;
        }
        for (double& x : v) x /= std::sqrt(sq);
        return v;
    };

    double max_ratio_dev = 0.0;
    bool ok = true;
    for (std::size_t trial = 0; ok && trial < kHalvingTrials; ++trial) {
        const std::vector<double> fresh = unit(d);
        std::vector<double> delta(d);
        for (double& x : delta) x = 0.05 * gauss(rng);
        std::vector<double> stale1(d), stale2(d);
        for (std::size_t j = 0; j < d; ++j) {
            stale1[j] = fresh[j] + delta[j];
            stale2[j] = fresh[j] + delta[j] / 2.0;
        }
        const auto r1 = stale_pair_gradient_error(net, anchor, fresh, stale1);
        const auto r2 = stale_pair_gradient_error(net, anchor, fresh, stale2);
        ok = r1.has_value() && r2.has_value();
        if (!ok) break;
        max_ratio_dev = std::max(max_ratio_dev, std::abs(r1->epsilon / r2->epsilon - 4.0));
        max_ratio_dev =
            std::max(max_ratio_dev, std::abs(r1->grad_error_sq / r2->grad_error_sq - 4.0));
    }

    double max_c = 0.0;
    std::size_t recorded = 0;
    for (std::size_t trial = 0; trial < kPerturbTrials; ++trial) {
        const std::vector<double> fresh = unit(d);
        const double scale = std::pow(10.0, -1.0 - 4.0 * (double(rng() % 1000) / 999.0));
        std::vector<double> stale(d);
        for (std::size_t j = 0; j < d; ++j) stale[j] = fresh[j] + scale * gauss(rng);
        const auto r = stale_pair_gradient_error(net, anchor, fresh, stale);
        if (r && std::isfinite(r->ratio) && r->ratio > 0.0) ++recorded;
        if (r) max_c = std::max(max_c, r->ratio);
    }

    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = ok && max_ratio_dev <= kHalvingTol && recorded == kPerturbTrials &&
             std::isfinite(max_c);
    o.detail = fmt("halving ratio 4.0 +- %.1e (tol %.0e, %zu pairs); "
                   "max grad_error_sq/eps %.3f over %zu/%zu perturbations",
                   max_ratio_dev, kHalvingTol, kHalvingTrials, max_c, recorded,
                   kPerturbTrials);
    return o;
}

// --- desk-scale task shared by criteria 5-8 -----------------------------------

TrainConfig desk_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.p = 4;
    cfg.k = 2;
    cfg.iterations = kIterations;
    cfg.warmup_iterations = kWarmup;
    cfg.lr = {kLearningRate, kDecayAt, kDecayFactor};
    cfg.seed = seed;
    cfg.hidden_dims = {kHiddenDim};
    cfg.embedding_dim = kEmbeddingDim;
    return cfg;
}

// --- 5. drift shrinks with window size and after lr decay ----------------------

Outcome criterion_drift_shape() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::int64_t> steps = {10, 100, 1000};
    const std::vector<std::int64_t> measure = {1200, 1500, 1800, 2500, 2800};
    double acc[5][3] = {};
    for (int s = 1; s <= kSeedCount; ++s) {
        const auto data = synth_clusters(kClasses, kTrainPerClass, kInputDim, 1.0,
                                         kNoiseSigma, 100 + static_cast<std::uint64_t>(s));
        DriftExperimentSpec spec;
        spec.steps = steps;
        spec.measure_iters = measure;
        spec.probe_size = 256;
        spec.probe_seed = 900 + static_cast<std::uint64_t>(s);
        const auto recs =
            run_drift_experiment(data, desk_config(static_cast<std::uint64_t>(s)), spec);
        for (const auto& r : recs)
            for (std::size_t i = 0; i < measure.size(); ++i)
                for (std::size_t j = 0; j < steps.size(); ++j)
                    if (r.t == measure[i] && r.delta_t == steps[j]) acc[i][j] += r.mean;
    }
    bool monotone = true;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 1; j < 3; ++j) monotone = monotone && acc[i][j] >= acc[i][j - 1];
    const double pre = (acc[0][0] + acc[1][0] + acc[2][0]) / (3.0 * kSeedCount);
    const double post = (acc[3][0] + acc[4][0]) / (2.0 * kSeedCount);
    const double secs = seconds_since(t0);
    Outcome o;
    o.seconds = secs;
    o.pass = monotone && post < pre && secs < kDriftBudgetSec;
    o.detail = fmt("%s in dt at each t; dt=10 drift %.5f pre-decay -> %.5f post (%d seeds)",
                   monotone ? "nondecreasing" : "NOT monotone", pre, post, kSeedCount);
    return o;
}

// --- shared training runs for criteria 6-8 -------------------------------------

struct SeedResult {
    double base_r1 = 0.0, mem_r1 = 0.0, half_r1 = 0.0, tenth_r1 = 0.0;
    double mine_mem = 0.0, mine_batch = 0.0;  // phase-2 means, full-memory run
};

struct Experiment {
    std::vector<SeedResult> seeds;
    double seconds = 0.0;
};

const Experiment& experiment() {
    static const Experiment exp = [] {
        const auto t0 = std::chrono::steady_clock::now();
        Experiment e;
        for (int s = 1; s <= kSeedCount; ++s) {
            const auto full =
                synth_clusters(kClasses, kTrainPerClass + kHoldoutPerClass, kInputDim, 1.0,
                               kNoiseSigma, 100 + static_cast<std::uint64_t>(s));
            std::vector<std::size_t> train_idx, holdout_idx;
            for (std::size_t c = 0; c < kClasses; ++c)
                for (std::size_t k = 0; k < kTrainPerClass + kHoldoutPerClass; ++k)
                    (k < kTrainPerClass ? train_idx : holdout_idx)
                        .push_back(c * (kTrainPerClass + kHoldoutPerClass) + k);
            const auto train_set = subset(full, train_idx);

            auto rows_of = [&](const std::vector<std::size_t>& idx) {
                DenseMatrix out(idx.size(), full.features.cols());
                for (std::size_t r = 0; r < idx.size(); ++r)
                    for (std::size_t c = 0; c < full.features.cols(); ++c)
                        out(r, c) = full.features(idx[r], c);
                return out;
            };
            auto labels_of = [&](const std::vector<std::size_t>& idx) {
                std::vector<Label> out;
                for (auto i : idx) out.push_back(full.labels[i]);
                return out;
            };
            const DenseMatrix query_in = rows_of(holdout_idx);
            const DenseMatrix gallery_in = rows_of(train_idx);
            const auto query_labels = labels_of(holdout_idx);
            const auto gallery_labels = labels_of(train_idx);
            auto recall1 = [&](const EmbeddingNet& net) {
                const auto q = net.forward(query_in).first;
                const auto g = net.forward(gallery_in).first;
                return recall_at_k(q, query_labels, g, gallery_labels, {1}, true).recalls[0];
            };

            TrainConfig cfg = desk_config(static_cast<std::uint64_t>(s));
            SeedResult r;
            cfg.memory_enabled = false;
            r.base_r1 = recall1(train(train_set, cfg).net);
            cfg.memory_enabled = true;
            cfg.memory_ratio = 1.0;
            const TrainResult with_mem = train(train_set, cfg);
            r.mem_r1 = recall1(with_mem.net);
            std::size_t n = 0;
            for (const auto& row : with_mem.metrics)
                if (row.phase == "memory") {
                    r.mine_mem += static_cast<double>(row.valid_neg_mem);
                    r.mine_batch += static_cast<double>(row.valid_neg_batch);
                    ++n;
                }
            r.mine_mem /= static_cast<double>(n);
            r.mine_batch /= static_cast<double>(n);
            cfg.memory_ratio = 0.5;
            r.half_r1 = recall1(train(train_set, cfg).net);
            cfg.memory_ratio = 0.1;
            r.tenth_r1 = recall1(train(train_set, cfg).net);
            e.seeds.push_back(r);
        }
        e.seconds = seconds_since(t0);
        return e;
    }();
    return exp;
}

// --- 6. valid negatives: memory >> batch ---------------------------------------

Outcome criterion_mining_gap() {
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment& e = experiment();
    double min_ratio = 1e300;
    bool ok = true;
    for (const SeedResult& r : e.seeds) {
        const bool seed_ok = r.mine_mem > 0.0 && r.mine_mem >= kMiningGapMin * r.mine_batch;
        ok = ok && seed_ok;
        if (r.mine_batch > 0.0) min_ratio = std::min(min_ratio, r.mine_mem / r.mine_batch);
    }
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = ok;
    o.detail = fmt("memory/batch valid negatives >= %.0fx in all %d seeds (min %.1fx)",
                   kMiningGapMin, kSeedCount, min_ratio);
    return o;
}

// --- 7. Recall@1: memory beats the baseline ------------------------------------

Outcome criterion_recall_gain() {
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment& e = experiment();
    double base = 0.0, mem = 0.0;
    int wins = 0;
    for (const SeedResult& r : e.seeds) {
        base += r.base_r1;
        mem += r.mem_r1;
        wins += r.mem_r1 > r.base_r1;
    }
    base /= kSeedCount;
    mem /= kSeedCount;
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = (mem - base) >= kRecallGapMin && wins >= kMinWins &&
             e.seconds < kExperimentBudgetSec;
    o.detail = fmt("R@1 %.3f -> %.3f (gap %+.3f, need >= %.2f), wins %d/%d, runs took %.0fs",
                   base, mem, mem - base, kRecallGapMin, wins, kSeedCount, e.seconds);
    return o;
}

// --- 8. robustness across memory ratios -----------------------------------------

Outcome criterion_ratio_robustness() {
    const auto t0 = std::chrono::steady_clock::now();
    const Experiment& e = experiment();
    double base = 0.0, r10 = 0.0, r05 = 0.0, r01 = 0.0;
    for (const SeedResult& r : e.seeds) {
        base += r.base_r1;
        r10 += r.mem_r1;
        r05 += r.half_r1;
        r01 += r.tenth_r1;
    }
    base /= kSeedCount;
    r10 /= kSeedCount;
    r05 /= kSeedCount;
    r01 /= kSeedCount;
    const double lo = std::min({r10, r05, r01});
    const double hi = std::max({r10, r05, r01});
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = lo > base && (hi - lo) < (lo - base);
    o.detail = fmt("R@1 base %.3f | ratio 0.1 %.3f, 0.5 %.3f, 1.0 %.3f; spread %.3f < gap %.3f",
                   base, r01, r05, r10, hi - lo, lo - base);
    return o;
}

// --- 9. recall_at_k vs a brute-force ranking oracle ------------------------------

double oracle_recall(const DenseMatrix& q, const std::vector<Label>& ql,
                     const DenseMatrix& g, const std::vector<Label>& gl, std::size_t k,
                     bool self_exclude, const std::vector<InstanceId>& qids,
                     const std::vector<InstanceId>& gids) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < q.rows(); ++i) {
        std::vector<std::pair<double, std::size_t>> ranked;
        for (std::size_t j = 0; j < g.rows(); ++j) {
            if (self_exclude && gids[j] == qids[i]) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < q.cols(); ++c) s += q(i, c) * g(j, c);
            ranked.emplace_back(s, j);
        }
        std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return gids[a.second] < gids[b.second];
        });
        for (std::size_t r = 0; r < k && r < ranked.size(); ++r)
            if (gl[ranked[r].second] == ql[i]) {
                ++hits;
                break;
            }
    }
    return static_cast<double>(hits) / static_cast<double>(q.rows());
}

Outcome criterion_retrieval_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(0xace9u);
    double worst = 0.0;
    std::size_t compared = 0;
    for (std::size_t trial = 0; trial < kRetrievalTrials; ++trial) {
        const std::size_t nq = 1 + rng() % 6, ng = 4 + rng() % 9, d = 2 + rng() % 3;
        DenseMatrix q = random_unit_rows(nq, d, rng);
        DenseMatrix g = random_unit_rows(ng, d, rng);
        if (rng() % 2 == 0) {  // force similarity ties
            const std::size_t a = rng() % ng, b = rng() % ng;
            for (std::size_t c = 0; c < d; ++c) g(b, c) = g(a, c);
        }
        std::vector<Label> ql(nq), gl(ng);
        std::vector<InstanceId> qids(nq), gids(ng);
        for (std::size_t i = 0; i < nq; ++i) {
            ql[i] = static_cast<Label>(rng() % 4);
            qids[i] = static_cast<InstanceId>(i);
        }
        for (std::size_t j = 0; j < ng; ++j) {
            gl[j] = static_cast<Label>(rng() % 4);
            gids[j] = static_cast<InstanceId>(rng() % 2 == 0 && j < nq ? j : 100 + j);
        }
        const bool self_exclude = rng() % 2 == 0;
        const std::size_t kmax = ng - 2;
        std::vector<std::size_t> ks = {1 + rng() % kmax};
        if (kmax > 1) ks.push_back(1 + rng() % kmax);
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

        const auto rep = recall_at_k(q, ql, g, gl, ks, self_exclude, qids, gids);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const double ref = oracle_recall(q, ql, g, gl, ks[i], self_exclude, qids, gids);
            worst = std::max(worst, std::abs(rep.recalls[i] - ref));
            ++compared;
        }
    }
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = worst == 0.0;
    o.detail = fmt("max |recall - oracle| %.2e over %zu instances (%zu k values), tol 0",
                   worst, kRetrievalTrials, compared);
    return o;
}

// --- 10. manifest reruns are byte-identical --------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Outcome criterion_determinism() {
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path root =
        fs::temp_directory_path() / ("dml_accept_" + std::to_string(std::random_device{}()));
    fs::create_directories(root);
    TrainArgs first;
    first.out_dir = (root / "seed_run").string();
    first.overrides = {"iterations=50",      "warmup_iterations=10",
                       "p=2",                "k=2",
                       "dataset.classes=8",  "dataset.per_class=5",
                       "dataset.dim=8",      "net.hidden_dims=12",
                       "net.embedding_dim=4", "memory.enabled=true",
                       "memory.ratio=0.5",   "seed=33"};
    run_train(first);

    TrainArgs rerun;
    rerun.config_path = (root / "seed_run" / "manifest.json").string();
    rerun.out_dir = (root / "rerun_a").string();
    run_train(rerun);
    rerun.out_dir = (root / "rerun_b").string();
    run_train(rerun);

    const std::string a = slurp(root / "rerun_a" / "metrics.csv");
    const std::string b = slurp(root / "rerun_b" / "metrics.csv");
    const bool ok = !a.empty() && a == b;
    fs::remove_all(root);
    Outcome o;
    o.seconds = seconds_since(t0);
    o.pass = ok;
    o.detail = fmt("two manifest reruns: metrics.csv %s (%zu bytes)",
                   ok ? "byte-identical" : "DIFFER", a.size());
    return o;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*run)();
    };
    const Entry entries[] = {
        {"gradient-check", criterion_gradients},
        {"memory-loss-reduction", criterion_reduction},
        {"fifo-oracle", criterion_fifo},
        {"stale-gradient-quadratic", criterion_stale_gradient},
        {"drift-shape", criterion_drift_shape},
        {"mining-gap", criterion_mining_gap},
        {"recall-improvement", criterion_recall_gain},
        {"ratio-robustness", criterion_ratio_robustness},
        {"retrieval-oracle", criterion_retrieval_oracle},
        {"determinism", criterion_determinism},
    };
    int failures = 0;
    int idx = 0;
    for (const Entry& e : entries) {
        ++idx;
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        failures += !o.pass;
        std::printf("[%s] %2d %-26s %s  (%.1fs)\n", o.pass ? "PASS" : "FAIL", idx, e.name,
                    o.detail.c_str(), o.seconds);
        std::fflush(stdout);
    }
    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
