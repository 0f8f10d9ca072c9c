#include "dml/drift.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dml/format.hpp"
#include "dml/trainer.hpp"

namespace dml {

ProbeSet make_probe_set(const LabeledDataset& data, std::size_t size, std::uint64_t seed) {
    if (size == 0) throw ConfigError("probe set size must be > 0");
    if (size > data.size()) {
        throw ConfigError("probe set size " + std::to_string(size) + " exceeds dataset size " +
                          std::to_string(data.size()));
    }
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(size);
    std::sort(rows.begin(), rows.end());

    ProbeSet probes;
    probes.features = DenseMatrix(size, data.dim());
    probes.ids.resize(size);
    probes.labels.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t c = 0; c < data.dim(); ++c) {
            probes.features(i, c) = data.features(rows[i], c);
        }
        probes.ids[i] = data.ids[rows[i]];
        probes.labels[i] = data.labels[rows[i]];
    }
    return probes;
}

FeatureSnapshot take_snapshot(const EmbeddingNet& net, const ProbeSet& probes, std::int64_t t) {
    FeatureSnapshot snap;
    snap.t = t;
    snap.embeddings = net.forward(probes.features).first;
    snap.probe_ids = probes.ids;
    return snap;
}

namespace {

// Nearest-rank percentile on a sorted copy.
double percentile(std::vector<double> sorted, double p) {
    const std::size_t n = sorted.size();
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    return sorted[std::min(n - 1, std::max<std::size_t>(rank, 1) - 1)];
}

}  // namespace

DriftRecord feature_drift(const FeatureSnapshot& a, const FeatureSnapshot& b) {
    if (a.probe_ids != b.probe_ids) {
        throw ContractError("feature_drift: snapshots cover different probe sets");
    }
    if (!a.embeddings.same_shape(b.embeddings)) {
        throw ShapeError("feature_drift: embedding shapes differ");
    }
    if (a.embeddings.rows() == 0) {
        throw ContractError("feature_drift: empty snapshots");
    }
    DriftRecord rec;
    rec.t = a.t;
    rec.delta_t = a.t - b.t;
    rec.drifts.resize(a.embeddings.rows());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.embeddings.rows(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < a.embeddings.cols(); ++j) {
            const double diff = a.embeddings(i, j) - b.embeddings(i, j);
            d += diff * diff;
        }
        rec.drifts[i] = d;
        sum += d;
    }
    rec.mean = sum / static_cast<double>(rec.drifts.size());
    std::vector<double> sorted = rec.drifts;
    std::sort(sorted.begin(), sorted.end());
    rec.p50 = percentile(sorted, 50.0);
    rec.p95 = percentile(sorted, 95.0);
    return rec;
}

std::optional<StaleGradientRecord> stale_pair_gradient_error(
    const EmbeddingNet& net, const DenseMatrix& anchor_input,
    std::span<const double> fresh_other, std::span<const double> stale_other) {
    if (anchor_input.rows() != 1) {
        throw ShapeError("stale_pair_gradient_error: expected a single anchor row");
    }
    if (fresh_other.size() != net.output_dim() || stale_other.size() != net.output_dim()) {
        throw ShapeError("stale_pair_gradient_error: constant-side dims do not match net output");
    }

    double epsilon = 0.0;
    for (std::size_t i = 0; i < fresh_other.size(); ++i) {
        const double diff = fresh_other[i] - stale_other[i];
        epsilon += diff * diff;
    }
    if (epsilon == 0.0) return std::nullopt;  // degenerate, nothing to compare

    // L = <v, other> with other constant, so dL/d(embedding) = other.
    DenseMatrix grad_fresh(1, fresh_other.size());
    DenseMatrix grad_stale(1, stale_other.size());
    for (std::size_t i = 0; i < fresh_other.size(); ++i) {
        grad_fresh(0, i) = fresh_other[i];
        grad_stale(0, i) = stale_other[i];
    }

    auto [emb_a, cache_a] = net.forward(anchor_input);
    const ParamGradients g_fresh = net.backward(cache_a, grad_fresh);
    auto [emb_b, cache_b] = net.forward(anchor_input);
    const ParamGradients g_stale = net.backward(cache_b, grad_stale);

    StaleGradientRecord rec;
    rec.epsilon = epsilon;
    rec.grad_error_sq = squared_l2(subtract(g_fresh, g_stale));
    rec.ratio = rec.grad_error_sq / epsilon;
    return rec;
}

std::string drift_csv(const std::vector<DriftRecord>& records) {
    std::string out = "t,delta_t,mean_drift,p50_drift,p95_drift\n";
    for (const auto& r : records) {
        out += std::to_string(r.t);
        out.push_back(',');
        out += std::to_string(r.delta_t);
        out.push_back(',');
        out += format_double(r.mean);
        out.push_back(',');
        out += format_double(r.p50);
        out.push_back(',');
        out += format_double(r.p95);
        out.push_back('\n');
    }
    return out;
}

std::string stale_gradient_csv(const std::vector<StaleGradientRecord>& records) {
    std::string out = "epsilon,grad_error_sq,ratio\n";
    for (const auto& r : records) {
        out += format_double(r.epsilon);
        out.push_back(',');
        out += format_double(r.grad_error_sq);
        out.push_back(',');
        out += format_double(r.ratio);
        out.push_back('\n');
    }
    return out;
}

std::vector<DriftRecord> run_drift_experiment(const LabeledDataset& data,
                                              const TrainConfig& cfg,
                                              const DriftExperimentSpec& spec) {
    if (spec.measure_iters.empty()) {
        throw ConfigError("drift.measure_iters must not be empty");
    }
    if (spec.steps.empty()) throw ConfigError("drift.steps must not be empty");
    for (const std::int64_t s : spec.steps) {
        if (s <= 0) throw ConfigError("drift.steps entries must be > 0");
    }
    for (const std::int64_t t : spec.measure_iters) {
        if (t < 0 || t > cfg.iterations) {
            throw ConfigError("drift.measure_iters entry " + std::to_string(t) +
                              " outside [0, iterations=" + std::to_string(cfg.iterations) + "]");
        }
    }

    const ProbeSet probes = make_probe_set(data, spec.probe_size, spec.probe_seed);

    std::set<std::int64_t> wanted;
    for (const std::int64_t t : spec.measure_iters) {
        wanted.insert(t);
        for (const std::int64_t s : spec.steps) {
            if (t - s >= 0) wanted.insert(t - s);
        }
    }

    std::map<std::int64_t, FeatureSnapshot> snapshots;
    TrainHooks hooks;
    hooks.after_update = [&](std::int64_t t, const EmbeddingNet& net) {
        if (wanted.count(t)) snapshots.emplace(t, take_snapshot(net, probes, t));
    };
    train(data, cfg, nullptr, &hooks);

    std::vector<DriftRecord> records;
    for (const std::int64_t t : spec.measure_iters) {
        for (const std::int64_t s : spec.steps) {
            if (t - s < 0) continue;
            records.push_back(feature_drift(snapshots.at(t), snapshots.at(t - s)));
        }
    }
    return records;
}

}  // namespace dml
