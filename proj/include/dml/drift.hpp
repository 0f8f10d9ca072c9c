#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/net.hpp"

namespace dml {

// Fixed input rows re-embedded over time to watch representation movement.
struct ProbeSet {
    DenseMatrix features;
    std::vector<InstanceId> ids;
    std::vector<Label> labels;
};

ProbeSet make_probe_set(const LabeledDataset& data, std::size_t size, std::uint64_t seed);

struct FeatureSnapshot {
    std::int64_t t = 0;  // optimizer updates completed
    DenseMatrix embeddings;
    std::vector<InstanceId> probe_ids;
};

FeatureSnapshot take_snapshot(const EmbeddingNet& net, const ProbeSet& probes, std::int64_t t);

// Per-probe squared L2 displacement between two snapshots of the same probe
// set. delta_t is signed (a.t - b.t): swapping arguments flips only the
// bookkeeping, not the drift values.
struct DriftRecord {
    std::int64_t t = 0;
    std::int64_t delta_t = 0;
    std::vector<double> drifts;  // per probe, in [0, 4] for unit embeddings
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
};

DriftRecord feature_drift(const FeatureSnapshot& a, const FeatureSnapshot& b);

// For a dot-product pair loss against a single constant vector, compares the
// parameter gradient using the fresh vector vs a stale copy.
//   epsilon       = ||fresh - stale||^2
//   grad_error_sq = ||dL/dtheta(fresh) - dL/dtheta(stale)||^2
// The backward map is linear in the constant side, so grad_error_sq scales
// exactly quadratically with the perturbation. epsilon == 0 yields no record.
struct StaleGradientRecord {
    double epsilon = 0.0;
    double grad_error_sq = 0.0;
    double ratio = 0.0;  // grad_error_sq / epsilon
};

std::optional<StaleGradientRecord> stale_pair_gradient_error(
    const EmbeddingNet& net, const DenseMatrix& anchor_input,
    std::span<const double> fresh_other, std::span<const double> stale_other);

std::string drift_csv(const std::vector<DriftRecord>& records);
std::string stale_gradient_csv(const std::vector<StaleGradientRecord>& records);

struct TrainConfig;

struct DriftExperimentSpec {
    std::vector<std::int64_t> steps = {10, 100, 1000};
    std::vector<std::int64_t> measure_iters;  // snapshots at t and each t - step
    std::size_t probe_size = 256;
    std::uint64_t probe_seed = 0;
};

// Trains under cfg while snapshotting a fixed probe set, then reports drift
// for every (t, step) pair with t - step >= 0. The measurement schedule must
// stay within the configured iteration count.
std::vector<DriftRecord> run_drift_experiment(const LabeledDataset& data,
                                              const TrainConfig& cfg,
                                              const DriftExperimentSpec& spec);

}  // namespace dml
