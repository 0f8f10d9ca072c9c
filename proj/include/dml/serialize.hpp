#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dml/matrix.hpp"
#include "dml/net.hpp"
#include "dml/pair_loss.hpp"

namespace dml {

// Binary matrix: "DMLM", u64 rows, u64 cols, then rows*cols f64 payload.
// All integers and floats little-endian. A 0x0 matrix is a valid file.
// Round-trips bit for bit; truncated or oversized files raise FormatError.
void save_matrix(const std::string& path, const DenseMatrix& m);
DenseMatrix load_matrix(const std::string& path);

// Embedding snapshot: "DMLS", u64 count, u64 dim, then per row
// (i64 id, i64 label, dim f64s). Shared by memory dumps and drift probes.
struct SnapshotRows {
    std::vector<InstanceId> ids;
    std::vector<Label> labels;
    DenseMatrix embeddings;
};
void save_snapshot(const std::string& path, const SnapshotRows& rows);
SnapshotRows load_snapshot(const std::string& path);

// Checkpoint: "DMLC", u32 header length, JSON header {"layers":[{"out","in"}...]},
// then per layer the row-major weights followed by the bias, all f64.
void save_checkpoint(const std::string& path, const EmbeddingNet& net);
EmbeddingNet load_checkpoint(const std::string& path);

}  // namespace dml
