#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dml/matrix.hpp"
#include "dml/pair_loss.hpp"

namespace dml {

struct RetrievalReport {
    std::vector<std::size_t> ks;
    std::vector<double> recalls;  // aligned with ks
    std::size_t query_count = 0;
    std::size_t gallery_count = 0;
    bool self_excluded = false;
};

// Fraction of queries whose top-k cosine neighbors contain a same-label
// gallery item. Ranking is by descending similarity with ties broken by the
// smaller gallery id; ids default to row indices when empty. self_exclude
// drops gallery entries whose id equals the query's id. Every k must be
// smaller than the gallery size left after exclusion.
RetrievalReport recall_at_k(const DenseMatrix& queries, const std::vector<Label>& query_labels,
                            const DenseMatrix& gallery, const std::vector<Label>& gallery_labels,
                            const std::vector<std::size_t>& ks, bool self_exclude,
                            const std::vector<InstanceId>& query_ids = {},
                            const std::vector<InstanceId>& gallery_ids = {});

std::string recall_csv(const RetrievalReport& report);
std::string recall_json(const RetrievalReport& report);

struct MiningSample {
    std::int64_t iter = 0;
    std::size_t valid_mem = 0;
    std::size_t valid_batch = 0;
};

struct MiningRow {
    std::int64_t iter = 0;
    std::size_t valid_mem = 0;
    std::size_t valid_batch = 0;
    double mean_mem = 0.0;    // trailing-window means, window clipped at the start
    double mean_batch = 0.0;
};

std::vector<MiningRow> mining_report(const std::vector<MiningSample>& samples,
                                     std::size_t window);
std::string mining_csv(const std::vector<MiningRow>& rows);

}  // namespace dml
