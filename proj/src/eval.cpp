#include "dml/eval.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "dml/format.hpp"

namespace dml {

namespace {

std::vector<InstanceId> default_ids(const std::vector<InstanceId>& given, std::size_t n,
                                    const char* what) {
    if (given.empty()) {
        std::vector<InstanceId> ids(n);
        std::iota(ids.begin(), ids.end(), InstanceId{0});
        return ids;
    }
    if (given.size() != n) {
        throw ShapeError(std::string("recall_at_k: ") + what + " ids size mismatch");
    }
    return given;
}

}  // namespace

RetrievalReport recall_at_k(const DenseMatrix& queries, const std::vector<Label>& query_labels,
                            const DenseMatrix& gallery, const std::vector<Label>& gallery_labels,
                            const std::vector<std::size_t>& ks, bool self_exclude,
                            const std::vector<InstanceId>& query_ids,
                            const std::vector<InstanceId>& gallery_ids) {
    if (queries.cols() != gallery.cols()) {
        throw ShapeError("recall_at_k: embedding dims differ");
    }
    if (query_labels.size() != queries.rows() || gallery_labels.size() != gallery.rows()) {
        throw ShapeError("recall_at_k: label counts do not match rows");
    }
    if (queries.rows() == 0 || gallery.rows() == 0) {
        throw ShapeError("recall_at_k: empty query or gallery set");
    }
    if (ks.empty()) throw ConfigError("recall_at_k: no k values");
    const auto q_ids = default_ids(query_ids, queries.rows(), "query");
    const auto g_ids = default_ids(gallery_ids, gallery.rows(), "gallery");

    const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
    if (*std::min_element(ks.begin(), ks.end()) == 0) {
        throw ConfigError("recall_at_k: k must be >= 1");
    }

    RetrievalReport report;
    report.ks = ks;
    report.recalls.assign(ks.size(), 0.0);
    report.query_count = queries.rows();
    report.gallery_count = gallery.rows();
    report.self_excluded = self_exclude;

    struct Cand {
        double sim;
        InstanceId id;
        std::size_t row;
    };
    std::vector<Cand> cands;
    cands.reserve(gallery.rows());
    std::vector<std::size_t> hits(ks.size(), 0);

    for (std::size_t qi = 0; qi < queries.rows(); ++qi) {
        cands.clear();
        for (std::size_t gi = 0; gi < gallery.rows(); ++gi) {
            if (self_exclude && g_ids[gi] == q_ids[qi]) continue;
            cands.push_back({dot(queries.row(qi), gallery.row(gi)), g_ids[gi], gi});
        }
        if (max_k >= cands.size()) {
            throw ConfigError("recall_at_k: k " + std::to_string(max_k) +
                              " must be smaller than gallery size after exclusion (" +
                              std::to_string(cands.size()) + ")");
        }
        const auto better = [](const Cand& a, const Cand& b) {
            if (a.sim != b.sim) return a.sim > b.sim;
            return a.id < b.id;
        };
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(max_k),
                          cands.end(), better);
        // ks are checked in ascending order of rank so each query is one pass
        std::vector<std::pair<std::size_t, std::size_t>> order(ks.size());
        for (std::size_t i = 0; i < ks.size(); ++i) order[i] = {ks[i], i};
        std::sort(order.begin(), order.end());
        std::size_t rank = 0;
        bool found = false;
        for (const auto& [k, ki] : order) {
            for (; rank < k && !found; ++rank) {
                if (gallery_labels[cands[rank].row] == query_labels[qi]) found = true;
            }
            if (found) ++hits[ki];
        }
    }
    for (std::size_t i = 0; i < ks.size(); ++i) {
        report.recalls[i] =
            static_cast<double>(hits[i]) / static_cast<double>(report.query_count);
    }
    return report;
}

std::string recall_csv(const RetrievalReport& report) {
    std::string out = "k,recall\n";
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
        out += std::to_string(report.ks[i]);
        out.push_back(',');
        out += format_double(report.recalls[i]);
        out.push_back('\n');
    }
    return out;
}

std::string recall_json(const RetrievalReport& report) {
    nlohmann::json j;
    j["ks"] = report.ks;
    j["recalls"] = report.recalls;
    j["query_count"] = report.query_count;
    j["gallery_count"] = report.gallery_count;
    j["self_excluded"] = report.self_excluded;
    return j.dump(2) + "\n";
}

std::vector<MiningRow> mining_report(const std::vector<MiningSample>& samples,
                                     std::size_t window) {
    if (window == 0) throw ConfigError("mining_report: window must be > 0");
    std::vector<MiningRow> rows;
    rows.reserve(samples.size());
    double sum_mem = 0.0;
    double sum_batch = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sum_mem += static_cast<double>(samples[i].valid_mem);
        sum_batch += static_cast<double>(samples[i].valid_batch);
        if (i >= window) {
            sum_mem -= static_cast<double>(samples[i - window].valid_mem);
            sum_batch -= static_cast<double>(samples[i - window].valid_batch);
        }
        const auto span = static_cast<double>(std::min(i + 1, window));
        MiningRow row;
        row.iter = samples[i].iter;
        row.valid_mem = samples[i].valid_mem;
        row.valid_batch = samples[i].valid_batch;
        row.mean_mem = sum_mem / span;
        row.mean_batch = sum_batch / span;
        rows.push_back(row);
    }
    return rows;
}

std::string mining_csv(const std::vector<MiningRow>& rows) {
    std::string out = "iter,valid_mem,valid_batch,mean_mem,mean_batch\n";
    for (const auto& r : rows) {
        out += std::to_string(r.iter);
        out.push_back(',');
        out += std::to_string(r.valid_mem);
        out.push_back(',');
        out += std::to_string(r.valid_batch);
        out.push_back(',');
        out += format_double(r.mean_mem);
        out.push_back(',');
        out += format_double(r.mean_batch);
        out.push_back('\n');
    }
    return out;
}

}  // namespace dml
