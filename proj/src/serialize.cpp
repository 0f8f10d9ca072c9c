#include "dml/serialize.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "dml/format.hpp"

namespace dml {

namespace {

// Explicit little-endian byte packing keeps the files portable regardless of
// host order.
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    Reader(std::string bytes, std::string path)
        : bytes_(std::move(bytes)), path_(std::move(path)) {}

    void expect_magic(const char* magic) {
        if (bytes_.size() < pos_ + 4 || std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
            throw FormatError(path_ + ": bad magic, expected " + magic);
        }
        pos_ += 4;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 8;
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    std::string raw(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    void expect_end() const {
        if (pos_ != bytes_.size()) {
            throw FormatError(path_ + ": trailing bytes beyond declared payload");
        }
    }

    // Call before bulk allocation so a corrupt header cannot demand memory
    // the file does not back.
    void expect_payload(std::uint64_t units, std::uint64_t bytes_per_unit) const {
        const std::uint64_t remaining = bytes_.size() - pos_;
        if (units > remaining / bytes_per_unit ||
            units * bytes_per_unit != remaining) {
            throw FormatError(path_ + ": header/payload size mismatch");
        }
    }

    std::uint64_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() < pos_ + n) throw FormatError(path_ + ": truncated file");
    }

    std::string bytes_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_matrix(const std::string& path, const DenseMatrix& m) {
    std::string out;
    out.reserve(20 + 8 * m.size());
    out += "DMLM";
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    for (double x : m.data()) put_f64(out, x);
    atomic_write_file(path, out);
}

DenseMatrix load_matrix(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic("DMLM");
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / cols) {
        throw FormatError(path + ": dimension overflow");
    }
    r.expect_payload(rows * cols, 8);
    std::vector<double> data(rows * cols);
    for (double& x : data) x = r.f64();
    r.expect_end();
    return DenseMatrix(rows, cols, std::move(data));
}

void save_snapshot(const std::string& path, const SnapshotRows& rows) {
    const std::size_t n = rows.embeddings.rows();
    if (rows.ids.size() != n || rows.labels.size() != n) {
        throw ShapeError("save_snapshot: ids/labels do not match embedding rows");
    }
    std::string out;
    out.reserve(20 + n * (16 + 8 * rows.embeddings.cols()));
    out += "DMLS";
    put_u64(out, n);
    put_u64(out, rows.embeddings.cols());
    for (std::size_t i = 0; i < n; ++i) {
        put_i64(out, rows.ids[i]);
        put_i64(out, static_cast<std::int64_t>(rows.labels[i]));
        for (double x : rows.embeddings.row(i)) put_f64(out, x);
    }
    atomic_write_file(path, out);
}

SnapshotRows load_snapshot(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic("DMLS");
    const std::uint64_t n = r.u64();
    const std::uint64_t dim = r.u64();
    if (dim > (std::numeric_limits<std::uint64_t>::max() - 16) / 8) {
        throw FormatError(path + ": dimension overflow");
    }
    r.expect_payload(n, 16 + 8 * dim);
    SnapshotRows rows;
    rows.ids.resize(n);
    rows.labels.resize(n);
    rows.embeddings = DenseMatrix(n, dim);
    for (std::uint64_t i = 0; i < n; ++i) {
        rows.ids[i] = r.i64();
        rows.labels[i] = static_cast<Label>(r.i64());
        for (std::uint64_t j = 0; j < dim; ++j) rows.embeddings(i, j) = r.f64();
    }
    r.expect_end();
    return rows;
}

void save_checkpoint(const std::string& path, const EmbeddingNet& net) {
    nlohmann::json header;
    header["layers"] = nlohmann::json::array();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        header["layers"].push_back({{"out", net.layer(l).weight.rows()},
                                    {"in", net.layer(l).weight.cols()}});
    }
    const std::string header_str = header.dump();

    std::string out;
    out += "DMLC";
    put_u32(out, static_cast<std::uint32_t>(header_str.size()));
    out += header_str;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        for (double x : net.layer(l).weight.data()) put_f64(out, x);
        for (double x : net.layer(l).bias) put_f64(out, x);
    }
    atomic_write_file(path, out);
}

EmbeddingNet load_checkpoint(const std::string& path) {
    Reader r(read_file(path), path);
    r.expect_magic("DMLC");
    const std::uint32_t header_len = r.u32();
    const std::string header_str = r.raw(header_len);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": bad checkpoint header: " + e.what());
    }
    if (!header.contains("layers") || !header["layers"].is_array() || header["layers"].empty()) {
        throw FormatError(path + ": checkpoint header missing layers");
    }
    std::vector<Layer> layers;
    for (const auto& entry : header["layers"]) {
        if (!entry.contains("out") || !entry.contains("in")) {
            throw FormatError(path + ": layer entry missing dims");
        }
        const auto out_dim = entry["out"].get<std::uint64_t>();
        const auto in_dim = entry["in"].get<std::uint64_t>();
        if (out_dim == 0 || in_dim == 0 || in_dim > r.remaining() / 8 / out_dim) {
            throw FormatError(path + ": layer dims exceed payload");
        }
        Layer layer;
        layer.weight = DenseMatrix(out_dim, in_dim);
        for (double& x : layer.weight.data()) x = r.f64();
        layer.bias.resize(out_dim);
        for (double& x : layer.bias) x = r.f64();
        layers.push_back(std::move(layer));
    }
    r.expect_end();
    return EmbeddingNet(std::move(layers));
}

}  // namespace dml
