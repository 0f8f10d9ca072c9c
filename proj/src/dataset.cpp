#include "dml/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dml/format.hpp"

namespace dml {

LabeledDataset make_dataset(DenseMatrix features, std::vector<Label> labels) {
    if (labels.size() != features.rows()) {
        throw ShapeError("make_dataset: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.rows()) + " rows");
    }
    for (Label l : labels) {
        if (l < 0) throw ConfigError("make_dataset: labels must be nonnegative");
    }
    LabeledDataset data;
    data.features = std::move(features);
    data.labels = std::move(labels);
    data.ids.resize(data.labels.size());
    for (std::size_t i = 0; i < data.ids.size(); ++i) {
        data.ids[i] = static_cast<InstanceId>(i);
        data.class_index[data.labels[i]].push_back(i);
    }
    return data;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
    DenseMatrix features(rows.size(), data.dim());
    std::vector<Label> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        if (r >= data.size()) throw ShapeError("subset: row index out of range");
        for (std::size_t c = 0; c < data.dim(); ++c) features(i, c) = data.features(r, c);
        labels[i] = data.labels[r];
    }
    return make_dataset(std::move(features), std::move(labels));
}

LabeledDataset synth_clusters(std::size_t num_classes, std::size_t per_class,
                              std::size_t dim, double center_scale, double noise_sigma,
                              std::uint64_t seed) {
    if (num_classes == 0 || per_class == 0 || dim == 0) {
        throw ConfigError("synth_clusters: classes, per_class and dim must be > 0");
    }
    if (!(center_scale > 0.0) || noise_sigma < 0.0) {
        throw ConfigError("synth_clusters: need center_scale > 0 and noise_sigma >= 0");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    DenseMatrix centers(num_classes, dim);
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<double> v(dim);
        for (double& x : v) x = gauss(rng);
        v = l2_normalize(v);
        for (std::size_t j = 0; j < dim; ++j) centers(c, j) = center_scale * v[j];
    }

    DenseMatrix features(num_classes * per_class, dim);
    std::vector<Label> labels(num_classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t k = 0; k < per_class; ++k, ++row) {
            for (std::size_t j = 0; j < dim; ++j) {
                features(row, j) = centers(c, j) + noise_sigma * gauss(rng);
            }
            labels[row] = static_cast<Label>(c);
        }
    }
    return make_dataset(std::move(features), std::move(labels));
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delimiter)) fields.push_back(field);
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double_field(const std::string& raw, std::size_t line_no, const char* what) {
    const std::string s = trimmed(raw);
    double value = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + raw + "'");
    }
    return value;
}

}  // namespace

LabeledDataset load_delimited(const std::string& path, const DelimitedSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;
    std::size_t width = 0;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = schema.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto fields = split_line(line, schema.delimiter);
        if (schema.label_col >= fields.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": label column " +
                             std::to_string(schema.label_col) + " out of range for " +
                             std::to_string(fields.size()) + " fields");
        }
        std::vector<double> feat;
        feat.reserve(fields.size() - 1);
        Label label = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == schema.label_col) {
                const double raw = parse_double_field(fields[i], line_no, "label");
                label = static_cast<Label>(std::llround(raw));
                if (static_cast<double>(label) != raw || label < 0) {
                    throw ParseError("line " + std::to_string(line_no) +
                                     ": label must be a nonnegative integer, got '" + fields[i] +
                                     "'");
                }
            } else {
                feat.push_back(parse_double_field(fields[i], line_no, "feature"));
            }
        }
        if (width == 0) {
            width = feat.size();
            if (width == 0) {
                throw ParseError("line " + std::to_string(line_no) + ": no feature columns");
            }
        } else if (feat.size() != width) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(width) + " features, got " +
                             std::to_string(feat.size()));
        }
        rows.push_back(std::move(feat));
        labels.push_back(label);
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    DenseMatrix features(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) features(i, j) = rows[i][j];
    }
    ensure_finite(features, "load_delimited");
    return make_dataset(std::move(features), std::move(labels));
}

void save_delimited(const std::string& path, const LabeledDataset& data,
                    const DelimitedSchema& schema) {
    if (schema.label_col > data.dim()) {
        throw ConfigError("save_delimited: label column " + std::to_string(schema.label_col) +
                          " out of range for " + std::to_string(data.dim() + 1) + " fields");
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t feat_idx = 0;
        const std::size_t field_count = data.dim() + 1;
        for (std::size_t col = 0; col < field_count; ++col) {
            if (col > 0) out << schema.delimiter;
            if (col == schema.label_col) {
                out << data.labels[i];
            } else {
                out << format_double(data.features(i, feat_idx++));
            }
        }
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

}  // namespace dml
