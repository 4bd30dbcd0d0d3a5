#pragma once
// Model and dataset serialization.
//   Model: JSON {input_dim, layers:[{weights, bias, activation:{kind, beta?}}],
//          output_index}; weights are row-major nested arrays. Doubles are
//          emitted with round-trip precision, so load(save(net)) is value-exact.
//   Dataset: CSV with a header row, one sample per row, last column = label.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathexplain/network.hpp"

namespace pathexplain {

using json = nlohmann::json;

inline json model_to_json(const DenseNetwork& net) {
    json jlayers = json::array();
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const Layer& ly = net.layer(l);
        json rows = json::array();
        for (std::size_t r = 0; r < ly.weights.rows; ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < ly.weights.cols; ++c) row.push_back(ly.weights(r, c));
            rows.push_back(std::move(row));
        }
        json act{{"kind", act_name(ly.act.kind)}};
        if (ly.act.kind == Act::softplus) act["beta"] = ly.act.beta;
        jlayers.push_back(json{{"weights", std::move(rows)},
                               {"bias", ly.bias},
                               {"activation", std::move(act)}});
    }
    return json{{"input_dim", net.input_dim()},
                {"layers", std::move(jlayers)},
                {"output_index", net.output_index()}};
}

inline DenseNetwork model_from_json(const json& j) {
    try {
        if (!j.is_object()) throw input_error("model JSON root must be an object");
        for (const char* key : {"input_dim", "layers", "output_index"})
            if (!j.contains(key))
                throw input_error(std::string("model JSON missing field '") + key + "'");
        std::size_t input_dim = j.at("input_dim").get<std::size_t>();
        std::size_t output_index = j.at("output_index").get<std::size_t>();
        std::vector<Layer> layers;
        const json& jlayers = j.at("layers");
        if (!jlayers.is_array() || jlayers.empty())
            throw input_error("model JSON 'layers' must be a non-empty array");
        for (std::size_t l = 0; l < jlayers.size(); ++l) {
            const json& jl = jlayers[l];
            const json& jw = jl.at("weights");
            if (!jw.is_array() || jw.empty())
                throw input_error("layer " + std::to_string(l) + ": 'weights' must be a non-empty array of rows");
            std::size_t rows = jw.size(), cols = jw[0].size();
            Mat w(rows, cols);
            for (std::size_t r = 0; r < rows; ++r) {
                if (jw[r].size() != cols)
                    throw input_error("layer " + std::to_string(l) + ": ragged weight rows");
                for (std::size_t c = 0; c < cols; ++c) w(r, c) = jw[r][c].get<double>();
            }
            Vec bias = jl.at("bias").get<Vec>();
            const json& ja = jl.at("activation");
            Activation act(act_from_name(ja.at("kind").get<std::string>()),
                           ja.value("beta", 1.0));
            layers.push_back(Layer{std::move(w), std::move(bias), act});
        }
        return DenseNetwork(input_dim, std::move(layers), output_index);
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed model JSON: ") + e.what());
    }
}

inline void save_model(const std::string& path, const DenseNetwork& net) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    out << model_to_json(net).dump(2) << "\n";
    if (!out) throw input_error("failed writing model to '" + path + "'");
}

inline DenseNetwork load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw input_error("cannot parse model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

// -- datasets -----------------------------------------------------------------

struct Dataset {
    Mat xs;
    Vec ys;
    std::vector<std::string> columns;  // header names, label last
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double_field(const std::string& s, const std::string& path, std::size_t line_no,
                                 std::size_t col) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE)
        throw input_error(path + ": row " + std::to_string(line_no) + ", column " +
                          std::to_string(col + 1) + ": cannot parse '" + s + "' as a number");
    return v;
}

}  // namespace detail

/// Loads a CSV dataset: header row, one sample per row, last column = label.
/// Errors carry the 1-based row number (header is row 1).
inline Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open dataset file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file, expected a header row");
    Dataset ds;
    ds.columns = detail::split_csv_line(line);
    if (ds.columns.size() < 2)
        throw input_error(path + ": row 1: header must have at least one feature column and a label column");
    std::size_t n_cols = ds.columns.size();
    std::vector<double> flat;
    std::size_t n_rows = 0, line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != n_cols)
            throw input_error(path + ": row " + std::to_string(line_no) + ": expected " +
                              std::to_string(n_cols) + " fields, found " +
                              std::to_string(fields.size()));
        for (std::size_t c = 0; c < n_cols; ++c)
            flat.push_back(detail::parse_double_field(fields[c], path, line_no, c));
        ++n_rows;
    }
    if (n_rows == 0) throw input_error(path + ": no data rows after the header");
    ds.xs = Mat(n_rows, n_cols - 1);
    ds.ys.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c + 1 < n_cols; ++c) ds.xs(r, c) = flat[r * n_cols + c];
        ds.ys[r] = flat[r * n_cols + (n_cols - 1)];
    }
    return ds;
}

inline void save_dataset_csv(const std::string& path, const Mat& xs, const Vec& ys,
                             const std::vector<std::string>& columns = {}) {
    if (xs.rows != ys.size()) throw input_error("save_dataset_csv: labels/rows mismatch");
    std::ofstream out(path);
    if (!out) throw input_error("cannot open '" + path + "' for writing");
    if (!columns.empty()) {
        if (columns.size() != xs.cols + 1)
            throw input_error("save_dataset_csv: header must have one name per column plus label");
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << columns[c];
    } else {
        for (std::size_t c = 0; c < xs.cols; ++c) out << (c ? "," : "") << "x" << c;
        out << ",y";
    }
    out << "\n";
    for (std::size_t r = 0; r < xs.rows; ++r) {
        for (std::size_t c = 0; c < xs.cols; ++c) out << format_double(xs(r, c)) << ",";
        out << format_double(ys[r]) << "\n";
    }
    if (!out) throw input_error("failed writing dataset to '" + path + "'");
}

/// Parses a comma-separated list of numbers, e.g. a CLI --input value.
inline Vec parse_number_list(const std::string& text) {
    auto fields = detail::split_csv_line(text);
    Vec v;
    for (std::size_t i = 0; i < fields.size(); ++i)
        v.push_back(detail::parse_double_field(fields[i], "<inline list>", 1, i));
    return v;
}

}  // namespace pathexplain
