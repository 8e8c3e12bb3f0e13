#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlsel/errors.hpp"

namespace nlsel {

/// Shortest decimal that round-trips a float64.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_csv_vector(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (double x : values) out << format_double(x) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

inline void write_csv_matrix(const std::string& path, const std::vector<double>& data,
                             std::size_t rows, std::size_t cols) {
    if (data.size() != rows * cols) throw DataError("csv: data size does not match shape");
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ',';
            out << format_double(data[r * cols + c]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

/// Reads a CSV of doubles; every row must have the same number of fields.
/// Returns row-major data and the shape.
struct CsvTable {
    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::size_t cols = 0;
        while (std::getline(ss, field, ',')) {
            try {
                table.data.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw DataError("malformed CSV value '" + field + "' in " + path);
            }
            ++cols;
        }
        if (table.rows == 0) {
            table.cols = cols;
        } else if (cols != table.cols) {
            throw DataError("ragged CSV (row " + std::to_string(table.rows) + ") in " + path);
        }
        ++table.rows;
    }
    if (table.rows == 0) throw DataError("empty CSV: " + path);
    return table;
}

/// 8-bit binary PGM (P5) after min-max scaling over the whole image.
inline void write_pgm(const std::string& path, const std::vector<double>& data,
                      std::size_t rows, std::size_t cols) {
    if (data.size() != rows * cols) throw DataError("pgm: data size does not match shape");
    const auto [mn_it, mx_it] = std::minmax_element(data.begin(), data.end());
    const double mn = *mn_it, mx = *mx_it;
    const double span = (mx > mn) ? (mx - mn) : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "P5\n" << cols << ' ' << rows << "\n255\n";
    std::vector<uint8_t> px(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        px[i] = static_cast<uint8_t>(255.0 * (data[i] - mn) / span + 0.5);
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out) throw DataError("write failed: " + path);
}

// little-endian binary primitives (file formats are specified little-endian;
// asserted at build time in dataset.hpp)

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return in.gcount() == sizeof(T);
}

} // namespace nlsel
