/*
 Copyright 2026 The minnov Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef MINNOV_CSV_HPP
#define MINNOV_CSV_HPP

#include <Eigen/Dense>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "minnov/errors.hpp"

namespace minnov::csv {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    const std::string tmp(field);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && errno != ERANGE;
}

}  // namespace detail

/// A parsed numeric table. `header` is empty when the first row was numeric.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Reads comma-separated numeric rows. A first row with any non-numeric
/// field is taken as a header; every later row must be fully numeric and of
/// equal width. Blank lines are skipped.
inline Table read_table(std::istream& in) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            numeric = numeric && detail::parse_double(fields[i], row[i]);
        }
        if (!numeric) {
            if (table.rows.empty() && table.header.empty()) {
                for (auto f : fields) table.header.emplace_back(f);
                width = fields.size();
                continue;
            }
            throw InvalidArgument("csv: non-numeric field on line " + std::to_string(line_no));
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw InvalidArgument("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(width));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline Eigen::MatrixXd to_matrix(const Table& table) {
    if (table.rows.empty()) throw InvalidArgument("csv: no numeric rows");
    Eigen::MatrixXd m(table.rows.size(), table.rows.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = table.rows[i][j];
    }
    return m;
}

inline std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    return out;
}

/// Row-major matrix, header optional.
inline Eigen::MatrixXd read_matrix(std::istream& in) { return to_matrix(read_table(in)); }

inline Eigen::MatrixXd read_matrix(const std::string& path) {
    auto in = open_for_read(path);
    return read_matrix(in);
}

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

inline void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    auto out = open_for_write(path);
    write_matrix(out, m);
}

}  // namespace minnov::csv

#endif  // MINNOV_CSV_HPP
