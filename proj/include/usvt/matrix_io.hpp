// Copyright 2026 The usvt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV matrix files. One row per line, comma-separated reals, the literal
// token NA for a missing entry, optional header row. Writers emit 17
// significant digits so values survive a round trip exactly.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "usvt/error.hpp"
#include "usvt/estimator.hpp"
#include "usvt/linalg.hpp"

namespace usvt {

inline constexpr std::string_view kMissingToken = "NA";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

// Reads values and mask; missing entries hold 0 in `values`. The returned
// mode is Asymmetric; callers set it.
inline MaskedMatrix read_matrix_csv(std::istream& in, bool has_header = false) {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> seen;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = detail::split_commas(line);
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()), line_no);
    }
    std::vector<double> row(width, 0.0);
    std::vector<bool> row_seen(width, false);
    for (std::size_t c = 0; c < width; ++c) {
      const std::string_view tok = fields[c];
      if (tok == kMissingToken) continue;
      if (tok.empty()) throw ParseError("empty field in column " + std::to_string(c + 1), line_no);
      double v = 0.0;
      const char* first = tok.data();
      const char* last = tok.data() + tok.size();
      if (*first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw ParseError("cannot parse '" + std::string(tok) + "' as a number", line_no);
      }
      if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(tok) + "'", line_no);
      row[c] = v;
      row_seen[c] = true;
    }
    values.push_back(std::move(row));
    seen.push_back(std::move(row_seen));
  }
  if (in.bad()) throw IoError("read failure");
  if (values.empty()) throw ParseError("no data rows", line_no == 0 ? 1 : line_no);

  const auto rows = static_cast<Eigen::Index>(values.size());
  const auto cols = static_cast<Eigen::Index>(width);
  MaskedMatrix out{Matrix::Zero(rows, cols), Mask::Constant(rows, cols, false), SymmetryMode::kAsymmetric};
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out.values(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out.mask(i, j) = seen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return out;
}

inline MaskedMatrix read_matrix_csv_file(const std::string& path, bool has_header = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_matrix_csv(in, has_header);
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes `values`, emitting NA wherever `mask` is false (if given).
inline void write_matrix_csv(std::ostream& out, const Matrix& values, const Mask* mask = nullptr,
                             bool header = false) {
  if (header) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << "c" << (j + 1);
    out << '\n';
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      if (mask && !(*mask)(i, j)) {
        out << kMissingToken;
      } else {
        out << format_real(values(i, j));
      }
    }
    out << '\n';
  }
}

inline void write_matrix_csv_file(const std::string& path, const Matrix& values, const Mask* mask = nullptr,
                                  bool header = false) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix_csv(out, values, mask, header);
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace usvt
