#ifndef MZIPMED_DATASET_HPP
#define MZIPMED_DATASET_HPP

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mzipmed {

struct ColumnRoles {
  std::string outcome;
  std::string exposure;
  std::string mediator;
  std::vector<std::string> covariates;
};

// Rectangular numeric table. Empty cells are stored as NaN; cells that were
// present but not numeric are remembered so that role resolution can reject
// them with their position.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> non_numeric;  // row, col

  Eigen::Index n() const { return values.rows(); }

  Eigen::Index column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw ParseError("unknown column '" + name + "'", 0, name);
  }
};

// Model-ready vectors extracted from a Dataset via a role mapping.
struct ResolvedData {
  Eigen::VectorXd outcome;
  Eigen::VectorXd exposure;
  Eigen::VectorXd mediator;
  Eigen::MatrixXd covariates;  // n x k
  Eigen::Index dropped_rows = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_record(std::istream& in, bool& eof) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else {
      field.push_back(c);
    }
  }
  eof = !any && ch == EOF;
  if (!eof) fields.push_back(std::move(field));
  return fields;
}

inline bool parse_cell(const std::string& text, double& out) {
  std::size_t pos = 0;
  try {
    out = std::stod(text, &pos);
  } catch (...) {
    return false;
  }
  while (pos < text.size() &&
         (text[pos] == ' ' || text[pos] == '\t'))
    ++pos;
  return pos == text.size();
}

}  // namespace detail

inline Dataset read_csv(std::istream& in) {
  Dataset ds;
  bool eof = false;
  ds.columns = detail::split_csv_record(in, eof);
  if (eof || ds.columns.empty())
    throw ParseError("CSV input is empty; a header row is required");
  const std::size_t width = ds.columns.size();
  std::vector<double> cells;
  Eigen::Index nrows = 0;
  for (;;) {
    const std::vector<std::string> rec = detail::split_csv_record(in, eof);
    if (eof) break;
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (rec.size() != width)
      throw ParseError("row " + std::to_string(nrows + 2) + " has " +
                           std::to_string(rec.size()) + " fields, expected " +
                           std::to_string(width),
                       nrows + 2);
    for (std::size_t j = 0; j < width; ++j) {
      std::string t = rec[j];
      const std::size_t b = t.find_first_not_of(" \t");
      const std::size_t e = t.find_last_not_of(" \t");
      t = b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
      if (t.empty()) {
        cells.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        double v;
        if (detail::parse_cell(t, v)) {
          cells.push_back(v);
        } else {
          cells.push_back(std::numeric_limits<double>::quiet_NaN());
          ds.non_numeric.emplace_back(nrows, static_cast<Eigen::Index>(j));
        }
      }
    }
    ++nrows;
  }
  ds.values.resize(nrows, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < nrows; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(width); ++j)
      ds.values(i, j) = cells[static_cast<std::size_t>(i * width + j)];
  return ds;
}

inline void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t j = 0; j < ds.columns.size(); ++j) {
    if (j) out << ',';
    out << ds.columns[j];
  }
  out << '\n';
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < ds.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.values.cols(); ++j) {
      if (j) out << ',';
      out << ds.values(i, j);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

// Extracts mapped columns, rejecting non-numeric mapped cells (with row and
// column in the message) and dropping rows with missing mapped cells.
inline ResolvedData resolve_roles(const Dataset& ds, const ColumnRoles& roles) {
  std::vector<Eigen::Index> idx;
  idx.push_back(ds.column_index(roles.outcome));
  idx.push_back(ds.column_index(roles.exposure));
  idx.push_back(ds.column_index(roles.mediator));
  for (const std::string& c : roles.covariates)
    idx.push_back(ds.column_index(c));

  for (const auto& [row, col] : ds.non_numeric)
    for (const Eigen::Index mapped : idx)
      if (col == mapped)
        throw ParseError("non-numeric value in column '" + ds.columns[col] +
                             "', row " + std::to_string(row + 2),
                         row + 2, ds.columns[col]);

  std::vector<Eigen::Index> keep;
  keep.reserve(ds.n());
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    bool complete = true;
    for (const Eigen::Index j : idx)
      if (std::isnan(ds.values(i, j))) complete = false;
    if (complete) keep.push_back(i);
  }

  ResolvedData rd;
  rd.dropped_rows = ds.n() - static_cast<Eigen::Index>(keep.size());
  const Eigen::Index n = static_cast<Eigen::Index>(keep.size());
  const Eigen::Index k = static_cast<Eigen::Index>(roles.covariates.size());
  rd.outcome.resize(n);
  rd.exposure.resize(n);
  rd.mediator.resize(n);
  rd.covariates.resize(n, k);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index i = keep[r];
    rd.outcome[r] = ds.values(i, idx[0]);
    rd.exposure[r] = ds.values(i, idx[1]);
    rd.mediator[r] = ds.values(i, idx[2]);
    for (Eigen::Index j = 0; j < k; ++j)
      rd.covariates(r, j) = ds.values(i, idx[3 + j]);
  }
  for (Eigen::Index r = 0; r < n; ++r)
    if (rd.outcome[r] < 0.0 || rd.outcome[r] != std::floor(rd.outcome[r]))
      throw ParseError("outcome column '" + roles.outcome +
                           "' must be nonnegative integers; bad value in row " +
                           std::to_string(keep[r] + 2),
                       keep[r] + 2, roles.outcome);
  return rd;
}

}  // namespace mzipmed

#endif
