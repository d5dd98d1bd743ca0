#include "ivforge/data_model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ivforge {

namespace {

void check_finite_column(const Vector& v, const std::string& name) {
  for (double x : v) {
    if (!std::isfinite(x))
      throw InvalidSpecError("dataset column '" + name + "' has a non-finite entry");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* s = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || !std::isfinite(v)) throw NonNumericCellError(row, col, cell);
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset Dataset::make(Vector y, Vector d, Matrix x, std::optional<Matrix> z,
                      std::vector<std::string> x_names, std::vector<std::string> z_names) {
  const std::size_t n = y.size();
  if (d.size() != n) throw LengthMismatchError(d.size(), n);
  if (x.rows() != n) throw LengthMismatchError(x.rows(), n);
  if (x.cols() < 1) throw InvalidSpecError("dataset needs at least one covariate");
  if (z && z->rows() != n) throw LengthMismatchError(z->rows(), n);

  Dataset ds;
  ds.y = std::move(y);
  ds.d = std::move(d);
  ds.x = std::move(x);
  ds.z = std::move(z);
  check_finite_column(ds.y, "y");
  check_finite_column(ds.d, "d");
  for (std::size_t j = 0; j < ds.x.cols(); ++j) check_finite_column(ds.x.col(j), "x" + std::to_string(j + 1));
  if (ds.z)
    for (std::size_t j = 0; j < ds.z->cols(); ++j) check_finite_column(ds.z->col(j), "z" + std::to_string(j + 1));

  if (x_names.empty())
    for (std::size_t j = 0; j < ds.x.cols(); ++j) x_names.push_back("x" + std::to_string(j + 1));
  if (x_names.size() != ds.x.cols()) throw LengthMismatchError(x_names.size(), ds.x.cols());
  ds.x_names = std::move(x_names);
  if (ds.z) {
    if (z_names.empty())
      for (std::size_t j = 0; j < ds.z->cols(); ++j) z_names.push_back("z" + std::to_string(j + 1));
    if (z_names.size() != ds.z->cols()) throw LengthMismatchError(z_names.size(), ds.z->cols());
    ds.z_names = std::move(z_names);
  }
  return ds;
}

Dataset read_csv(const std::string& path, const RoleMap& roles, std::vector<std::string>* ignored) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string header;
  if (!std::getline(in, header)) throw EmptyFileError(path);
  const std::vector<std::string> names = split_csv_line(header);

  for (const auto& [name, role] : roles) {
    (void)role;
    bool found = false;
    for (const auto& h : names)
      if (h == name) found = true;
    if (!found) throw MissingColumnError(name);
  }

  std::vector<std::optional<ColumnRole>> col_role(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = roles.find(names[j]);
    if (it != roles.end()) {
      col_role[j] = it->second;
    } else if (ignored) {
      ignored->push_back(names[j]);
    }
  }

  std::vector<Vector> cols(names.size());
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != names.size())
      throw IoError(path + ": row " + std::to_string(row + 1) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(names.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!col_role[j]) continue;
      cols[j].push_back(parse_cell(cells[j], row + 1, j));
    }
    ++row;
  }
  if (row == 0) throw EmptyFileError(path);

  Vector y, d;
  std::string y_name, d_name;
  std::vector<Vector> xs, zs;
  std::vector<std::string> x_names, z_names;
  int outcome_count = 0, treatment_count = 0;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!col_role[j]) continue;
    switch (*col_role[j]) {
      case ColumnRole::Outcome:
        ++outcome_count;
        y = cols[j];
        y_name = names[j];
        break;
      case ColumnRole::Treatment:
        ++treatment_count;
        d = cols[j];
        d_name = names[j];
        break;
      case ColumnRole::Covariate:
        xs.push_back(cols[j]);
        x_names.push_back(names[j]);
        break;
      case ColumnRole::Excluded:
        zs.push_back(cols[j]);
        z_names.push_back(names[j]);
        break;
    }
  }
  if (outcome_count != 1) throw InvalidSpecError("role map must name exactly one Outcome column");
  if (treatment_count != 1) throw InvalidSpecError("role map must name exactly one Treatment column");
  if (xs.empty()) throw InvalidSpecError("role map must name at least one Covariate column");

  std::optional<Matrix> z;
  if (!zs.empty()) z = Matrix::from_columns(zs);
  Dataset ds = Dataset::make(std::move(y), std::move(d), Matrix::from_columns(xs), std::move(z),
                             std::move(x_names), std::move(z_names));
  ds.y_name = y_name;
  ds.d_name = d_name;
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << ds.y_name << ',' << ds.d_name;
  for (const auto& nm : ds.x_names) out << ',' << nm;
  if (ds.z)
    for (const auto& nm : ds.z_names) out << ',' << nm;
  out << '\n';

  for (std::size_t i = 0; i < ds.n(); ++i) {
    out << format_double(ds.y[i]) << ',' << format_double(ds.d[i]);
    for (std::size_t j = 0; j < ds.x.cols(); ++j) out << ',' << format_double(ds.x(i, j));
    if (ds.z)
      for (std::size_t j = 0; j < ds.z->cols(); ++j) out << ',' << format_double((*ds.z)(i, j));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ivforge
