#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivforge/numerics.hpp"

namespace ivforge {

enum class ColumnRole { Outcome, Treatment, Covariate, Excluded };

// Columnar sample (y, d, X, optional z). Immutable after construction.
struct Dataset {
  Vector y;
  Vector d;
  Matrix x;                  // n x J covariates, no intercept stored
  std::optional<Matrix> z;   // n x m excluded exogenous columns
  std::string y_name = "y";
  std::string d_name = "d";
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t n_covariates() const noexcept { return x.cols(); }

  // Validates column lengths, J >= 1, finiteness of every role column.
  static Dataset make(Vector y, Vector d, Matrix x, std::optional<Matrix> z = std::nullopt,
                      std::vector<std::string> x_names = {},
                      std::vector<std::string> z_names = {});
};

using RoleMap = std::map<std::string, ColumnRole>;

// RFC-4180-style CSV with a header row; '.' decimal separator. Columns not
// named in the role map are skipped and reported through `ignored`.
Dataset read_csv(const std::string& path, const RoleMap& roles,
                 std::vector<std::string>* ignored = nullptr);

// 17 significant digits so read_csv(write_csv(ds)) round-trips.
void write_csv(const Dataset& ds, const std::string& path);

}  // namespace ivforge
