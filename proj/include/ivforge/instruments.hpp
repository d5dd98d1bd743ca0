#pragma once

#include <cstddef>
#include <vector>

#include "ivforge/data_model.hpp"

namespace ivforge {

// Elementwise covariate-matrix transforms used as second-stage controls.
enum class TransformId { Identity, CenteredExp, Log1p, TanhRatio };

const char* transform_name(TransformId h);

// How a Transform-kind instrument collapses its transformed columns.
enum class Combiner { Product, Sum };

struct InstrumentSpec {
  enum class Kind { Product, Transform, ExcludedColumn };

  Kind kind = Kind::Product;
  std::size_t i = 0;  // Product: first covariate index
  std::size_t j = 1;  // Product: second covariate index (i != j)
  TransformId h = TransformId::Identity;
  std::vector<std::size_t> columns;  // Transform: covariate indices
  Combiner combiner = Combiner::Product;
  std::size_t z_index = 0;  // ExcludedColumn

  static InstrumentSpec product(std::size_t i, std::size_t j);
  static InstrumentSpec transform(TransformId h, std::vector<std::size_t> columns,
                                  Combiner combiner = Combiner::Product);
  static InstrumentSpec excluded_column(std::size_t z_index);

  void validate(std::size_t n_covariates, std::size_t n_excluded) const;
};

// The raw instrument column f(X, Z); never residualized here.
Vector build_instrument(const InstrumentSpec& spec, const Dataset& ds);

Matrix apply_transform(TransformId h, const Matrix& x);

struct SaturationCheck {
  double var_fperp = 0.0;
  double var_f = 0.0;
  bool degenerate = false;
};

inline constexpr double kSaturationTol = 1e-8;

// Lemma-1 style degeneracy check: the instrument is unidentifying when its
// residual variance after projecting onto (1, X) vanishes relative to var(f).
SaturationCheck check_saturation(const Vector& f, const Matrix& x);

struct RelevanceCheck {
  double cov_dfperp = 0.0;
  double first_stage_f = 0.0;  // squared robust t of f_perp in a first stage
};

inline constexpr double kFirstStageFCap = 1e12;

RelevanceCheck check_relevance(const Vector& d, const Vector& f_perp);

}  // namespace ivforge
