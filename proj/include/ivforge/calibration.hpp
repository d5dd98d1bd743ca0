#pragma once

#include <cstddef>
#include <utility>

#include "ivforge/dgp.hpp"

namespace ivforge {

// Physicists' Gauss-Hermite rule for weight exp(-x^2): nodes and weights.
std::pair<Vector, Vector> gauss_hermite(std::size_t n);

enum class CalibModel { Probit, Exponential, Logit, LinearIdentity };

const char* calib_model_name(CalibModel m);

// E[g'(W)] for W ~ N(w_mean, w_variance) by Gauss-Hermite quadrature.
// g': Probit phi, Exponential exp, Logit p(1-p), LinearIdentity 1.
double expected_gprime(CalibModel model, double w_variance, std::size_t quad_nodes = 64,
                       double w_mean = 0.0);

// Solves alpha1 * E[g'(W(alpha1))] = 1 where the index variance is the exact
// quadratic of the structural index, Var(W) = a*alpha1^2 + b*alpha1 + c.
struct CalibrationProblem {
  CalibModel model = CalibModel::LinearIdentity;
  double var_quad_a = 1.0;
  double var_lin_b = 0.0;
  double var_const_c = 0.0;
  double w_mean = 0.0;
  double tolerance = 1e-8;
  double bracket_lo = 1e-8;
  double bracket_hi = 1.0;  // doubled as needed, up to 64
  std::size_t quad_nodes = 64;

  void validate() const;
  double index_variance(double alpha1) const {
    return var_quad_a * alpha1 * alpha1 + var_lin_b * alpha1 + var_const_c;
  }

  // Derives (a, b, c) and the index mean from a nonlinear DGP variant.
  static CalibrationProblem for_dgp(const DgpSpec& spec);
};

inline constexpr double kBracketMax = 64.0;

struct CalibrationResult {
  double alpha1 = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

CalibrationResult calibrate_alpha(const CalibrationProblem& problem);

// Writes the calibrated alpha1 into a nonlinear DGP spec (no-op for linear
// variants, where the treatment coefficient already is the APE).
DgpSpec with_calibrated_alpha(const DgpSpec& spec);

}  // namespace ivforge
