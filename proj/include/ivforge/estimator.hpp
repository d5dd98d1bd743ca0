#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ivforge/instruments.hpp"

namespace ivforge {

struct IvEstimate {
  double theta_hat = 0.0;
  Vector coeffs;  // intercept followed by control coefficients
  double se_robust = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  double var_fperp = 0.0;
  double cov_dfperp = 0.0;
  std::size_t n = 0;
  double first_stage_f = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kZ975 = 1.959964;
inline constexpr double kRelevanceTolScale = 1e-10;
inline constexpr double kWeakInstrumentF = 10.0;

// Covariance-ratio IV estimand on an already-residualized instrument.
double iv_ratio(const Vector& y, const Vector& d, const Vector& f_perp);

// Full 2SLS of y on (1, d, h(X)) instrumented by (1, f, h(X)), with an HC1
// sandwich standard error computed from second-stage residuals that use the
// actual d.
IvEstimate tsls(const Dataset& ds, const InstrumentSpec& spec,
                TransformId h = TransformId::Identity);

// Plug-in predicted shift of the product-instrument IV estimate per unit of
// interaction coefficient, estimated on a pilot sample:
//   rho * cov(d, f_perp) / var(f_perp),  f_perp = resid(x1*x2 | 1, X).
double corollary_bias(const Dataset& pilot, double rho);

}  // namespace ivforge
