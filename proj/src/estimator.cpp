#include "ivforge/estimator.hpp"

#include <cmath>

namespace ivforge {

double iv_ratio(const Vector& y, const Vector& d, const Vector& f_perp) {
  const double cov_df = sample_cov(d, f_perp);
  const double rel_tol = kRelevanceTolScale * sample_sd(d) * sample_sd(f_perp);
  if (std::abs(cov_df) <= rel_tol)
    throw UnidentifiedError("cov(d, f_perp) is numerically zero (no relevance)");
  return sample_cov(y, f_perp) / cov_df;
}

IvEstimate tsls(const Dataset& ds, const InstrumentSpec& spec, TransformId h) {
  const std::size_t n = ds.n();
  const Matrix controls = apply_transform(h, ds.x);
  const Vector f = build_instrument(spec, ds);

  const SaturationCheck sat = check_saturation(f, controls);
  if (sat.degenerate)
    throw UnidentifiedError("instrument is linear in the controls (saturation)");

  const Matrix c1 = with_intercept(controls);
  const Vector f_perp = residualize(f, c1);

  IvEstimate est;
  est.n = n;
  est.var_fperp = sample_var(f_perp);
  est.cov_dfperp = sample_cov(ds.d, f_perp);
  const RelevanceCheck rel = check_relevance(ds.d, f_perp);
  est.first_stage_f = rel.first_stage_f;
  if (rel.first_stage_f < kWeakInstrumentF)
    est.warnings.push_back("weak instrument: first-stage F below 10");

  const double rel_tol = kRelevanceTolScale * sample_sd(ds.d) * sample_sd(f_perp);
  if (std::abs(est.cov_dfperp) <= rel_tol)
    throw UnidentifiedError("cov(d, f_perp) is numerically zero (no relevance)");

  // First stage: d on (1, f, h(X)).
  const std::size_t k = controls.cols() + 2;
  Matrix first(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    first(i, 0) = 1.0;
    first(i, 1) = f[i];
    for (std::size_t j = 0; j < controls.cols(); ++j) first(i, j + 2) = controls(i, j);
  }
  const Vector gamma = QrFactor(first).solve(ds.d);
  const Vector d_hat = matvec(first, gamma);

  // Second stage: y on (1, d_hat, h(X)).
  Matrix second(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    second(i, 0) = 1.0;
    second(i, 1) = d_hat[i];
    for (std::size_t j = 0; j < controls.cols(); ++j) second(i, j + 2) = controls(i, j);
  }
  const QrFactor second_qr(second);
  const Vector beta = second_qr.solve(ds.y);
  est.theta_hat = beta[1];
  est.coeffs.reserve(k - 1);
  est.coeffs.push_back(beta[0]);
  for (std::size_t j = 2; j < k; ++j) est.coeffs.push_back(beta[j]);

  // Residuals with the actual d; HC1 sandwich on the second-stage design.
  Vector resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    double fit = beta[0] + beta[1] * ds.d[i];
    for (std::size_t j = 2; j < k; ++j) fit += beta[j] * second(i, j);
    resid[i] = ds.y[i] - fit;
  }
  const Matrix bread = second_qr.inverse_gram();
  Matrix meat(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double e2 = resid[i] * resid[i];
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b <= a; ++b) meat(a, b) += e2 * second(i, a) * second(i, b);
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b) meat(a, b) = meat(b, a);

  // var(theta) = n/(n-k) * [bread * meat * bread]_{11}
  double v = 0.0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) v += bread(1, a) * meat(a, b) * bread(b, 1);
  v *= static_cast<double>(n) / static_cast<double>(n - k);
  est.se_robust = std::sqrt(std::max(v, 0.0));
  est.ci95 = {est.theta_hat - kZ975 * est.se_robust, est.theta_hat + kZ975 * est.se_robust};
  return est;
}

double corollary_bias(const Dataset& pilot, double rho) {
  if (pilot.n_covariates() < 2)
    throw InvalidSpecError("corollary_bias needs at least two covariates");
  const std::size_t n = pilot.n();
  Vector prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = pilot.x(i, 0) * pilot.x(i, 1);
  const Vector f_perp = residualize(prod, with_intercept(pilot.x));
  const double var_fp = sample_var(f_perp);
  if (var_fp <= kSaturationTol * sample_var(prod))
    throw UnidentifiedError("product instrument has no residual variance on the pilot");
  return rho * sample_cov(pilot.d, f_perp) / var_fp;
}

}  // namespace ivforge
