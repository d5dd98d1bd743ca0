#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "ivforge/estimator.hpp"

namespace ivforge {

// Covariance of the latent (D, X1, X2, eps) block:
//   [ sd2  rp   rp   0  ]
//   [ rp   sx1  rp   0  ]
//   [ rp   rp   sx2  0  ]
//   [ 0    0    0    se2]
struct SigmaSpec {
  double sigma_d2 = 1.0;
  double sigma_x12 = 1.0;
  double sigma_x22 = 1.0;
  double rho_pair = 0.3;
  double sigma_eps2 = 1.0;

  Matrix covariance() const;
  void validate() const;  // positive definiteness via Cholesky
};

// Observed treatment carries a first-stage product loading,
//   D = Dlat + delta * (X1*X2 - E[X1*X2]),
// which is what makes the product instrument relevant; a jointly Gaussian
// (D, X1, X2) would have cov(D, X1*X2 - proj) identically zero.
struct LinearInteractionSpec {
  double alpha = 1.0;
  double theta = 1.0;
  double pi1 = 1.0;
  double pi2 = 1.0;
  double rho_interact = 0.0;
  double first_stage_delta = 1.0;
  SigmaSpec sigma;
};

struct AdversarialSpec {
  double alpha = 1.0;
  double theta = 1.0;
  Vector pi{1.0, 1.0};
  double rho_target = 0.0;
  InstrumentSpec instrument = InstrumentSpec::product(0, 1);
  std::size_t pilot_n = 1000000;
  std::uint64_t pilot_seed = 0x5EEDBA5Eull;
  double first_stage_delta = 1.0;
  SigmaSpec sigma;
  // Filled by fit_adversarial / prepare_dgp; simulating an unprepared spec
  // refits the pilot on every call.
  std::optional<double> g_rho;
};

// Nonlinear outcome variants keep the structural index exactly Gaussian by
// loading the interaction into the index with the opposite sign:
//   I = alpha0 + alpha1*D - alpha1*delta*(X1*X2 - E[X1*X2]) + X1 + X2
//     = alpha0 + alpha1*Dlat + X1 + X2,
// so dY/dD = alpha1 * g'(I) and the Gauss-Hermite calibration is exact.
struct ProbitSpec {
  double alpha1 = 0.0;  // 0 = calibrate before simulating
  double alpha0 = 1.0;
  double first_stage_delta = 0.04;
  SigmaSpec sigma{0.04, 1.0, 1.0, 0.1, 1.0};
};

struct ExponentialSpec {
  double alpha1 = 0.0;
  double alpha0 = -3.0;
  double first_stage_delta = 2.5;
  SigmaSpec sigma{0.04, 1.0, 1.0, 0.1, 1.0};
};

struct LogitSpec {
  double alpha1 = 0.0;
  double alpha0 = -1.5;
  double first_stage_delta = 0.2;
  SigmaSpec sigma{0.04, 1.0, 1.0, 0.1, 1.0};
};

struct LogLinearSpec {
  double pi1 = 2.5;
  double pi2 = 2.5;
  double gamma_mean = 2.0;
  double gamma_var = 1.0;
  double rho_latent = 0.3;
  double sigma_d2 = 1.0;
  double sigma_eps2 = 0.25;
  double first_stage_delta = 0.2;
};

struct ExcludedInstrumentSpec {
  double alpha = 1.0;
  double theta = 1.0;
  double pi1 = 1.0;
  double pi2 = 1.0;
  double rho_interact = 0.0;
  double gamma_z = 1.0;
  double endog_corr = 0.5;
  SigmaSpec sigma;
};

using DgpSpec = std::variant<LinearInteractionSpec, AdversarialSpec, ProbitSpec, ExponentialSpec,
                             LogitSpec, LogLinearSpec, ExcludedInstrumentSpec>;

const char* dgp_name(const DgpSpec& spec);

// Pure in (spec, n, seed); bit-identical across runs and thread counts.
Dataset simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

// Fraction of candidate rows rejected by the log-linear positivity redraw on
// the last simulate call for this spec shape (diagnostic only).
struct LogLinearDrawStats {
  std::size_t proposed = 0;
  std::size_t rejected = 0;
};
LogLinearDrawStats simulate_loglinear_stats(const LogLinearSpec& spec, std::size_t n,
                                            std::uint64_t seed, Dataset* out = nullptr);

struct AdversarialModel {
  double g_rho = 0.0;
  Vector pi;
  Vector projection_coeffs;  // pilot projection of f on (1, X)
  double cov_dfperp = 0.0;
  double var_fperp = 0.0;
  bool conditioning_warning = false;
};

inline constexpr double kConditioningTol = 1e-3;

// Pilot plug-in for the constructed outcome term: stores
//   g_rho = -rho_target * cov(d, f_perp) / var(f_perp)
// so the simulated IV estimand lands at theta - rho_target.
AdversarialModel fit_adversarial(double theta, double rho_target, const Vector& pi,
                                 const InstrumentSpec& instrument, const Dataset& pilot);

// For Adversarial specs, fits the pilot once and caches g_rho; other variants
// pass through unchanged.
DgpSpec prepare_dgp(const DgpSpec& spec);

// Monte Carlo mean of the analytic pointwise derivative dY/dD.
double average_partial_effect(const DgpSpec& spec, std::size_t draws, std::uint64_t seed);

}  // namespace ivforge
