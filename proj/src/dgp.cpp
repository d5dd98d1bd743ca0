#include "ivforge/dgp.hpp"

#include <cmath>

#include "ivforge/rng.hpp"

namespace ivforge {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct MvnBlock {
  Vector d_lat, x1, x2, eps;
};

MvnBlock draw_mvn_block(const SigmaSpec& sigma, std::size_t n, std::mt19937_64& rng) {
  sigma.validate();
  const Matrix l = cholesky(sigma.covariance(), "sigma");
  std::normal_distribution<double> nd;
  MvnBlock b;
  b.d_lat.resize(n);
  b.x1.resize(n);
  b.x2.resize(n);
  b.eps.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = nd(rng), z1 = nd(rng), z2 = nd(rng), z3 = nd(rng);
    b.d_lat[i] = l(0, 0) * z0;
    b.x1[i] = l(1, 0) * z0 + l(1, 1) * z1;
    b.x2[i] = l(2, 0) * z0 + l(2, 1) * z1 + l(2, 2) * z2;
    b.eps[i] = l(3, 0) * z0 + l(3, 1) * z1 + l(3, 2) * z2 + l(3, 3) * z3;
  }
  return b;
}

// Observed treatment with the first-stage product loading, centered so that
// E[D] stays zero: E[X1*X2] = rho_pair for the latent Gaussian block.
Vector observed_treatment(const MvnBlock& b, double delta, double rho_pair) {
  Vector d(b.d_lat.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = b.d_lat[i] + delta * (b.x1[i] * b.x2[i] - rho_pair);
  return d;
}

Dataset finish(Vector y, Vector d, const MvnBlock& b, std::optional<Matrix> z = std::nullopt,
               std::vector<std::string> z_names = {}) {
  return Dataset::make(std::move(y), std::move(d), Matrix::from_columns({b.x1, b.x2}),
                       std::move(z), {"x1", "x2"}, std::move(z_names));
}

Dataset simulate_linear(const LinearInteractionSpec& s, std::size_t n, std::uint64_t seed) {
  auto rng = make_engine(seed);
  const MvnBlock b = draw_mvn_block(s.sigma, n, rng);
  Vector d = observed_treatment(b, s.first_stage_delta, s.sigma.rho_pair);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = s.alpha + s.theta * d[i] + s.pi1 * b.x1[i] + s.pi2 * b.x2[i] +
           s.rho_interact * b.x1[i] * b.x2[i] + b.eps[i];
  return finish(std::move(y), std::move(d), b);
}

Dataset simulate_adversarial(const AdversarialSpec& s, std::size_t n, std::uint64_t seed) {
  double g = 0.0;
  if (s.g_rho) {
    g = *s.g_rho;
  } else {
    const AdversarialSpec prepared = std::get<AdversarialSpec>(prepare_dgp(s));
    g = *prepared.g_rho;
  }
  if (s.pi.size() != 2) throw InvalidSpecError("adversarial pi must have two entries");
  auto rng = make_engine(seed);
  const MvnBlock b = draw_mvn_block(s.sigma, n, rng);
  Vector d = observed_treatment(b, s.first_stage_delta, s.sigma.rho_pair);
  Dataset partial = finish(Vector(n, 0.0), std::move(d), b);
  const Vector f = build_instrument(s.instrument, partial);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = s.alpha + s.theta * partial.d[i] + s.pi[0] * b.x1[i] + s.pi[1] * b.x2[i] + g * f[i] +
           b.eps[i];
  partial.y = std::move(y);
  return partial;
}

enum class IndexOutcome { Probit, Expon, Logit };

template <typename SpecT>
Dataset simulate_index(const SpecT& s, IndexOutcome kind, std::size_t n, std::uint64_t seed) {
  if (s.alpha1 == 0.0)
    throw InvalidSpecError("alpha1 is unset; run calibration before simulating");
  auto rng = make_engine(seed);
  const MvnBlock b = draw_mvn_block(s.sigma, n, rng);
  Vector d = observed_treatment(b, s.first_stage_delta, s.sigma.rho_pair);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double index = s.alpha0 + s.alpha1 * b.d_lat[i] + b.x1[i] + b.x2[i];
    switch (kind) {
      case IndexOutcome::Probit:
        y[i] = unif(rng) < normal_cdf(index) ? 1.0 : 0.0;
        break;
      case IndexOutcome::Expon:
        y[i] = std::exp(index) + b.eps[i];
        break;
      case IndexOutcome::Logit:
        y[i] = unif(rng) < logistic(index) ? 1.0 : 0.0;
        break;
    }
  }
  return finish(std::move(y), std::move(d), b);
}

Dataset simulate_excluded(const ExcludedInstrumentSpec& s, std::size_t n, std::uint64_t seed) {
  s.sigma.validate();
  if (std::abs(s.endog_corr) >= 1.0)
    throw InvalidSpecError("endog_corr must lie in (-1, 1)");
  auto rng = make_engine(seed);
  std::normal_distribution<double> nd;

  // (X1, X2) block with covariance rho_pair.
  Matrix sx(2, 2);
  sx(0, 0) = s.sigma.sigma_x12;
  sx(0, 1) = sx(1, 0) = s.sigma.rho_pair;
  sx(1, 1) = s.sigma.sigma_x22;
  const Matrix lx = cholesky(sx, "x block");

  const double se = std::sqrt(s.sigma.sigma_eps2);
  const double sv = std::sqrt(s.sigma.sigma_d2);

  MvnBlock b;
  b.x1.resize(n);
  b.x2.resize(n);
  b.eps.resize(n);
  b.d_lat.resize(n);
  Vector zc(n), d(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double g0 = nd(rng), g1 = nd(rng);
    b.x1[i] = lx(0, 0) * g0;
    b.x2[i] = lx(1, 0) * g0 + lx(1, 1) * g1;
    zc[i] = nd(rng);
    const double e0 = nd(rng), e1 = nd(rng);
    const double eps = se * e0;
    const double nu = sv * (s.endog_corr * e0 + std::sqrt(1.0 - s.endog_corr * s.endog_corr) * e1);
    b.eps[i] = eps;
    d[i] = s.gamma_z * zc[i] + s.sigma.rho_pair * (b.x1[i] + b.x2[i]) + nu;
    y[i] = s.alpha + s.theta * d[i] + s.pi1 * b.x1[i] + s.pi2 * b.x2[i] +
           s.rho_interact * b.x1[i] * b.x2[i] + eps;
  }
  return finish(std::move(y), std::move(d), b, Matrix::from_columns({zc}), {"z1"});
}

}  // namespace

Matrix SigmaSpec::covariance() const {
  Matrix s(4, 4);
  s(0, 0) = sigma_d2;
  s(1, 1) = sigma_x12;
  s(2, 2) = sigma_x22;
  s(3, 3) = sigma_eps2;
  s(0, 1) = s(1, 0) = rho_pair;
  s(0, 2) = s(2, 0) = rho_pair;
  s(1, 2) = s(2, 1) = rho_pair;
  return s;
}

void SigmaSpec::validate() const {
  if (sigma_d2 <= 0 || sigma_x12 <= 0 || sigma_x22 <= 0 || sigma_eps2 <= 0)
    throw InvalidSpecError("sigma variances must be positive");
  cholesky(covariance(), "sigma");
}

const char* dgp_name(const DgpSpec& spec) {
  struct Visitor {
    const char* operator()(const LinearInteractionSpec&) const { return "linear_interaction"; }
    const char* operator()(const AdversarialSpec&) const { return "adversarial"; }
    const char* operator()(const ProbitSpec&) const { return "probit"; }
    const char* operator()(const ExponentialSpec&) const { return "exponential"; }
    const char* operator()(const LogitSpec&) const { return "logit"; }
    const char* operator()(const LogLinearSpec&) const { return "log_linear"; }
    const char* operator()(const ExcludedInstrumentSpec&) const { return "excluded_instrument"; }
  };
  return std::visit(Visitor{}, spec);
}

LogLinearDrawStats simulate_loglinear_stats(const LogLinearSpec& s, std::size_t n,
                                            std::uint64_t seed, Dataset* out) {
  if (n < 10) throw InvalidSpecError("simulate needs n >= 10");
  if (!(s.gamma_var > s.rho_latent) || s.rho_latent < 0.0)
    throw InvalidSpecError("log-linear needs gamma_var > rho_latent >= 0");
  if (s.sigma_d2 <= s.rho_latent) throw InvalidSpecError("log-linear needs sigma_d2 > rho_latent");
  if (s.gamma_mean <= 0.0) throw InvalidSpecError("log-linear needs gamma_mean > 0");

  // Gamma parameterized by mean/variance: shape = m^2/v, scale = v/m.
  const double gvar = s.gamma_var - s.rho_latent;
  const double shape = s.gamma_mean * s.gamma_mean / gvar;
  const double scale = gvar / s.gamma_mean;
  const double sqrho = std::sqrt(s.rho_latent);
  const double m12 = s.gamma_mean * s.gamma_mean + s.rho_latent;  // E[X1*X2]

  auto rng = make_engine(seed);
  std::normal_distribution<double> nd;
  std::gamma_distribution<double> gd(shape, scale);

  LogLinearDrawStats stats;
  Vector x1(n), x2(n), zl(n);
  std::size_t filled = 0;
  while (filled < n) {
    ++stats.proposed;
    const double z = nd(rng);
    const double a = gd(rng) + sqrho * z;
    const double b = gd(rng) + sqrho * z;
    if (a <= 0.0 || b <= 0.0) {
      ++stats.rejected;
      continue;
    }
    x1[filled] = a;
    x2[filled] = b;
    zl[filled] = z;
    ++filled;
  }
  const double sd_dn = std::sqrt(s.sigma_d2 - s.rho_latent);
  const double sd_eps = std::sqrt(s.sigma_eps2);
  Vector d(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = sd_dn * nd(rng) + sqrho * zl[i] + s.first_stage_delta * (x1[i] * x2[i] - m12);
    y[i] = d[i] + s.pi1 * std::log(x1[i]) + s.pi2 * std::log(x2[i]) + sd_eps * nd(rng);
  }
  if (out)
    *out = Dataset::make(std::move(y), std::move(d), Matrix::from_columns({x1, x2}), std::nullopt,
                         {"x1", "x2"});
  return stats;
}

Dataset simulate(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 10) throw InvalidSpecError("simulate needs n >= 10");
  struct Visitor {
    std::size_t n;
    std::uint64_t seed;
    Dataset operator()(const LinearInteractionSpec& s) const {
      s.sigma.validate();
      return simulate_linear(s, n, seed);
    }
    Dataset operator()(const AdversarialSpec& s) const {
      s.sigma.validate();
      return simulate_adversarial(s, n, seed);
    }
    Dataset operator()(const ProbitSpec& s) const {
      return simulate_index(s, IndexOutcome::Probit, n, seed);
    }
    Dataset operator()(const ExponentialSpec& s) const {
      return simulate_index(s, IndexOutcome::Expon, n, seed);
    }
    Dataset operator()(const LogitSpec& s) const {
      return simulate_index(s, IndexOutcome::Logit, n, seed);
    }
    Dataset operator()(const LogLinearSpec& s) const {
      Dataset out;
      simulate_loglinear_stats(s, n, seed, &out);
      return out;
    }
    Dataset operator()(const ExcludedInstrumentSpec& s) const {
      return simulate_excluded(s, n, seed);
    }
  };
  return std::visit(Visitor{n, seed}, spec);
}

AdversarialModel fit_adversarial(double /*theta*/, double rho_target, const Vector& pi,
                                 const InstrumentSpec& instrument, const Dataset& pilot) {
  const Vector f = build_instrument(instrument, pilot);
  const Matrix c1 = with_intercept(pilot.x);
  const Vector coeffs = solve_least_squares(c1, f);
  Vector f_perp = f;
  const Vector fit = matvec(c1, coeffs);
  for (std::size_t i = 0; i < f_perp.size(); ++i) f_perp[i] -= fit[i];

  AdversarialModel model;
  model.pi = pi;
  model.projection_coeffs = coeffs;
  model.var_fperp = sample_var(f_perp);
  model.cov_dfperp = sample_cov(pilot.d, f_perp);
  if (model.var_fperp <= kSaturationTol * sample_var(f))
    throw UnidentifiedError("adversarial pilot: instrument is degenerate");
  model.conditioning_warning =
      std::abs(model.cov_dfperp) < kConditioningTol * sample_sd(pilot.d) * sample_sd(f_perp);
  // Sign places the estimand at theta - rho_target: the IV shift equals
  // g_rho * var(f_perp) / cov(d, f_perp).
  model.g_rho = -rho_target * model.cov_dfperp / model.var_fperp;
  return model;
}

DgpSpec prepare_dgp(const DgpSpec& spec) {
  if (!std::holds_alternative<AdversarialSpec>(spec)) return spec;
  AdversarialSpec s = std::get<AdversarialSpec>(spec);
  if (s.g_rho) return s;
  LinearInteractionSpec pilot_spec;
  pilot_spec.alpha = s.alpha;
  pilot_spec.theta = s.theta;
  pilot_spec.pi1 = s.pi.size() > 0 ? s.pi[0] : 1.0;
  pilot_spec.pi2 = s.pi.size() > 1 ? s.pi[1] : 1.0;
  pilot_spec.rho_interact = 0.0;
  pilot_spec.first_stage_delta = s.first_stage_delta;
  pilot_spec.sigma = s.sigma;
  const Dataset pilot = simulate(DgpSpec{pilot_spec}, s.pilot_n, s.pilot_seed);
  const AdversarialModel model =
      fit_adversarial(s.theta, s.rho_target, s.pi, s.instrument, pilot);
  s.g_rho = model.g_rho;
  return s;
}

double average_partial_effect(const DgpSpec& spec, std::size_t draws, std::uint64_t seed) {
  struct Visitor {
    std::size_t draws;
    std::uint64_t seed;

    template <typename SpecT>
    double index_mean(const SpecT& s, double (*gprime)(double)) const {
      if (s.alpha1 == 0.0)
        throw InvalidSpecError("alpha1 is unset; run calibration before the APE");
      auto rng = make_engine(seed);
      const MvnBlock b = draw_mvn_block(s.sigma, draws, rng);
      double acc = 0.0;
      for (std::size_t i = 0; i < draws; ++i)
        acc += s.alpha1 * gprime(s.alpha0 + s.alpha1 * b.d_lat[i] + b.x1[i] + b.x2[i]);
      return acc / static_cast<double>(draws);
    }

    double operator()(const LinearInteractionSpec& s) const { return s.theta; }
    double operator()(const AdversarialSpec& s) const { return s.theta; }
    double operator()(const ProbitSpec& s) const {
      return index_mean(s, +[](double w) {
        return std::exp(-0.5 * w * w) / std::sqrt(2.0 * 3.14159265358979323846);
      });
    }
    double operator()(const ExponentialSpec& s) const {
      return index_mean(s, +[](double w) { return std::exp(w); });
    }
    double operator()(const LogitSpec& s) const {
      return index_mean(s, +[](double w) {
        const double p = logistic(w);
        return p * (1.0 - p);
      });
    }
    double operator()(const LogLinearSpec&) const { return 1.0; }
    double operator()(const ExcludedInstrumentSpec& s) const { return s.theta; }
  };
  return std::visit(Visitor{draws, seed}, spec);
}

}  // namespace ivforge
