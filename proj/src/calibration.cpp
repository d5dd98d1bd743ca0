#include "ivforge/calibration.hpp"

#include <cmath>

namespace ivforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gprime(CalibModel m, double w) {
  switch (m) {
    case CalibModel::Probit:
      return std::exp(-0.5 * w * w) / std::sqrt(2.0 * kPi);
    case CalibModel::Exponential:
      return std::exp(w);
    case CalibModel::Logit: {
      const double p = 1.0 / (1.0 + std::exp(-w));
      return p * (1.0 - p);
    }
    case CalibModel::LinearIdentity:
      return 1.0;
  }
  return 0.0;
}

}  // namespace

std::pair<Vector, Vector> gauss_hermite(std::size_t n) {
  if (n < 2) throw InvalidSpecError("gauss_hermite needs n >= 2");
  Vector x(n), w(n);
  const double eps = 1e-14;
  const std::size_t m = (n + 1) / 2;
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    // Standard initial guesses, then Newton on the normalized recurrence.
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];

    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0 / std::sqrt(std::sqrt(kPi));
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= eps) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  return {x, w};
}

const char* calib_model_name(CalibModel m) {
  switch (m) {
    case CalibModel::Probit: return "probit";
    case CalibModel::Exponential: return "exponential";
    case CalibModel::Logit: return "logit";
    case CalibModel::LinearIdentity: return "linear_identity";
  }
  return "?";
}

double expected_gprime(CalibModel model, double w_variance, std::size_t quad_nodes,
                       double w_mean) {
  if (w_variance <= 0.0) throw InvalidSpecError("expected_gprime needs positive variance");
  if (model == CalibModel::LinearIdentity) return 1.0;
  const auto [nodes, weights] = gauss_hermite(quad_nodes);
  const double scale = std::sqrt(2.0 * w_variance);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    acc += weights[i] * gprime(model, w_mean + scale * nodes[i]);
  return acc / std::sqrt(kPi);
}

void CalibrationProblem::validate() const {
  if (var_quad_a <= 0.0 || var_const_c < 0.0)
    throw InvalidSpecError("index variance coefficients must satisfy a > 0, c >= 0");
  if (!(bracket_lo > 0.0) || !(bracket_hi > bracket_lo))
    throw InvalidSpecError("calibration bracket must be positive and ordered");
  if (tolerance <= 0.0) throw InvalidSpecError("calibration tolerance must be positive");
}

CalibrationProblem CalibrationProblem::for_dgp(const DgpSpec& spec) {
  struct Visitor {
    CalibrationProblem operator()(const ProbitSpec& s) const { return from(s, CalibModel::Probit); }
    CalibrationProblem operator()(const ExponentialSpec& s) const {
      return from(s, CalibModel::Exponential);
    }
    CalibrationProblem operator()(const LogitSpec& s) const { return from(s, CalibModel::Logit); }
    CalibrationProblem operator()(const LinearInteractionSpec&) const { return linear(); }
    CalibrationProblem operator()(const AdversarialSpec&) const { return linear(); }
    CalibrationProblem operator()(const LogLinearSpec&) const { return linear(); }
    CalibrationProblem operator()(const ExcludedInstrumentSpec&) const { return linear(); }

    static CalibrationProblem linear() {
      CalibrationProblem p;
      p.model = CalibModel::LinearIdentity;
      return p;
    }

    template <typename SpecT>
    static CalibrationProblem from(const SpecT& s, CalibModel m) {
      // Index I = alpha0 + alpha1*Dlat + X1 + X2 under the latent block:
      // Var = alpha1^2 sd2 + alpha1 * 2(cov(D,X1)+cov(D,X2)) + Var(X1+X2).
      CalibrationProblem p;
      p.model = m;
      p.var_quad_a = s.sigma.sigma_d2;
      p.var_lin_b = 4.0 * s.sigma.rho_pair;
      p.var_const_c = s.sigma.sigma_x12 + s.sigma.sigma_x22 + 2.0 * s.sigma.rho_pair;
      p.w_mean = s.alpha0;
      return p;
    }
  };
  return std::visit(Visitor{}, spec);
}

CalibrationResult calibrate_alpha(const CalibrationProblem& problem) {
  problem.validate();
  const auto r = [&](double a1) {
    return a1 * expected_gprime(problem.model, problem.index_variance(a1), problem.quad_nodes,
                                problem.w_mean) -
           1.0;
  };

  double lo = problem.bracket_lo;
  double hi = problem.bracket_hi;
  double rlo = r(lo);
  double rhi = r(hi);
  while (rlo * rhi > 0.0 && hi < kBracketMax) {
    hi = std::min(hi * 2.0, kBracketMax);
    rhi = r(hi);
  }
  if (rlo * rhi > 0.0) throw NoRootError(lo, hi);

  CalibrationResult out;
  double mid = 0.5 * (lo + hi);
  for (std::size_t it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double rm = r(mid);
    ++out.iterations;
    if (std::abs(rm) < problem.tolerance) break;
    if (rlo * rm > 0.0) {
      lo = mid;
      rlo = rm;
    } else {
      hi = mid;
    }
  }
  out.alpha1 = mid;
  out.residual = std::abs(r(mid));
  return out;
}

DgpSpec with_calibrated_alpha(const DgpSpec& spec) {
  struct Visitor {
    DgpSpec operator()(ProbitSpec s) const { return set(s); }
    DgpSpec operator()(ExponentialSpec s) const { return set(s); }
    DgpSpec operator()(LogitSpec s) const { return set(s); }
    DgpSpec operator()(LinearInteractionSpec s) const { return s; }
    DgpSpec operator()(AdversarialSpec s) const { return s; }
    DgpSpec operator()(LogLinearSpec s) const { return s; }
    DgpSpec operator()(ExcludedInstrumentSpec s) const { return s; }

    template <typename SpecT>
    static DgpSpec set(SpecT s) {
      const CalibrationResult res = calibrate_alpha(CalibrationProblem::for_dgp(DgpSpec{s}));
      s.alpha1 = res.alpha1;
      return s;
    }
  };
  return std::visit(Visitor{}, spec);
}

}  // namespace ivforge
