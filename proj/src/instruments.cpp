#include "ivforge/instruments.hpp"

#include <algorithm>
#include <cmath>

namespace ivforge {

const char* transform_name(TransformId h) {
  switch (h) {
    case TransformId::Identity: return "identity";
    case TransformId::CenteredExp: return "centered_exp";
    case TransformId::Log1p: return "log1p";
    case TransformId::TanhRatio: return "tanh_ratio";
  }
  return "?";
}

InstrumentSpec InstrumentSpec::product(std::size_t i, std::size_t j) {
  InstrumentSpec s;
  s.kind = Kind::Product;
  s.i = i;
  s.j = j;
  return s;
}

InstrumentSpec InstrumentSpec::transform(TransformId h, std::vector<std::size_t> columns,
                                         Combiner combiner) {
  InstrumentSpec s;
  s.kind = Kind::Transform;
  s.h = h;
  s.columns = std::move(columns);
  s.combiner = combiner;
  return s;
}

InstrumentSpec InstrumentSpec::excluded_column(std::size_t z_index) {
  InstrumentSpec s;
  s.kind = Kind::ExcludedColumn;
  s.z_index = z_index;
  return s;
}

void InstrumentSpec::validate(std::size_t n_covariates, std::size_t n_excluded) const {
  switch (kind) {
    case Kind::Product:
      if (i == j) throw InvalidSpecError("product instrument needs two distinct covariates");
      if (i >= n_covariates) throw IndexOutOfRangeError("covariate", i, n_covariates);
      if (j >= n_covariates) throw IndexOutOfRangeError("covariate", j, n_covariates);
      break;
    case Kind::Transform:
      if (columns.empty()) throw InvalidSpecError("transform instrument needs columns");
      for (std::size_t c : columns)
        if (c >= n_covariates) throw IndexOutOfRangeError("covariate", c, n_covariates);
      break;
    case Kind::ExcludedColumn:
      if (n_excluded == 0) throw MissingExcludedError();
      if (z_index >= n_excluded) throw IndexOutOfRangeError("excluded column", z_index, n_excluded);
      break;
  }
}

Vector build_instrument(const InstrumentSpec& spec, const Dataset& ds) {
  spec.validate(ds.n_covariates(), ds.z ? ds.z->cols() : 0);
  const std::size_t n = ds.n();
  Vector f(n);
  switch (spec.kind) {
    case InstrumentSpec::Kind::Product:
      for (std::size_t r = 0; r < n; ++r) f[r] = ds.x(r, spec.i) * ds.x(r, spec.j);
      return f;
    case InstrumentSpec::Kind::Transform: {
      std::vector<Vector> cols;
      for (std::size_t c : spec.columns) cols.push_back(ds.x.col(c));
      const Matrix transformed = apply_transform(spec.h, Matrix::from_columns(cols));
      for (std::size_t r = 0; r < n; ++r) {
        double acc = spec.combiner == Combiner::Product ? 1.0 : 0.0;
        for (std::size_t c = 0; c < transformed.cols(); ++c) {
          if (spec.combiner == Combiner::Product)
            acc *= transformed(r, c);
          else
            acc += transformed(r, c);
        }
        f[r] = acc;
      }
      return f;
    }
    case InstrumentSpec::Kind::ExcludedColumn:
      return ds.z->col(spec.z_index);
  }
  throw InvalidSpecError("unknown instrument kind");
}

Matrix apply_transform(TransformId h, const Matrix& x) {
  if (h == TransformId::Identity) return x;
  Matrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    if (h == TransformId::CenteredExp) {
      for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
      mean /= static_cast<double>(x.rows());
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      switch (h) {
        case TransformId::CenteredExp:
          out(i, j) = std::exp(v - mean);
          break;
        case TransformId::Log1p:
          if (v <= -1.0) throw DomainError("log1p", i, j);
          out(i, j) = std::log1p(v);
          break;
        case TransformId::TanhRatio: {
          // Evaluated exactly as the four-exponential ratio; the clamp keeps
          // the numerator finite (the denominator may saturate to +inf, which
          // yields the correct limit 0).
          const double w = std::clamp(v, -300.0, 300.0);
          out(i, j) = (2.0 * std::exp(2.0 * w) - 2.0 * std::exp(-2.0 * w)) /
                      (2.5 * std::exp(2.5 * w) + 2.5 * std::exp(-2.5 * w));
          break;
        }
        case TransformId::Identity:
          out(i, j) = v;
          break;
      }
    }
  }
  return out;
}

SaturationCheck check_saturation(const Vector& f, const Matrix& x) {
  SaturationCheck out;
  out.var_f = sample_var(f);
  const Vector fp = residualize(f, with_intercept(x));
  out.var_fperp = sample_var(fp);
  out.degenerate = out.var_fperp <= kSaturationTol * out.var_f;
  return out;
}

RelevanceCheck check_relevance(const Vector& d, const Vector& f_perp) {
  RelevanceCheck out;
  out.cov_dfperp = sample_cov(d, f_perp);

  // First stage d on (1, f_perp) with an HC1 variance for the slope.
  const std::size_t n = d.size();
  const double mf = sample_mean(f_perp);
  const double md = sample_mean(d);
  double sxx = 0.0;
  for (double v : f_perp) sxx += (v - mf) * (v - mf);
  if (sxx == 0.0) {
    out.first_stage_f = 0.0;
    return out;
  }
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (f_perp[i] - mf) * (d[i] - md);
  const double slope = sxy / sxx;
  const double intercept = md - slope * mf;
  double meat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = d[i] - intercept - slope * f_perp[i];
    const double xc = f_perp[i] - mf;
    meat += xc * xc * e * e;
  }
  const double hc1 = static_cast<double>(n) / static_cast<double>(n - 2);
  const double var_slope = hc1 * meat / (sxx * sxx);
  if (var_slope <= 0.0) {
    out.first_stage_f = kFirstStageFCap;
    return out;
  }
  out.first_stage_f = std::min(slope * slope / var_slope, kFirstStageFCap);
  return out;
}

}  // namespace ivforge
