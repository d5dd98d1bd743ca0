#include "ivforge/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "ivforge/config_json.hpp"
#include "ivforge/rng.hpp"

namespace ivforge {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Linear interpolation between closest ranks (the common "type 7" rule).
double percentile(Vector sorted, double p) {
  if (sorted.empty()) return 0.0;
  if (sorted.size() == 1) return sorted.front();
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<std::size_t>(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

SimulationReport run_grid_point(const ExperimentConfig& cfg, const DgpSpec& prepared,
                                std::uint64_t grid_index) {
  SimulationReport report;
  report.per_rep_all.assign(cfg.replications, std::nullopt);

  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    const std::uint64_t seed = mix_seed(cfg.master_seed, r, grid_index);
    const Dataset ds = simulate(prepared, cfg.n_per_rep, seed);
    try {
      const IvEstimate est = tsls(ds, cfg.instrument, cfg.transform);
      report.per_rep_all[r] = est.theta_hat;
    } catch (const UnidentifiedError&) {
    } catch (const RankDeficientError&) {
    }
  });

  for (const auto& v : report.per_rep_all) {
    if (v)
      report.per_rep_theta.push_back(*v);
    else
      ++report.unidentified_count;
  }
  if (report.per_rep_theta.empty()) throw AllUnidentifiedError();

  report.mean_theta = sample_mean(report.per_rep_theta);
  report.rep_sd = report.per_rep_theta.size() > 1 ? sample_sd(report.per_rep_theta) : 0.0;
  report.mc_se = report.rep_sd / std::sqrt(static_cast<double>(report.per_rep_theta.size()));
  Vector sorted = report.per_rep_theta;
  std::sort(sorted.begin(), sorted.end());
  report.percentile_ci95 = {percentile(sorted, 0.025), percentile(sorted, 0.975)};
  report.rejects_truth = cfg.truth_theta < report.percentile_ci95.first ||
                         cfg.truth_theta > report.percentile_ci95.second;
  if (100 * report.unidentified_count > cfg.replications)
    report.warnings.push_back("more than 1% of replications were unidentified");
  return report;
}

DgpSpec with_rho(const DgpSpec& spec, double rho) {
  if (std::holds_alternative<LinearInteractionSpec>(spec)) {
    auto s = std::get<LinearInteractionSpec>(spec);
    s.rho_interact = rho;
    return s;
  }
  if (std::holds_alternative<ExcludedInstrumentSpec>(spec)) {
    auto s = std::get<ExcludedInstrumentSpec>(spec);
    s.rho_interact = rho;
    return s;
  }
  throw InvalidSpecError("bias_sweep needs a linear_interaction or excluded_instrument dgp");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (replications < 2) throw InvalidSpecError("replications must be >= 2");
  if (n_per_rep < 50) throw InvalidSpecError("n_per_rep must be >= 50");
  if (rho_grid) {
    if (rho_grid->empty()) throw InvalidSpecError("rho_grid must be non-empty");
    for (double r : *rho_grid)
      if (!std::isfinite(r)) throw InvalidSpecError("rho_grid must be finite");
  }
}

SimulationReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const DgpSpec prepared = prepare_dgp(cfg.dgp);
  return run_grid_point(cfg, prepared, 0);
}

std::vector<SweepRow> bias_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.rho_grid) throw InvalidSpecError("bias_sweep needs a rho_grid");
  std::vector<SweepRow> rows;
  for (std::size_t gi = 0; gi < cfg.rho_grid->size(); ++gi) {
    const double rho = (*cfg.rho_grid)[gi];
    ExperimentConfig point = cfg;
    point.dgp = with_rho(cfg.dgp, rho);
    const DgpSpec prepared = prepare_dgp(point.dgp);
    rows.push_back({rho, run_grid_point(point, prepared, gi)});
  }
  return rows;
}

AuditTable transform_audit(const Dataset& ds, const InstrumentSpec& spec,
                           const std::vector<TransformId>& transforms, bool standardize) {
  AuditTable table;
  std::optional<double> linear_se;
  for (TransformId h : transforms) {
    AuditRow row;
    row.transform = h;
    try {
      const IvEstimate est = tsls(ds, spec, h);
      row.ok = true;
      row.theta = est.theta_hat;
      row.se = est.se_robust;
      row.ci_lo = est.ci95.first;
      row.ci_hi = est.ci95.second;
      row.first_stage_f = est.first_stage_f;
      if (h == TransformId::Identity) linear_se = est.se_robust;
    } catch (const DomainError& e) {
      row.error = e.what();
    } catch (const UnidentifiedError& e) {
      row.error = e.what();
    } catch (const RankDeficientError& e) {
      row.error = e.what();
    }
    table.rows.push_back(row);
  }
  if (standardize) {
    if (linear_se && *linear_se > 0.0) {
      table.standardized = true;
      table.divisor = *linear_se;
      for (auto& row : table.rows) {
        if (!row.ok) continue;
        row.theta /= table.divisor;
        row.se /= table.divisor;
        row.ci_lo /= table.divisor;
        row.ci_hi /= table.divisor;
      }
    } else {
      table.warnings.push_back(
          "standardization requested but the identity row is missing or failed");
    }
  }
  return table;
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "rho,rep,theta_hat,identified\n";
  for (const auto& row : rows) {
    for (std::size_t r = 0; r < row.report.per_rep_all.size(); ++r) {
      const auto& v = row.report.per_rep_all[r];
      out << fmt17(row.rho) << ',' << r << ',' << (v ? fmt17(*v) : "nan") << ','
          << (v ? 1 : 0) << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_sweep_json(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                     const std::string& path) {
  Json doc;
  doc["config"] = experiment_to_json(cfg);
  Json jrows = Json::array();
  for (const auto& row : rows) {
    Json jr;
    jr["rho"] = row.rho;
    jr["summary"] = report_summary_json(row.report);
    jr["per_rep_theta"] = row.report.per_rep_theta;
    jrows.push_back(jr);
  }
  doc["rows"] = jrows;
  write_json_file(doc, path);
}

void emit_sweep_svg(const std::vector<SweepRow>& rows, double truth_theta,
                    const std::string& path) {
  double xmin = 1e300, xmax = -1e300, ymin = truth_theta, ymax = truth_theta;
  for (const auto& row : rows) {
    xmin = std::min(xmin, row.rho);
    xmax = std::max(xmax, row.rho);
    for (double t : row.report.per_rep_theta) {
      ymin = std::min(ymin, t);
      ymax = std::max(ymax, t);
    }
  }
  if (xmin > xmax) throw InvalidSpecError("svg needs at least one sweep row");
  if (xmin == xmax) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  const double ypad = (ymax - ymin) * 0.05 + 1e-9;
  ymin -= ypad;
  ymax += ypad;

  const double w = 640.0, h = 480.0, ml = 50.0, mr = 15.0, mt = 15.0, mb = 35.0;
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\">\n";
  out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out << "<line x1=\"" << fmt2(ml) << "\" y1=\"" << fmt2(h - mb) << "\" x2=\"" << fmt2(w - mr)
      << "\" y2=\"" << fmt2(h - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt2(ml) << "\" y1=\"" << fmt2(mt) << "\" x2=\"" << fmt2(ml)
      << "\" y2=\"" << fmt2(h - mb) << "\" stroke=\"black\"/>\n";
  for (const auto& row : rows)
    for (double t : row.report.per_rep_theta)
      out << "<circle cx=\"" << fmt2(px(row.rho)) << "\" cy=\"" << fmt2(py(t))
          << "\" r=\"1.5\" fill=\"steelblue\" fill-opacity=\"0.35\"/>\n";
  out << "<line x1=\"" << fmt2(ml) << "\" y1=\"" << fmt2(py(truth_theta)) << "\" x2=\""
      << fmt2(w - mr) << "\" y2=\"" << fmt2(py(truth_theta))
      << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  out << "</svg>\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_report_csv(const ExperimentConfig& cfg, const SimulationReport& report,
                     const std::string& path) {
  double rho = 0.0;
  if (std::holds_alternative<LinearInteractionSpec>(cfg.dgp))
    rho = std::get<LinearInteractionSpec>(cfg.dgp).rho_interact;
  else if (std::holds_alternative<ExcludedInstrumentSpec>(cfg.dgp))
    rho = std::get<ExcludedInstrumentSpec>(cfg.dgp).rho_interact;
  emit_sweep_csv({{rho, report}}, path);
}

void emit_report_json(const ExperimentConfig& cfg, const SimulationReport& report,
                      const std::string& path) {
  write_json_file(report_to_json(cfg, report), path);
}

void emit_audit_csv(const AuditTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "transform,ok,theta,se,ci_lo,ci_hi,first_stage_f,error\n";
  for (const auto& row : table.rows) {
    out << transform_name(row.transform) << ',' << (row.ok ? 1 : 0) << ',';
    if (row.ok)
      out << fmt17(row.theta) << ',' << fmt17(row.se) << ',' << fmt17(row.ci_lo) << ','
          << fmt17(row.ci_hi) << ',' << fmt17(row.first_stage_f) << ',';
    else
      out << ",,,,,\"" << row.error << '"';
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_audit_json(const AuditTable& table, const std::string& path) {
  write_json_file(audit_to_json(table), path);
}

}  // namespace ivforge
