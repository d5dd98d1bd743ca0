#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ivforge/calibration.hpp"

namespace ivforge {

struct ExperimentConfig {
  DgpSpec dgp = LinearInteractionSpec{};
  InstrumentSpec instrument = InstrumentSpec::product(0, 1);
  TransformId transform = TransformId::Identity;
  std::size_t n_per_rep = 1000;
  std::size_t replications = 200;
  std::uint64_t master_seed = 1;
  std::optional<std::vector<double>> rho_grid;
  double truth_theta = 1.0;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct SimulationReport {
  Vector per_rep_theta;                          // identified replications, rep order
  std::vector<std::optional<double>> per_rep_all;  // one slot per replication
  double mean_theta = 0.0;
  double rep_sd = 0.0;
  double mc_se = 0.0;
  std::pair<double, double> percentile_ci95{0.0, 0.0};
  bool rejects_truth = false;
  std::size_t unidentified_count = 0;
  std::vector<std::string> warnings;
};

SimulationReport run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
  double rho = 0.0;
  SimulationReport report;
};

// One run_experiment per grid value of the interaction coefficient; the seed
// stream mixes in the grid index so rows are independent and order-free.
std::vector<SweepRow> bias_sweep(const ExperimentConfig& cfg);

struct AuditRow {
  TransformId transform = TransformId::Identity;
  bool ok = false;
  std::string error;
  double theta = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double first_stage_f = 0.0;
};

struct AuditTable {
  std::vector<AuditRow> rows;
  bool standardized = false;
  double divisor = 1.0;  // the linear row's robust SE when standardized
  std::vector<std::string> warnings;
};

AuditTable transform_audit(const Dataset& ds, const InstrumentSpec& spec,
                           const std::vector<TransformId>& transforms, bool standardize);

// File emitters; all output is byte-deterministic for a fixed input.
void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
void emit_sweep_json(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows,
                     const std::string& path);
void emit_sweep_svg(const std::vector<SweepRow>& rows, double truth_theta,
                    const std::string& path);
void emit_report_csv(const ExperimentConfig& cfg, const SimulationReport& report,
                     const std::string& path);
void emit_report_json(const ExperimentConfig& cfg, const SimulationReport& report,
                      const std::string& path);
void emit_audit_csv(const AuditTable& table, const std::string& path);
void emit_audit_json(const AuditTable& table, const std::string& path);

}  // namespace ivforge
