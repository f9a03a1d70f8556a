#pragma once

#include "hyperrnn/config.hpp"
#include "hyperrnn/networks/checkpoint.hpp"
#include "hyperrnn/networks/networks.hpp"
#include "hyperrnn/training/evaluation.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

// Experiment grids: NMSE against feedback bits for several uplink pilot
// lengths (i.i.d. slots), and NMSE against path count (Doppler-correlated
// slots). Each grid point trains a fresh model and evaluates it at the
// configured slot.

namespace hyperrnn::experiment {

struct SweepRow {
  ExperimentConfig point;
  networks::Variant variant = networks::Variant::kHyperRnn;
  double nmse_db = 0.0;
  std::vector<double> nmse_db_per_slot;
  double runtime_s = 0.0;
  std::string checkpoint;
  bool completed = false;
  std::string error;
};

struct TrendCheck {
  std::string name;
  bool passed = false;
  /// Required checks decide the exit status; the others are only reported.
  bool required = true;
  std::string detail;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrendCheck> checks;

  bool all_completed() const;
  bool all_required_passed() const;
  /// Row for (variant, B, L_ul, P); nullptr when absent. L_ul is ignored for
  /// the baseline.
  const SweepRow* find(networks::Variant v, int bits, int pilots_ul, int paths) const;
};

struct SweepOptions {
  /// Directory for checkpoints and the CSV; empty keeps everything in memory.
  std::string out_dir;
  std::function<void(const std::string&)> log;
};

inline constexpr const char* kSweepCsvHeader =
    "variant,B,L_ul,L_dl,P,M,snr_db,rho_ul,rho_dl,t,nmse_db,seed";

/// Trains and evaluates one point. Divergence is recorded in the row, not
/// thrown.
SweepRow run_point(const ExperimentConfig& cfg, networks::Variant variant,
                   const SweepOptions& options);

/// HyperRNN for every (B, L_ul) and the baseline for every B, rho forced to 0.
SweepResult run_fig4_sweep(const ExperimentConfig& base, std::span<const int> b_values,
                           std::span<const int> lul_values, const SweepOptions& options);

/// Both variants for every P, with Doppler-derived correlation.
SweepResult run_fig5_sweep(const ExperimentConfig& base, std::span<const int> p_values,
                           const SweepOptions& options);

/// Per-slot NMSE of a stored model over `frames` fresh frames (seed from
/// cfg). Throws IncompatibleCheckpointError on a shape mismatch.
training::NmseReport evaluate_checkpoint(const networks::Checkpoint& ckpt,
                                         const ExperimentConfig& cfg, int frames);

std::string csv_row(const SweepRow& row);
void write_sweep_csv(const std::string& path, const SweepResult& result);
/// Rows in the fixed schema, one per slot, for an evaluation report.
void write_eval_csv(const std::string& path, const ExperimentConfig& cfg, networks::Variant variant,
                    const training::NmseReport& report);

}  // namespace hyperrnn::experiment
