#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hyperrnn {

/// Layer widths of every learnable block.
struct NetworkShape {
  std::vector<int> quantizer_hidden{1024, 512, 256};
  int estimator_hidden = 256;
  int hypernet_hidden = 1024;
  std::vector<int> baseline_hidden{1024, 512, 256};

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct TrainConfig {
  int batch = 1024;
  int iterations = 50000;
  double lr_initial = 1e-3;
  double lr_final = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Evaluate NMSE every this many iterations (0 disables periodic evaluation).
  int eval_every = 0;
  int eval_frames = 10000;
  /// 1-based slot at which sweeps report NMSE.
  int eval_slot = 8;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Full description of one experiment point. Defaults are the paper-scale
/// simulation parameters; desk_scale() shrinks them for a workstation.
struct ExperimentConfig {
  double carrier_ul = 3e9;       // Hz
  double carrier_offset = 1e8;   // Hz, f_dl = f_ul + offset
  double speed = 30.0 / 3.6;     // m/s
  double slot_duration = 1e-4;   // s
  int paths = 8;
  int antennas = 64;
  int feedback_bits = 20;
  int pilots_dl = 2;
  int pilots_ul = 2;
  double snr_db = 10.0;
  int slots = 8;
  /// Forces both fading correlations (e.g. 0 for i.i.d. slots).
  std::optional<double> rho_override;
  double power_ul = 1.0;
  double power_dl = 1.0;
  std::uint64_t seed = 1;

  NetworkShape network;
  TrainConfig train;

  double carrier_dl() const { return carrier_ul + carrier_offset; }
  /// Throws DomainError naming the first invalid field.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

enum class Scale { kDesk, kPaper };

Scale parse_scale(const std::string& s);
std::string to_string(Scale s);

/// Workstation-sized variant of `cfg`: M=16, batch 256, 3000 iterations,
/// 1e4 evaluation frames and narrower layers. System parameters other than
/// M are left untouched.
ExperimentConfig desk_scale(ExperimentConfig cfg);
ExperimentConfig paper_scale(ExperimentConfig cfg);
ExperimentConfig apply_scale(const ExperimentConfig& cfg, Scale s);

std::string to_json(const ExperimentConfig& cfg);
/// Missing keys keep their values from `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base = {});
void save_config(const std::string& path, const ExperimentConfig& cfg);

}  // namespace hyperrnn
