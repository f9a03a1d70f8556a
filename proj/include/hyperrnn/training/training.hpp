#pragma once

#include "hyperrnn/airlink/airlink.hpp"
#include "hyperrnn/channel/channel.hpp"
#include "hyperrnn/config.hpp"
#include "hyperrnn/networks/networks.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperrnn::training {

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(int iteration, double loss);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

// Purpose tags mixed into the experiment seed so that initialisation,
// training batches and evaluation never share a random stream.
inline constexpr std::uint64_t kInitTag = 1;
inline constexpr std::uint64_t kTrainTag = 2;
inline constexpr std::uint64_t kEvalTag = 3;

/// Exponential decay from `initial` at iteration 0 to `final` at the last
/// iteration.
class LearningRateSchedule {
 public:
  LearningRateSchedule(double initial, double final, int iterations);
  double at(int iteration) const;

 private:
  double initial_;
  double ratio_;
  int iterations_;
};

class Adam {
 public:
  Adam(double beta1, double beta2, double epsilon);

  /// Applies one update to `model` using the gradients collected on the
  /// leaves of `graph` (which must have been bound from `model`).
  void step(networks::Model& model, const networks::ModelGraph& graph, double lr);
  int steps() const { return steps_; }

 private:
  double beta1_, beta2_, epsilon_;
  int steps_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

/// One mini-batch of frames, already realised per slot. Column n of every
/// matrix belongs to sample n.
struct Batch {
  int size = 0;
  std::vector<Matrix> h_ul;      // per slot, 2M x N
  std::vector<Matrix> h_dl;      // per slot, 2M x N
  std::vector<Matrix> noise_ul;  // per slot, 2 M L_ul x N
  std::vector<Matrix> noise_dl;  // per slot, 2 L_dl x N
};

/// Fresh frames and noise. Sample n of batch b uses stream (b << 32 | n) of
/// `seed`, so results do not depend on the thread count.
Batch sample_batch(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t batch_index,
                   int size);

/// Frames taken cyclically from `frames` with fresh noise.
Batch batch_from_frames(const ExperimentConfig& cfg, std::span<const channel::MultipathFrame> frames,
                        std::uint64_t seed, std::uint64_t batch_index, int size);

struct ForwardOptions {
  networks::FeedbackMode mode = networks::FeedbackMode::kTrain;
  /// Replaces the quantizer's output nonlinearity in train mode.
  networks::FeedbackActivation activation;
};

struct Unrolled {
  ad::Var loss;                     // (1/N) sum_t ||h_hat_t - h_t||^2
  std::vector<ad::Var> estimates;   // per slot, 2M x N
};

/// Runs all T slots: uplink pilots -> hypernetwork -> downlink pilots ->
/// quantizer -> estimator, carrying recurrent state from zero.
Unrolled unrolled_forward(const networks::ModelGraph& graph, const Batch& batch,
                          const ExperimentConfig& cfg, const ForwardOptions& options = {});

/// sum_t ||h_hat_t - h_t||^2 for a single frame with noise drawn from `rng`.
double frame_loss(const channel::MultipathFrame& frame, const networks::Model& model,
                  const ExperimentConfig& cfg, airlink::NoiseModel noise, Rng& rng);

struct EvalRecord {
  int iteration;
  std::vector<double> nmse_db;  // per slot
};

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> lr;
  std::vector<EvalRecord> evals;
};

struct TrainOptions {
  /// Fixed training set; fresh frames every iteration when empty.
  std::span<const channel::MultipathFrame> dataset;
  /// Start from this model instead of a fresh initialisation.
  std::optional<networks::Model> initial;
  /// Called after every iteration with (iteration, loss).
  std::function<void(int, double)> progress;
};

struct TrainResult {
  networks::Model model;
  TrainHistory history;
};

/// Adam on all parameters of `variant`, with the pilots re-projected onto
/// their power budgets after every step. Throws TrainingDivergedError on a
/// non-finite loss.
TrainResult train(const ExperimentConfig& cfg, networks::Variant variant,
                  const TrainOptions& options = {});

/// CSV columns: iteration,loss,lr,nmse_db (nmse at cfg eval slot, blank when
/// not evaluated at that iteration).
void write_history_csv(const std::string& path, const TrainHistory& history, int eval_slot);

}  // namespace hyperrnn::training
