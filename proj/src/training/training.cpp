#include "hyperrnn/training/training.hpp"

#include "hyperrnn/training/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace hyperrnn::training {

using networks::Model;
using networks::ModelGraph;
using networks::Variant;

TrainingDivergedError::TrainingDivergedError(int iteration, double loss)
    : std::runtime_error("training diverged at iteration " + std::to_string(iteration) +
                         " (loss " + std::to_string(loss) + ")"),
      iteration_(iteration) {}

LearningRateSchedule::LearningRateSchedule(double initial, double final, int iterations)
    : initial_(initial), ratio_(final / initial), iterations_(iterations) {
  if (!(initial > 0.0) || !(final > 0.0) || iterations < 1)
    throw DomainError("LearningRateSchedule: rates must be positive and iterations >= 1");
}

double LearningRateSchedule::at(int iteration) const {
  if (iterations_ == 1) return initial_;
  const double frac = static_cast<double>(std::clamp(iteration, 0, iterations_ - 1)) / (iterations_ - 1);
  return initial_ * std::pow(ratio_, frac);
}

Adam::Adam(double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

void Adam::step(Model& model, const ModelGraph& graph, double lr) {
  std::vector<Matrix*> params;
  std::vector<const ad::Var*> leaves;
  networks::for_each_parameter(model, [&params](const std::string&, Matrix& m) { params.push_back(&m); });
  networks::for_each_parameter(graph, [&leaves](const std::string&, const ad::Var& v) { leaves.push_back(&v); });
  require_dims(params.size() == leaves.size(), "Adam::step: model and graph differ");
  if (first_.empty()) {
    for (const Matrix* p : params) {
      first_.push_back(Matrix::Zero(p->rows(), p->cols()));
      second_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, steps_);
  const double c2 = 1.0 - std::pow(beta2_, steps_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = (*leaves[i])->grad();
    first_[i] = beta1_ * first_[i] + (1.0 - beta1_) * g;
    second_[i] = beta2_ * second_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    params[i]->array() -=
        lr * (first_[i].array() / c1) / ((second_[i].array() / c2).sqrt() + epsilon_);
  }
}

namespace {

Batch empty_batch(const ExperimentConfig& cfg, int size) {
  Batch b;
  b.size = size;
  const int m2 = 2 * cfg.antennas;
  for (int t = 0; t < cfg.slots; ++t) {
    b.h_ul.emplace_back(m2, size);
    b.h_dl.emplace_back(m2, size);
    b.noise_ul.emplace_back(m2 * cfg.pilots_ul, size);
    b.noise_dl.emplace_back(2 * cfg.pilots_dl, size);
  }
  return b;
}

void fill_sample(Batch& b, int n, const channel::MultipathFrame& frame, const ExperimentConfig& cfg,
                 const channel::CarrierGeometry& ul, const channel::CarrierGeometry& dl, Rng& rng) {
  require_dims(frame.slots == cfg.slots, "batch: frame slot count differs from config");
  const Matrix hu = channel::stacked_channels(frame, channel::Link::kUplink, ul);
  const Matrix hd = channel::stacked_channels(frame, channel::Link::kDownlink, dl);
  const double var_ul = airlink::snr_to_sigma(cfg.snr_db, cfg.power_ul);
  const double var_dl = airlink::snr_to_sigma(cfg.snr_db, cfg.power_dl);
  for (int t = 0; t < cfg.slots; ++t) {
    b.h_ul[t].col(n) = hu.col(t);
    b.h_dl[t].col(n) = hd.col(t);
    airlink::fill_noise(b.noise_ul[t].col(n), var_ul, rng);
    airlink::fill_noise(b.noise_dl[t].col(n), var_dl, rng);
  }
}

// Training reallocates the same large activation buffers every iteration.
// glibc serves those through mmap by default, and the page faults dominate
// system time, so keep them on the heap instead.
void keep_buffers_on_heap() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    mallopt(M_TOP_PAD, 64 << 20);
    return true;
  }();
  (void)once;
#endif
}

inline std::uint64_t sample_stream(std::uint64_t batch_index, int n) {
  return (batch_index << 32) | static_cast<std::uint32_t>(n);
}

}  // namespace

Batch sample_batch(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t batch_index,
                   int size) {
  Batch b = empty_batch(cfg, size);
  const auto ul = channel::link_geometry(cfg, channel::Link::kUplink);
  const auto dl = channel::link_geometry(cfg, channel::Link::kDownlink);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < size; ++n) {
    Rng rng(seed, sample_stream(batch_index, n));
    const auto frame = channel::sample_frame(cfg, rng);
    fill_sample(b, n, frame, cfg, ul, dl, rng);
  }
  return b;
}

Batch batch_from_frames(const ExperimentConfig& cfg, std::span<const channel::MultipathFrame> frames,
                        std::uint64_t seed, std::uint64_t batch_index, int size) {
  require_dims(!frames.empty(), "batch_from_frames: empty dataset");
  Batch b = empty_batch(cfg, size);
  const auto ul = channel::link_geometry(cfg, channel::Link::kUplink);
  const auto dl = channel::link_geometry(cfg, channel::Link::kDownlink);
#pragma omp parallel for schedule(static)
  for (int n = 0; n < size; ++n) {
    Rng rng(seed, sample_stream(batch_index, n));
    const std::size_t idx = (batch_index * static_cast<std::uint64_t>(size) + n) % frames.size();
    fill_sample(b, n, frames[idx], cfg, ul, dl, rng);
  }
  return b;
}

Unrolled unrolled_forward(const ModelGraph& graph, const Batch& batch, const ExperimentConfig& cfg,
                          const ForwardOptions& options) {
  const bool hyper = graph.variant == Variant::kHyperRnn;
  const int n = batch.size;
  require_dims(static_cast<int>(batch.h_dl.size()) == cfg.slots, "unrolled_forward: batch slot count");

  const ad::Var dl_op = airlink::downlink_operator(graph.pilots_dl);
  ad::Var ul_op, hyper_state, est_state;
  if (hyper) {
    ul_op = airlink::uplink_operator(graph.pilots_ul, cfg.antennas);
    hyper_state = ad::constant(Matrix::Zero(graph.hypernet.weight_c->rows(), n), "s_H0");
    est_state = ad::constant(Matrix::Zero(graph.estimator.base_c->rows(), n), "s_E0");
  }

  Unrolled out;
  ad::Var total;
  for (int t = 0; t < cfg.slots; ++t) {
    const ad::Var h_dl = ad::constant(batch.h_dl[t], "h_dl");
    ad::Var omega;
    if (hyper) {
      const ad::Var h_ul = ad::constant(batch.h_ul[t], "h_ul");
      ad::Var y_ul = ad::add(ad::matmul(ul_op, h_ul), ad::constant(batch.noise_ul[t], "n_ul"));
      y_ul->set_label("Y_ul");
      auto hs = networks::hypernetwork_forward(y_ul, hyper_state, graph.hypernet);
      hyper_state = hs.state;
      omega = hs.omega;
    }
    ad::Var y_dl = ad::add(ad::matmul(dl_op, h_dl), ad::constant(batch.noise_dl[t], "n_dl"));
    y_dl->set_label("y_dl");
    const ad::Var q = networks::quantizer_forward(y_dl, graph.quantizer, options.mode, options.activation);
    ad::Var estimate;
    if (hyper) {
      auto es = networks::estimator_forward(q, est_state, graph.estimator, omega);
      est_state = es.state;
      estimate = es.estimate;
    } else {
      estimate = networks::baseline_forward(q, graph.baseline);
    }
    estimate->set_label("h_hat");
    out.estimates.push_back(estimate);
    const ad::Var term = ad::sum_squares(ad::sub(estimate, h_dl));
    total = total ? ad::add(total, term) : term;
  }
  out.loss = ad::scale(total, 1.0 / n);
  return out;
}

double frame_loss(const channel::MultipathFrame& frame, const Model& model,
                  const ExperimentConfig& cfg, airlink::NoiseModel noise, Rng& rng) {
  if (!(noise.variance >= 0.0)) throw DomainError("frame_loss: negative noise variance");
  Batch b = empty_batch(cfg, 1);
  const auto ul = channel::link_geometry(cfg, channel::Link::kUplink);
  const auto dl = channel::link_geometry(cfg, channel::Link::kDownlink);
  const Matrix hu = channel::stacked_channels(frame, channel::Link::kUplink, ul);
  const Matrix hd = channel::stacked_channels(frame, channel::Link::kDownlink, dl);
  for (int t = 0; t < cfg.slots; ++t) {
    b.h_ul[t].col(0) = hu.col(t);
    b.h_dl[t].col(0) = hd.col(t);
    airlink::fill_noise(b.noise_ul[t], noise.variance, rng);
    airlink::fill_noise(b.noise_dl[t], noise.variance, rng);
  }
  const auto graph = networks::bind(model, false);
  return unrolled_forward(graph, b, cfg, {networks::FeedbackMode::kEval, nullptr}).loss->value()(0, 0);
}

TrainResult train(const ExperimentConfig& cfg, Variant variant, const TrainOptions& options) {
  cfg.validate();
  keep_buffers_on_heap();
  TrainResult result{options.initial ? *options.initial
                                     : networks::init_model(cfg, variant, mix_seed(cfg.seed, kInitTag)),
                     {}};
  Model& model = result.model;
  require_dims(model.variant == variant, "train: initial model has a different variant");
  networks::check_shapes(model, cfg);

  const auto& tc = cfg.train;
  const LearningRateSchedule schedule(tc.lr_initial, tc.lr_final, tc.iterations);
  Adam adam(tc.beta1, tc.beta2, tc.epsilon);
  const std::uint64_t batch_seed = mix_seed(cfg.seed, kTrainTag);
  result.history.loss.reserve(static_cast<std::size_t>(tc.iterations));
  result.history.lr.reserve(static_cast<std::size_t>(tc.iterations));

  for (int it = 0; it < tc.iterations; ++it) {
    const double lr = schedule.at(it);
    const Batch batch = options.dataset.empty()
                            ? sample_batch(cfg, batch_seed, static_cast<std::uint64_t>(it), tc.batch)
                            : batch_from_frames(cfg, options.dataset, batch_seed,
                                                static_cast<std::uint64_t>(it), tc.batch);
    const ModelGraph graph = networks::bind(model, true);
    const Unrolled un = unrolled_forward(graph, batch, cfg);
    const double loss = un.loss->value()(0, 0);
    if (!std::isfinite(loss)) throw TrainingDivergedError(it, loss);
    ad::backward(un.loss);
    adam.step(model, graph, lr);
    if (variant == Variant::kHyperRnn) airlink::project_stacked_uplink(model.pilots_ul, cfg.power_ul);
    airlink::project_stacked_downlink(model.pilots_dl, cfg.power_dl);

    result.history.loss.push_back(loss);
    result.history.lr.push_back(lr);
    if (tc.eval_every > 0 && ((it + 1) % tc.eval_every == 0 || it + 1 == tc.iterations)) {
      const auto report = evaluate(model, cfg, tc.eval_frames, cfg.seed);
      result.history.evals.push_back({it, report.db});
    }
    if (options.progress) options.progress(it, loss);
  }
  return result;
}

void write_history_csv(const std::string& path, const TrainHistory& history, int eval_slot) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history " + path);
  out << "iteration,loss,lr,nmse_db\n";
  std::size_t next_eval = 0;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < history.loss.size(); ++i) {
    out << i << ',' << history.loss[i] << ',' << history.lr[i] << ',';
    if (next_eval < history.evals.size() && history.evals[next_eval].iteration == static_cast<int>(i)) {
      out << history.evals[next_eval].nmse_db.at(static_cast<std::size_t>(eval_slot - 1));
      ++next_eval;
    }
    out << '\n';
  }
}

}  // namespace hyperrnn::training
