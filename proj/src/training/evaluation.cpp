#include "hyperrnn/training/evaluation.hpp"

#include "hyperrnn/training/training.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace hyperrnn::training {

double nmse(const ComplexMatrix& estimate, const ComplexMatrix& truth) {
  require_dims(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(),
               "nmse: estimate and channel shapes differ");
  const double power = truth.squared_norm();
  if (!(power > 0.0)) throw DomainError("nmse: zero channel");
  const double err = (estimate.re - truth.re).squaredNorm() + (estimate.im - truth.im).squaredNorm();
  return err / power;
}

double to_db(double linear) {
  if (linear == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

NmseReport evaluate(const networks::Model& model, const ExperimentConfig& cfg, int frames,
                    std::uint64_t seed) {
  if (frames < 1) throw DomainError("evaluate: need at least one frame");
  networks::check_shapes(model, cfg);
  constexpr int kChunk = 1000;
  const std::uint64_t eval_seed = mix_seed(seed, kEvalTag);
  const auto graph = networks::bind(model, false);
  const auto slots = static_cast<std::size_t>(cfg.slots);
  std::vector<double> sum(slots, 0.0), sum_sq(slots, 0.0);
  std::vector<long> count(slots, 0);
  NmseReport report;
  report.frames = frames;

  for (int start = 0, chunk = 0; start < frames; start += kChunk, ++chunk) {
    const int size = std::min(kChunk, frames - start);
    const Batch batch = sample_batch(cfg, eval_seed, static_cast<std::uint64_t>(chunk), size);
    const Unrolled un = unrolled_forward(graph, batch, cfg, {networks::FeedbackMode::kEval, nullptr});
    for (std::size_t t = 0; t < slots; ++t) {
      const Matrix& est = un.estimates[t]->value();
      const Matrix& h = batch.h_dl[t];
      for (int n = 0; n < size; ++n) {
        const double power = h.col(n).squaredNorm();
        if (!(power > 0.0)) {
          ++report.excluded;
          continue;
        }
        const double r = (est.col(n) - h.col(n)).squaredNorm() / power;
        sum[t] += r;
        sum_sq[t] += r * r;
        ++count[t];
      }
    }
  }
  if (report.excluded > 0)
    std::cerr << "warning: " << report.excluded << " zero-channel samples excluded from NMSE\n";

  for (std::size_t t = 0; t < slots; ++t) {
    const double c = static_cast<double>(count[t]);
    const double mean = c > 0 ? sum[t] / c : std::numeric_limits<double>::quiet_NaN();
    const double var = c > 1 ? (sum_sq[t] - c * mean * mean) / (c - 1) : 0.0;
    report.linear.push_back(mean);
    report.db.push_back(to_db(mean));
    report.stderr_db.push_back(mean > 0 ? 10.0 / std::log(10.0) * std::sqrt(std::max(var, 0.0) / c) / mean : 0.0);
  }
  return report;
}

}  // namespace hyperrnn::training
