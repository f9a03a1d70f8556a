#pragma once

#include "hyperrnn/config.hpp"
#include "hyperrnn/networks/networks.hpp"
#include "hyperrnn/numerics/tensor.hpp"

#include <vector>

namespace hyperrnn::training {

/// ||h_hat - h||^2 / ||h||^2. Throws DomainError when h is zero.
double nmse(const ComplexMatrix& estimate, const ComplexMatrix& truth);

/// 10 log10(x); 0 maps to -infinity, which CSV writers print as "-inf".
double to_db(double linear);

struct NmseReport {
  std::vector<double> linear;  // per slot, mean of per-sample ratios
  std::vector<double> db;
  std::vector<double> stderr_db;  // delta-method standard error, per slot
  int frames = 0;
  int excluded = 0;  // samples with a zero channel
};

/// Monte-Carlo NMSE per slot over `frames` fresh frames and noise. Fully
/// determined by (model, cfg, frames, seed).
NmseReport evaluate(const networks::Model& model, const ExperimentConfig& cfg, int frames,
                    std::uint64_t seed);

}  // namespace hyperrnn::training
