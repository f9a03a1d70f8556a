#pragma once

#include "hyperrnn/config.hpp"
#include "hyperrnn/numerics/autodiff.hpp"
#include "hyperrnn/numerics/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

// Learnable blocks of both estimators.
//
// Parameter containers are templated on their storage: Matrix for the stored
// model, ad::Var for graph leaves during a training step. Weights are
// (out x in) and biases (out x 1).
//
// HyperRNN, per slot t:
//   hypernet   s_H = relu(W_A^H c2r(vec Y_ul) + W_C^H s_H' + b_A^H)
//              w   = W_B^H s_H + b_B^H,  w = [w_A (B), w_B (l_E), w_C (l_E)]
//   estimator  s_E = relu(Wb_A diag(w_A) q + Wb_C diag(w_C) s_E' + b_A^E)
//              c2r(h_hat) = Wb_B diag(w_B) s_E + b_B^E
// Baseline: stateless ReLU MLP from the B feedback bits to 2M outputs.

namespace hyperrnn::networks {

enum class Variant { kHyperRnn, kBaseline };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

enum class FeedbackMode { kTrain, kEval };

template <typename T>
struct DenseLayer {
  T weight;
  T bias;
};

template <typename T>
struct QuantizerParamsT {
  std::vector<DenseLayer<T>> layers;
};

template <typename T>
struct EstimatorRnnParamsT {
  T base_a;  // l_E x B
  T base_b;  // 2M x l_E
  T base_c;  // l_E x l_E
  T bias_a;  // l_E x 1
  T bias_b;  // 2M x 1
};

template <typename T>
struct HypernetParamsT {
  T weight_a;  // l_H x 2 M L_ul
  T weight_b;  // (B + 2 l_E) x l_H
  T weight_c;  // l_H x l_H
  T bias_a;    // l_H x 1
  T bias_b;    // (B + 2 l_E) x 1
};

template <typename T>
struct BaselineEstimatorParamsT {
  std::vector<DenseLayer<T>> layers;
};

/// Everything trained end to end, pilots included. Blocks a variant does not
/// use stay empty and are skipped by for_each_parameter.
template <typename T>
struct ModelT {
  Variant variant = Variant::kHyperRnn;
  T pilots_ul;  // 2 x L_ul, hyperrnn only
  T pilots_dl;  // 2M x L_dl
  QuantizerParamsT<T> quantizer;
  HypernetParamsT<T> hypernet;
  EstimatorRnnParamsT<T> estimator;
  BaselineEstimatorParamsT<T> baseline;
};

using QuantizerParams = QuantizerParamsT<Matrix>;
using EstimatorRnnParams = EstimatorRnnParamsT<Matrix>;
using HypernetParams = HypernetParamsT<Matrix>;
using BaselineEstimatorParams = BaselineEstimatorParamsT<Matrix>;
using Model = ModelT<Matrix>;
using ModelGraph = ModelT<ad::Var>;

/// Visits (name, tensor) in a fixed order. Names are "<group>/<field>", with
/// groups pilots, quantizer, hypernet, estimator, baseline.
template <typename M, typename F>
void for_each_parameter(M& model, F&& f) {
  const bool hyper = model.variant == Variant::kHyperRnn;
  if (hyper) f(std::string("pilots/uplink"), model.pilots_ul);
  f(std::string("pilots/downlink"), model.pilots_dl);
  auto dense = [&f](const std::string& prefix, auto& layers) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
      f(prefix + "/layer" + std::to_string(i) + "/weight", layers[i].weight);
      f(prefix + "/layer" + std::to_string(i) + "/bias", layers[i].bias);
    }
  };
  dense("quantizer", model.quantizer.layers);
  if (hyper) {
    f(std::string("hypernet/weight_a"), model.hypernet.weight_a);
    f(std::string("hypernet/weight_b"), model.hypernet.weight_b);
    f(std::string("hypernet/weight_c"), model.hypernet.weight_c);
    f(std::string("hypernet/bias_a"), model.hypernet.bias_a);
    f(std::string("hypernet/bias_b"), model.hypernet.bias_b);
    f(std::string("estimator/base_a"), model.estimator.base_a);
    f(std::string("estimator/base_b"), model.estimator.base_b);
    f(std::string("estimator/base_c"), model.estimator.base_c);
    f(std::string("estimator/bias_a"), model.estimator.bias_a);
    f(std::string("estimator/bias_b"), model.estimator.bias_b);
  } else {
    dense("baseline", model.baseline.layers);
  }
}

/// Freshly initialised model: zero biases (except b_B^H = 1), uniform weights
/// with variance 2/fan_in feeding a ReLU and 1/fan_in otherwise, recurrent
/// matrices scaled by 0.9, pilots drawn and projected onto the budgets.
Model init_model(const ExperimentConfig& cfg, Variant variant, std::uint64_t seed);

/// Throws DimensionError if any parameter shape disagrees with `cfg`.
void check_shapes(const Model& model, const ExperimentConfig& cfg);

std::size_t parameter_count(const Model& model);

// ---- single-sample evaluation -------------------------------------------

/// B feedback values in {-1, +1}.
Vector quantize_feedback(const ComplexMatrix& y_dl, const QuantizerParams& params);

struct HypernetStep {
  Vector omega;
  Vector state;
};
HypernetStep hypernetwork_step(const ComplexMatrix& y_ul, const Vector& state,
                               const HypernetParams& params);

struct OmegaParts {
  Vector a;
  Vector b;
  Vector c;
};
OmegaParts split_omega(const Vector& omega, Eigen::Index bits, Eigen::Index hidden);

/// base * diag(omega): column j scaled by omega_j.
Matrix modulate(const Matrix& base, const Vector& omega);

struct EstimateStep {
  ComplexMatrix estimate;  // M x 1
  Vector state;
};
EstimateStep estimate_step(const Vector& q, const Vector& state, const EstimatorRnnParams& params,
                           const Vector& omega);

ComplexMatrix baseline_estimate(const Vector& q, const BaselineEstimatorParams& params);

// ---- batched graph builders (one sample per column) ---------------------

using FeedbackActivation = std::function<ad::Var(const ad::Var&)>;

/// Leaves for every parameter; `trainable` selects parameter vs constant.
ModelGraph bind(const Model& model, bool trainable);

/// c2r(y_dl) batch (2 L_dl x N) to feedback (B x N). Train mode uses the
/// straight-through sign unless `activation` overrides the last layer's
/// nonlinearity; eval mode emits a gradient-free sign.
ad::Var quantizer_forward(const ad::Var& y_dl, const QuantizerParamsT<ad::Var>& params,
                          FeedbackMode mode, const FeedbackActivation& activation = nullptr);

struct HypernetGraphStep {
  ad::Var omega;
  ad::Var state;
};
HypernetGraphStep hypernetwork_forward(const ad::Var& y_ul, const ad::Var& state,
                                       const HypernetParamsT<ad::Var>& params);

struct EstimatorGraphStep {
  ad::Var estimate;  // 2M x N, real-stacked
  ad::Var state;
};
/// Uses W diag(w) x = W (w .* x), so per-sample modulation stays a GEMM.
EstimatorGraphStep estimator_forward(const ad::Var& q, const ad::Var& state,
                                     const EstimatorRnnParamsT<ad::Var>& params,
                                     const ad::Var& omega);

ad::Var baseline_forward(const ad::Var& q, const BaselineEstimatorParamsT<ad::Var>& params);

}  // namespace hyperrnn::networks
