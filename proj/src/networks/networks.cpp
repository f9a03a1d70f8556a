#include "hyperrnn/networks/networks.hpp"

#include "hyperrnn/airlink/airlink.hpp"
#include "hyperrnn/numerics/rng.hpp"

#include <cmath>

namespace hyperrnn::networks {

std::string to_string(Variant v) { return v == Variant::kHyperRnn ? "hyperrnn" : "baseline"; }

Variant parse_variant(const std::string& s) {
  if (s == "hyperrnn") return Variant::kHyperRnn;
  if (s == "baseline" || s == "dl-dnn") return Variant::kBaseline;
  throw DomainError("unknown variant '" + s + "' (expected hyperrnn|baseline)");
}

namespace {

enum class Feeds { kRelu, kLinear };

Matrix uniform_weight(Eigen::Index out, Eigen::Index in, Feeds feeds, double extra, Rng& rng) {
  const double variance = (feeds == Feeds::kRelu ? 2.0 : 1.0) / static_cast<double>(in);
  const double bound = extra * std::sqrt(3.0 * variance);
  Matrix w(out, in);
  for (Eigen::Index c = 0; c < in; ++c)
    for (Eigen::Index r = 0; r < out; ++r) w(r, c) = rng.uniform(-bound, bound);
  return w;
}

std::vector<DenseLayer<Matrix>> mlp(const std::vector<int>& widths, Feeds last, Rng& rng) {
  std::vector<DenseLayer<Matrix>> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool is_last = i + 2 == widths.size();
    layers.push_back({uniform_weight(widths[i + 1], widths[i], is_last ? last : Feeds::kRelu, 1.0, rng),
                      Matrix::Zero(widths[i + 1], 1)});
  }
  return layers;
}

std::vector<int> quantizer_widths(const ExperimentConfig& cfg) {
  std::vector<int> w{2 * cfg.pilots_dl};
  w.insert(w.end(), cfg.network.quantizer_hidden.begin(), cfg.network.quantizer_hidden.end());
  w.push_back(cfg.feedback_bits);
  return w;
}

std::vector<int> baseline_widths(const ExperimentConfig& cfg) {
  std::vector<int> w{cfg.feedback_bits};
  w.insert(w.end(), cfg.network.baseline_hidden.begin(), cfg.network.baseline_hidden.end());
  w.push_back(2 * cfg.antennas);
  return w;
}

void check_mlp(const std::vector<DenseLayer<Matrix>>& layers, const std::vector<int>& widths,
               const std::string& name) {
  require_dims(layers.size() + 1 == widths.size(), name + ": layer count mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    require_dims(layers[i].weight.rows() == widths[i + 1] && layers[i].weight.cols() == widths[i] &&
                     layers[i].bias.rows() == widths[i + 1] && layers[i].bias.cols() == 1,
                 name + ": layer " + std::to_string(i) + " shape mismatch");
  }
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  require_dims(m.rows() == rows && m.cols() == cols, std::string(name) + ": shape mismatch");
}

Vector dense(const DenseLayer<Matrix>& layer, const Vector& x) {
  require_dims(layer.weight.cols() == x.size(), "dense layer: input width mismatch");
  return layer.weight * x + layer.bias.col(0);
}

}  // namespace

constexpr double kOmegaHeadScale = 0.1;

Model init_model(const ExperimentConfig& cfg, Variant variant, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed, 0);
  Model m;
  m.variant = variant;
  {
    Rng pilot_rng(seed, 1);
    const auto pilots = airlink::random_pilots(cfg.antennas, cfg.pilots_ul, cfg.pilots_dl,
                                               cfg.power_ul, cfg.power_dl, pilot_rng);
    if (variant == Variant::kHyperRnn) m.pilots_ul = airlink::stack_uplink(pilots.uplink);
    m.pilots_dl = airlink::stack_downlink(pilots.downlink);
  }
  m.quantizer.layers = mlp(quantizer_widths(cfg), Feeds::kLinear, rng);
  if (variant == Variant::kHyperRnn) {
    const int bits = cfg.feedback_bits;
    const int le = cfg.network.estimator_hidden;
    const int lh = cfg.network.hypernet_hidden;
    const int in_h = 2 * cfg.antennas * cfg.pilots_ul;
    const int out_h = bits + 2 * le;
    m.hypernet.weight_a = uniform_weight(lh, in_h, Feeds::kRelu, 1.0, rng);
    // Small omega head: with b_B = 1 the modulation starts close to all-ones.
    m.hypernet.weight_b = uniform_weight(out_h, lh, Feeds::kLinear, kOmegaHeadScale, rng);
    m.hypernet.weight_c = uniform_weight(lh, lh, Feeds::kLinear, 0.9, rng);
    m.hypernet.bias_a = Matrix::Zero(lh, 1);
    m.hypernet.bias_b = Matrix::Ones(out_h, 1);
    m.estimator.base_a = uniform_weight(le, bits, Feeds::kRelu, 1.0, rng);
    m.estimator.base_b = uniform_weight(2 * cfg.antennas, le, Feeds::kLinear, 1.0, rng);
    m.estimator.base_c = uniform_weight(le, le, Feeds::kLinear, 0.9, rng);
    m.estimator.bias_a = Matrix::Zero(le, 1);
    m.estimator.bias_b = Matrix::Zero(2 * cfg.antennas, 1);
  } else {
    m.baseline.layers = mlp(baseline_widths(cfg), Feeds::kLinear, rng);
  }
  return m;
}

void check_shapes(const Model& m, const ExperimentConfig& cfg) {
  check_shape(m.pilots_dl, 2 * cfg.antennas, cfg.pilots_dl, "pilots/downlink");
  check_mlp(m.quantizer.layers, quantizer_widths(cfg), "quantizer");
  if (m.variant == Variant::kHyperRnn) {
    const int bits = cfg.feedback_bits;
    const int le = cfg.network.estimator_hidden;
    const int lh = cfg.network.hypernet_hidden;
    check_shape(m.pilots_ul, 2, cfg.pilots_ul, "pilots/uplink");
    check_shape(m.hypernet.weight_a, lh, 2 * cfg.antennas * cfg.pilots_ul, "hypernet/weight_a");
    check_shape(m.hypernet.weight_b, bits + 2 * le, lh, "hypernet/weight_b");
    check_shape(m.hypernet.weight_c, lh, lh, "hypernet/weight_c");
    check_shape(m.hypernet.bias_a, lh, 1, "hypernet/bias_a");
    check_shape(m.hypernet.bias_b, bits + 2 * le, 1, "hypernet/bias_b");
    check_shape(m.estimator.base_a, le, bits, "estimator/base_a");
    check_shape(m.estimator.base_b, 2 * cfg.antennas, le, "estimator/base_b");
    check_shape(m.estimator.base_c, le, le, "estimator/base_c");
    check_shape(m.estimator.bias_a, le, 1, "estimator/bias_a");
    check_shape(m.estimator.bias_b, 2 * cfg.antennas, 1, "estimator/bias_b");
  } else {
    check_mlp(m.baseline.layers, baseline_widths(cfg), "baseline");
  }
}

std::size_t parameter_count(const Model& model) {
  std::size_t n = 0;
  for_each_parameter(model, [&n](const std::string&, const Matrix& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

// ---- single sample --------------------------------------------------------

Vector quantize_feedback(const ComplexMatrix& y_dl, const QuantizerParams& params) {
  require_dims(y_dl.rows() == 1, "quantize_feedback: y_dl must be 1 x L_dl");
  require_dims(!params.layers.empty(), "quantize_feedback: empty quantizer");
  Vector x = c2r_vector(y_dl);
  for (std::size_t i = 0; i + 1 < params.layers.size(); ++i) x = dense(params.layers[i], x).cwiseMax(0.0);
  const Vector u = dense(params.layers.back(), x);
  return (u.array() >= 0.0).select(Vector::Ones(u.size()), -1.0);
}

HypernetStep hypernetwork_step(const ComplexMatrix& y_ul, const Vector& state,
                               const HypernetParams& p) {
  const Vector input = c2r_vector(y_ul);
  require_dims(p.weight_a.cols() == input.size(), "hypernetwork_step: uplink input width mismatch");
  require_dims(p.weight_c.cols() == state.size(), "hypernetwork_step: state length mismatch");
  HypernetStep out;
  out.state = (p.weight_a * input + p.weight_c * state + p.bias_a.col(0)).cwiseMax(0.0);
  out.omega = p.weight_b * out.state + p.bias_b.col(0);
  return out;
}

OmegaParts split_omega(const Vector& omega, Eigen::Index bits, Eigen::Index hidden) {
  require_dims(omega.size() == bits + 2 * hidden, "split_omega: length must be B + 2 l_E");
  return {omega.head(bits), omega.segment(bits, hidden), omega.tail(hidden)};
}

Matrix modulate(const Matrix& base, const Vector& omega) {
  require_dims(omega.size() == base.cols(), "modulate: omega length must equal column count");
  return base * omega.asDiagonal();
}

EstimateStep estimate_step(const Vector& q, const Vector& state, const EstimatorRnnParams& p,
                           const Vector& omega) {
  const Eigen::Index hidden = p.base_c.rows();
  const auto parts = split_omega(omega, p.base_a.cols(), hidden);
  require_dims(q.size() == p.base_a.cols(), "estimate_step: feedback length mismatch");
  require_dims(state.size() == hidden, "estimate_step: state length mismatch");
  const Matrix wa = modulate(p.base_a, parts.a);
  const Matrix wb = modulate(p.base_b, parts.b);
  const Matrix wc = modulate(p.base_c, parts.c);
  EstimateStep out;
  out.state = (wa * q + wc * state + p.bias_a.col(0)).cwiseMax(0.0);
  const Vector h = wb * out.state + p.bias_b.col(0);
  out.estimate = r2c(std::span<const double>(h.data(), static_cast<std::size_t>(h.size())), h.size() / 2, 1);
  return out;
}

ComplexMatrix baseline_estimate(const Vector& q, const BaselineEstimatorParams& params) {
  require_dims(!params.layers.empty(), "baseline_estimate: empty network");
  Vector x = q;
  for (std::size_t i = 0; i + 1 < params.layers.size(); ++i) x = dense(params.layers[i], x).cwiseMax(0.0);
  const Vector h = dense(params.layers.back(), x);
  return r2c(std::span<const double>(h.data(), static_cast<std::size_t>(h.size())), h.size() / 2, 1);
}

// ---- graph ----------------------------------------------------------------

ModelGraph bind(const Model& model, bool trainable) {
  ModelGraph g;
  g.variant = model.variant;
  auto leaf = [trainable](const Matrix& m, const std::string& name) {
    return trainable ? ad::parameter(m, name) : ad::constant(m, name);
  };
  auto bind_layers = [&leaf](const auto& src, auto& dst, const std::string& prefix) {
    for (std::size_t i = 0; i < src.size(); ++i)
      dst.push_back({leaf(src[i].weight, prefix + "/layer" + std::to_string(i) + "/weight"),
                     leaf(src[i].bias, prefix + "/layer" + std::to_string(i) + "/bias")});
  };
  g.pilots_dl = leaf(model.pilots_dl, "pilots/downlink");
  bind_layers(model.quantizer.layers, g.quantizer.layers, "quantizer");
  if (model.variant == Variant::kHyperRnn) {
    g.pilots_ul = leaf(model.pilots_ul, "pilots/uplink");
    const auto& h = model.hypernet;
    g.hypernet = {leaf(h.weight_a, "hypernet/weight_a"), leaf(h.weight_b, "hypernet/weight_b"),
                  leaf(h.weight_c, "hypernet/weight_c"), leaf(h.bias_a, "hypernet/bias_a"),
                  leaf(h.bias_b, "hypernet/bias_b")};
    const auto& e = model.estimator;
    g.estimator = {leaf(e.base_a, "estimator/base_a"), leaf(e.base_b, "estimator/base_b"),
                   leaf(e.base_c, "estimator/base_c"), leaf(e.bias_a, "estimator/bias_a"),
                   leaf(e.bias_b, "estimator/bias_b")};
  } else {
    bind_layers(model.baseline.layers, g.baseline.layers, "baseline");
  }
  return g;
}

namespace {

ad::Var dense(const DenseLayer<ad::Var>& layer, const ad::Var& x) {
  return ad::add_bias(ad::matmul(layer.weight, x), layer.bias);
}

ad::Var eval_sign(const ad::Var& u) {
  return ad::constant((u->value().array() >= 0.0).select(Matrix::Ones(u->rows(), u->cols()), -1.0));
}

}  // namespace

ad::Var quantizer_forward(const ad::Var& y_dl, const QuantizerParamsT<ad::Var>& params,
                          FeedbackMode mode, const FeedbackActivation& activation) {
  require_dims(!params.layers.empty(), "quantizer_forward: empty quantizer");
  require_dims(params.layers.front().weight->cols() == y_dl->rows(),
               "quantizer_forward: input width must be 2 L_dl");
  ad::Var x = y_dl;
  for (std::size_t i = 0; i + 1 < params.layers.size(); ++i) x = ad::relu(dense(params.layers[i], x));
  const ad::Var u = dense(params.layers.back(), x);
  ad::Var q;
  if (mode == FeedbackMode::kEval) {
    q = eval_sign(u);
  } else {
    q = activation ? activation(u) : ad::sign_ste(u);
  }
  q->set_label("q_dl");
  return q;
}

HypernetGraphStep hypernetwork_forward(const ad::Var& y_ul, const ad::Var& state,
                                       const HypernetParamsT<ad::Var>& p) {
  require_dims(p.weight_a->cols() == y_ul->rows(), "hypernetwork_forward: uplink width mismatch");
  const ad::Var pre = ad::add(ad::matmul(p.weight_a, y_ul), ad::matmul(p.weight_c, state));
  const ad::Var s = ad::relu(ad::add_bias(pre, p.bias_a));
  return {ad::add_bias(ad::matmul(p.weight_b, s), p.bias_b), s};
}

EstimatorGraphStep estimator_forward(const ad::Var& q, const ad::Var& state,
                                     const EstimatorRnnParamsT<ad::Var>& p, const ad::Var& omega) {
  const Eigen::Index bits = p.base_a->cols();
  const Eigen::Index hidden = p.base_c->rows();
  require_dims(omega->rows() == bits + 2 * hidden, "estimator_forward: omega length must be B + 2 l_E");
  require_dims(q->rows() == bits, "estimator_forward: feedback length mismatch");
  const ad::Var w_a = ad::rows(omega, 0, bits);
  const ad::Var w_b = ad::rows(omega, bits, hidden);
  const ad::Var w_c = ad::rows(omega, bits + hidden, hidden);
  const ad::Var pre = ad::add(ad::matmul(p.base_a, ad::mul(w_a, q)),
                              ad::matmul(p.base_c, ad::mul(w_c, state)));
  const ad::Var s = ad::relu(ad::add_bias(pre, p.bias_a));
  const ad::Var h = ad::add_bias(ad::matmul(p.base_b, ad::mul(w_b, s)), p.bias_b);
  return {h, s};
}

ad::Var baseline_forward(const ad::Var& q, const BaselineEstimatorParamsT<ad::Var>& params) {
  require_dims(!params.layers.empty(), "baseline_forward: empty network");
  require_dims(params.layers.front().weight->cols() == q->rows(), "baseline_forward: feedback length mismatch");
  ad::Var x = q;
  for (std::size_t i = 0; i + 1 < params.layers.size(); ++i) x = ad::relu(dense(params.layers[i], x));
  return dense(params.layers.back(), x);
}

}  // namespace hyperrnn::networks
