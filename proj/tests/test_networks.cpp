#include "hyperrnn/binary_io.hpp"
#include "hyperrnn/networks/checkpoint.hpp"
#include "hyperrnn/networks/networks.hpp"
#include "support/gradcheck.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace hyperrnn;
using namespace hyperrnn::networks;
using testing::random_matrix;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.antennas = 4;
  cfg.paths = 2;
  cfg.feedback_bits = 6;
  cfg.pilots_ul = 2;
  cfg.pilots_dl = 2;
  cfg.slots = 3;
  cfg.network.quantizer_hidden = {10, 8};
  cfg.network.estimator_hidden = 7;
  cfg.network.hypernet_hidden = 9;
  cfg.network.baseline_hidden = {12, 5};
  cfg.train.eval_slot = 3;
  return cfg;
}

ComplexMatrix random_complex(Eigen::Index r, Eigen::Index c, Rng& rng) {
  return {random_matrix(r, c, rng), random_matrix(r, c, rng)};
}

Vector random_bits(int n, Rng& rng) {
  Vector q(n);
  for (int i = 0; i < n; ++i) q(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return q;
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("variant names") {
  CHECK(parse_variant("hyperrnn") == Variant::kHyperRnn);
  CHECK(parse_variant("baseline") == Variant::kBaseline);
  CHECK(parse_variant("dl-dnn") == Variant::kBaseline);
  CHECK(parse_variant(to_string(Variant::kBaseline)) == Variant::kBaseline);
  CHECK_THROWS_AS(parse_variant("lstm"), DomainError);
}

TEST_CASE("initialisation shapes, biases and pilot power") {
  const ExperimentConfig cfg = tiny_config();
  const Model h = init_model(cfg, Variant::kHyperRnn, 1);
  CHECK_NOTHROW(check_shapes(h, cfg));
  CHECK(h.pilots_ul.rows() == 2);
  CHECK(h.pilots_ul.cols() == 2);
  CHECK(h.pilots_dl.rows() == 8);
  CHECK(h.hypernet.weight_a.cols() == 2 * 4 * 2);
  CHECK(h.hypernet.weight_b.rows() == 6 + 2 * 7);
  CHECK(h.estimator.base_b.rows() == 8);
  CHECK(h.hypernet.bias_b == Matrix::Ones(20, 1));
  CHECK(h.hypernet.bias_a.isZero());
  CHECK(h.estimator.bias_a.isZero());
  CHECK(h.estimator.bias_b.isZero());
  for (const auto& l : h.quantizer.layers) CHECK(l.bias.isZero());
  for (Eigen::Index l = 0; l < 2; ++l) {
    CHECK(h.pilots_ul.col(l).squaredNorm() == doctest::Approx(cfg.power_ul));
    CHECK(h.pilots_dl.col(l).squaredNorm() == doctest::Approx(cfg.power_dl));
  }

  const Model b = init_model(cfg, Variant::kBaseline, 1);
  CHECK_NOTHROW(check_shapes(b, cfg));
  CHECK(b.pilots_ul.size() == 0);
  CHECK(b.baseline.layers.size() == 3);
  CHECK(b.baseline.layers.front().weight.cols() == 6);
  CHECK(b.baseline.layers.back().weight.rows() == 8);

  // Downlink pilots 8x2, quantizer 4-10-8-6, baseline 6-12-5-8.
  CHECK(parameter_count(b) == 16 + (40 + 10 + 80 + 8 + 48 + 6) + (72 + 12 + 60 + 5 + 40 + 8));

  ExperimentConfig other = cfg;
  other.feedback_bits = 7;
  CHECK_THROWS_AS(check_shapes(h, other), DimensionError);
}

TEST_CASE("initial weights are uniform with the fan-in variance") {
  ExperimentConfig cfg = tiny_config();
  cfg.network.hypernet_hidden = 400;
  cfg.network.estimator_hidden = 300;
  const Model m = init_model(cfg, Variant::kHyperRnn, 9);
  auto check_uniform = [](const Matrix& w, double variance) {
    const double bound = std::sqrt(3.0 * variance);
    CHECK(w.cwiseAbs().maxCoeff() <= bound);
    CHECK(w.cwiseAbs().maxCoeff() > 0.9 * bound);
    CHECK(w.squaredNorm() / double(w.size()) == doctest::Approx(variance).epsilon(0.05));
  };
  check_uniform(m.hypernet.weight_a, 2.0 / 16);                       // feeds relu
  check_uniform(m.hypernet.weight_b, 0.01 * 1.0 / 400);               // omega head, scaled 0.1
  check_uniform(m.hypernet.weight_c, 0.81 * 1.0 / 400);               // recurrent, scaled 0.9
  check_uniform(m.estimator.base_c, 0.81 * 1.0 / 300);
}

TEST_CASE("initialisation is deterministic in the seed") {
  const ExperimentConfig cfg = tiny_config();
  const Model a = init_model(cfg, Variant::kHyperRnn, 5);
  const Model b = init_model(cfg, Variant::kHyperRnn, 5);
  const Model c = init_model(cfg, Variant::kHyperRnn, 6);
  CHECK(a.hypernet.weight_b == b.hypernet.weight_b);
  CHECK(a.pilots_dl == b.pilots_dl);
  CHECK(a.hypernet.weight_b != c.hypernet.weight_b);
}

TEST_CASE("eval-mode feedback is exactly B values in {-1, +1}") {
  const ExperimentConfig cfg = tiny_config();
  const Model m = init_model(cfg, Variant::kHyperRnn, 2);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vector q = quantize_feedback(random_complex(1, 2, rng), m.quantizer);
    REQUIRE(q.size() == cfg.feedback_bits);
    for (Eigen::Index k = 0; k < q.size(); ++k) CHECK((q(k) == 1.0 || q(k) == -1.0));
  }
  QuantizerParams zero = m.quantizer;
  for (auto& l : zero.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  CHECK(quantize_feedback(random_complex(1, 2, rng), zero) == Vector::Ones(6));
  CHECK_THROWS_AS(quantize_feedback(random_complex(2, 1, rng), m.quantizer), DimensionError);
}

TEST_CASE("modulate scales columns") {
  Rng rng(4);
  const Matrix base = random_matrix(3, 4, rng);
  CHECK(modulate(base, Vector::Ones(4)) == base);
  CHECK(modulate(base, Vector::Zero(4)) == Matrix::Zero(3, 4));
  Vector w(4);
  w << 2, -1, 0.5, 3;
  const Matrix m = modulate(base, w);
  for (int j = 0; j < 4; ++j) CHECK(m.col(j) == base.col(j) * w(j));
  CHECK_THROWS_AS(modulate(base, Vector::Ones(3)), DimensionError);
}

TEST_CASE("split_omega partitions into feedback, output and recurrent scales") {
  Vector w = Vector::LinSpaced(10, 0, 9);
  const auto parts = split_omega(w, 4, 3);
  CHECK(parts.a == w.head(4));
  CHECK(parts.b == w.segment(4, 3));
  CHECK(parts.c == w.tail(3));
  CHECK_THROWS_AS(split_omega(w, 4, 4), DimensionError);
}

TEST_CASE("unit scales reduce the estimator to a plain recurrent step") {
  const ExperimentConfig cfg = tiny_config();
  const Model m = init_model(cfg, Variant::kHyperRnn, 3);
  EstimatorRnnParams p = m.estimator;
  Rng rng(5);
  p.bias_a = random_matrix(7, 1, rng);
  p.bias_b = random_matrix(8, 1, rng);
  const Vector q = random_bits(6, rng);
  const Vector s = random_matrix(7, 1, rng).cwiseAbs();
  const auto step = estimate_step(q, s, p, Vector::Ones(6 + 14));
  const Vector state = (p.base_a * q + p.base_c * s + p.bias_a.col(0)).cwiseMax(0.0);
  const Vector h = p.base_b * state + p.bias_b.col(0);
  CHECK(step.state == state);
  CHECK(c2r_vector(step.estimate) == h);
}

TEST_CASE("hypernetwork step follows its recurrence") {
  const ExperimentConfig cfg = tiny_config();
  Model m = init_model(cfg, Variant::kHyperRnn, 4);
  Rng rng(6);
  m.hypernet.bias_a = random_matrix(9, 1, rng);
  const ComplexMatrix y = random_complex(4, 2, rng);
  const Vector s = random_matrix(9, 1, rng).cwiseAbs();
  const auto out = hypernetwork_step(y, s, m.hypernet);
  const Vector state = (m.hypernet.weight_a * c2r_vector(y) + m.hypernet.weight_c * s + m.hypernet.bias_a.col(0)).cwiseMax(0.0);
  CHECK((out.state - state).norm() < 1e-12);
  CHECK((out.omega - (m.hypernet.weight_b * state + m.hypernet.bias_b.col(0))).norm() < 1e-12);
  CHECK_THROWS_AS(hypernetwork_step(random_complex(4, 1, rng), s, m.hypernet), DimensionError);
}

TEST_CASE("batched graph blocks agree with single-sample evaluation") {
  const ExperimentConfig cfg = tiny_config();
  const Model m = init_model(cfg, Variant::kHyperRnn, 7);
  const Model base = init_model(cfg, Variant::kBaseline, 7);
  const ModelGraph g = bind(m, false);
  const ModelGraph gb = bind(base, false);
  Rng rng(8);
  const int n = 5;
  const Matrix y_dl = random_matrix(4, n, rng);
  const Matrix y_ul = random_matrix(16, n, rng);
  const Matrix s_h = random_matrix(9, n, rng).cwiseAbs();
  const Matrix s_e = random_matrix(7, n, rng).cwiseAbs();

  const ad::Var q = quantizer_forward(ad::constant(y_dl), g.quantizer, FeedbackMode::kEval);
  const auto hs = hypernetwork_forward(ad::constant(y_ul), ad::constant(s_h), g.hypernet);
  const auto es = estimator_forward(q, ad::constant(s_e), g.estimator, hs.omega);
  const ad::Var qb = quantizer_forward(ad::constant(y_dl), gb.quantizer, FeedbackMode::kEval);
  const ad::Var hb = baseline_forward(qb, gb.baseline);

  for (int i = 0; i < n; ++i) {
    const ComplexMatrix ydl = r2c(std::span<const double>(y_dl.col(i).data(), 4), 1, 2);
    const ComplexMatrix yul = r2c(std::span<const double>(y_ul.col(i).data(), 16), 4, 2);
    const Vector qi = quantize_feedback(ydl, m.quantizer);
    CHECK(q->value().col(i) == qi);
    const auto hsi = hypernetwork_step(yul, s_h.col(i), m.hypernet);
    CHECK((hs.omega->value().col(i) - hsi.omega).norm() < 1e-12);
    CHECK((hs.state->value().col(i) - hsi.state).norm() < 1e-12);
    const auto esi = estimate_step(qi, s_e.col(i), m.estimator, hsi.omega);
    CHECK((es.state->value().col(i) - esi.state).norm() < 1e-10);
    CHECK((es.estimate->value().col(i) - c2r_vector(esi.estimate)).norm() < 1e-10);
    const Vector qbi = quantize_feedback(ydl, base.quantizer);
    CHECK((hb->value().col(i) - c2r_vector(baseline_estimate(qbi, base.baseline))).norm() < 1e-12);
  }
}

TEST_CASE("feedback modes: eval is gradient-free, train passes the straight-through gradient") {
  const ExperimentConfig cfg = tiny_config();
  const Model m = init_model(cfg, Variant::kHyperRnn, 9);
  const ModelGraph g = bind(m, true);
  Rng rng(10);
  const ad::Var y = ad::constant(random_matrix(4, 3, rng));
  const ad::Var qe = quantizer_forward(y, g.quantizer, FeedbackMode::kEval);
  CHECK_FALSE(qe->requires_grad());
  CHECK(qe->label() == "q_dl");
  const ad::Var qt = quantizer_forward(y, g.quantizer, FeedbackMode::kTrain);
  CHECK(qt->requires_grad());
  CHECK(qt->value() == qe->value());
  ad::backward(ad::sum(qt));
  CHECK(g.quantizer.layers.back().weight->has_grad());

  const ad::Var qa = quantizer_forward(y, g.quantizer, FeedbackMode::kTrain,
                                       [](const ad::Var& u) { return ad::tanh(u); });
  CHECK(qa->value() != qt->value());
}

TEST_CASE("graph blocks match central differences") {
  const ExperimentConfig cfg = tiny_config();
  const Model m = init_model(cfg, Variant::kHyperRnn, 11);
  Rng rng(12);
  const Matrix y_ul = random_matrix(16, 3, rng);
  const Matrix s_e = random_matrix(7, 3, rng).cwiseAbs();
  const Matrix q = Matrix::NullaryExpr(6, 3, [&] { return rng.uniform() < 0.5 ? -1.0 : 1.0; });
  auto build = [&](const std::vector<ad::Var>& v) {
    HypernetParamsT<ad::Var> hp{v[0], v[1], v[2], v[3], v[4]};
    EstimatorRnnParamsT<ad::Var> ep{v[5], v[6], v[7], v[8], v[9]};
    const auto hs = hypernetwork_forward(ad::constant(y_ul), ad::constant(Matrix::Zero(9, 3)), hp);
    const auto es = estimator_forward(ad::constant(q), ad::constant(s_e), ep, hs.omega);
    return testing::project(es.estimate);
  };
  const auto& h = m.hypernet;
  const auto& e = m.estimator;
  CHECK(testing::max_gradient_error(build, {h.weight_a, h.weight_b, h.weight_c, h.bias_a, h.bias_b,
                                            e.base_a, e.base_b, e.base_c, e.bias_a, e.bias_b}) < 1e-4);
}

TEST_CASE("checkpoint round trip") {
  const ExperimentConfig cfg = tiny_config();
  for (Variant v : {Variant::kHyperRnn, Variant::kBaseline}) {
    const Model m = init_model(cfg, v, 13);
    const auto path = temp_file("hyperrnn_ckpt_test.bin");
    save_checkpoint(path, m, cfg);
    const Checkpoint c = load_checkpoint(path);
    CHECK(c.config == cfg);
    CHECK(c.model.variant == v);
    std::vector<Matrix> before, after;
    for_each_parameter(m, [&](const std::string&, const Matrix& t) { before.push_back(t); });
    for_each_parameter(c.model, [&](const std::string&, const Matrix& t) { after.push_back(t); });
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
    CHECK_NOTHROW(require_compatible(c, cfg));
    ExperimentConfig other = cfg;
    other.antennas = 8;
    CHECK_THROWS_AS(require_compatible(c, other), IncompatibleCheckpointError);
    other = cfg;
    other.snr_db = 0.0;  // no shape change
    CHECK_NOTHROW(require_compatible(c, other));
    std::filesystem::remove(path);
  }
}

TEST_CASE("corrupted checkpoints are rejected") {
  const ExperimentConfig cfg = tiny_config();
  const auto path = temp_file("hyperrnn_ckpt_bad.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "HRNNFRMS garbage";
  }
  CHECK_THROWS_AS(load_checkpoint(path), binio::FormatError);
  save_checkpoint(path, init_model(cfg, Variant::kBaseline, 1), cfg);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);
  CHECK_THROWS_AS(load_checkpoint(path), binio::FormatError);
  std::filesystem::remove(path);
}
