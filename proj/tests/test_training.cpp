#include "hyperrnn/training/evaluation.hpp"
#include "hyperrnn/training/training.hpp"
#include "support/unrolled_gradcheck.hpp"

#include <doctest.h>
#include <omp.h>

#include <limits>
#include <set>
#include <unordered_set>

using namespace hyperrnn;
using namespace hyperrnn::training;
using networks::Variant;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.antennas = 4;
  cfg.paths = 2;
  cfg.feedback_bits = 6;
  cfg.pilots_ul = 2;
  cfg.pilots_dl = 2;
  cfg.slots = 2;
  cfg.network.quantizer_hidden = {10, 8};
  cfg.network.estimator_hidden = 7;
  cfg.network.hypernet_hidden = 9;
  cfg.network.baseline_hidden = {12, 5};
  cfg.train.batch = 16;
  cfg.train.iterations = 20;
  cfg.train.eval_frames = 200;
  cfg.train.eval_slot = 2;
  return cfg;
}

ComplexMatrix column_as_complex(const Matrix& stacked, Eigen::Index col, Eigen::Index rows, Eigen::Index cols) {
  const Vector v = stacked.col(col);
  return r2c(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), rows, cols);
}

}  // namespace

TEST_CASE("learning rate decays exponentially between the endpoints") {
  const LearningRateSchedule s(1e-3, 1e-5, 101);
  CHECK(s.at(0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(s.at(100) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(s.at(50) == doctest::Approx(1e-4).epsilon(1e-12));
  for (int i = 1; i <= 100; ++i) CHECK(s.at(i) / s.at(i - 1) == doctest::Approx(std::pow(0.01, 0.01)));
  CHECK(LearningRateSchedule(1e-3, 1e-5, 1).at(0) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(LearningRateSchedule(0.0, 1e-5, 10), DomainError);
}

TEST_CASE("nmse definition") {
  Rng rng(1);
  const ComplexMatrix h(testing::random_matrix(6, 1, rng), testing::random_matrix(6, 1, rng));
  const ComplexMatrix zero(Matrix::Zero(6, 1), Matrix::Zero(6, 1));
  const ComplexMatrix twice(2.0 * h.re, 2.0 * h.im);
  CHECK(nmse(h, h) == 0.0);
  CHECK(nmse(zero, h) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nmse(twice, h) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(to_db(1.0) == 0.0);
  CHECK(to_db(0.1) == doctest::Approx(-10.0));
  CHECK(to_db(0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(nmse(h, zero), DomainError);
}

TEST_CASE("frame loss equals slot-by-slot single-sample evaluation") {
  for (Variant v : {Variant::kHyperRnn, Variant::kBaseline}) {
    ExperimentConfig cfg = tiny_config();
    cfg.slots = 4;
    const networks::Model model = networks::init_model(cfg, v, 3);
    Rng frame_rng(4);
    const auto frame = channel::sample_frame(cfg, frame_rng);
    const double variance = 0.2;
    Rng noise_rng(5, 7);
    const double loss = frame_loss(frame, model, cfg, {variance}, noise_rng);

    Rng oracle_rng(5, 7);
    const auto ul = channel::link_geometry(cfg, channel::Link::kUplink);
    const auto dl = channel::link_geometry(cfg, channel::Link::kDownlink);
    const ComplexMatrix x_ul = v == Variant::kHyperRnn ? airlink::unstack_uplink(model.pilots_ul) : ComplexMatrix{};
    const ComplexMatrix x_dl = airlink::unstack_downlink(model.pilots_dl);
    Vector s_h = Vector::Zero(cfg.network.hypernet_hidden);
    Vector s_e = Vector::Zero(cfg.network.estimator_hidden);
    double expect = 0.0;
    for (int t = 1; t <= cfg.slots; ++t) {
      Matrix n_ul(2 * cfg.antennas * cfg.pilots_ul, 1), n_dl(2 * cfg.pilots_dl, 1);
      airlink::fill_noise(n_ul, variance, oracle_rng);
      airlink::fill_noise(n_dl, variance, oracle_rng);
      const ComplexMatrix h_dl = channel::channel_at(frame, t, channel::Link::kDownlink, dl);
      Rng silent(0);
      ComplexMatrix y_dl = airlink::downlink_receive(h_dl, x_dl, {0.0}, silent);
      const ComplexMatrix nd = column_as_complex(n_dl, 0, 1, cfg.pilots_dl);
      y_dl.re += nd.re;
      y_dl.im += nd.im;
      const Vector q = networks::quantize_feedback(y_dl, model.quantizer);
      ComplexMatrix est;
      if (v == Variant::kHyperRnn) {
        const ComplexMatrix h_ul = channel::channel_at(frame, t, channel::Link::kUplink, ul);
        ComplexMatrix y_ul = airlink::uplink_receive(h_ul, x_ul, {0.0}, silent);
        const ComplexMatrix nu = column_as_complex(n_ul, 0, cfg.antennas, cfg.pilots_ul);
        y_ul.re += nu.re;
        y_ul.im += nu.im;
        const auto hs = networks::hypernetwork_step(y_ul, s_h, model.hypernet);
        s_h = hs.state;
        const auto es = networks::estimate_step(q, s_e, model.estimator, hs.omega);
        s_e = es.state;
        est = es.estimate;
      } else {
        est = networks::baseline_estimate(q, model.baseline);
      }
      expect += (est.re - h_dl.re).squaredNorm() + (est.im - h_dl.im).squaredNorm();
    }
    CHECK(loss == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("batch sampling is independent of the thread count") {
  const ExperimentConfig cfg = tiny_config();
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Batch a = sample_batch(cfg, 77, 3, 33);
  omp_set_num_threads(4);
  const Batch b = sample_batch(cfg, 77, 3, 33);
  omp_set_num_threads(saved);
  for (int t = 0; t < cfg.slots; ++t) {
    CHECK(a.h_ul[t] == b.h_ul[t]);
    CHECK(a.h_dl[t] == b.h_dl[t]);
    CHECK(a.noise_ul[t] == b.noise_ul[t]);
    CHECK(a.noise_dl[t] == b.noise_dl[t]);
  }
  const Batch c = sample_batch(cfg, 77, 4, 33);
  CHECK(a.h_dl[0] != c.h_dl[0]);
}

TEST_CASE("batch noise has the configured per-link power") {
  ExperimentConfig cfg = tiny_config();
  cfg.snr_db = 3.0;
  cfg.power_ul = 4.0;
  cfg.power_dl = 2.0;
  const Batch b = sample_batch(cfg, 1, 0, 4000);
  const double var_dl = airlink::snr_to_sigma(cfg.snr_db, cfg.power_dl);
  const double var_ul = airlink::snr_to_sigma(cfg.snr_db, cfg.power_ul);
  CHECK(b.noise_dl[0].squaredNorm() / (b.size * cfg.pilots_dl) == doctest::Approx(var_dl).epsilon(0.03));
  CHECK(b.noise_ul[1].squaredNorm() / (b.size * cfg.pilots_ul * cfg.antennas) == doctest::Approx(var_ul).epsilon(0.03));
  CHECK(b.h_dl[0].squaredNorm() / b.size == doctest::Approx(cfg.antennas).epsilon(0.05));
}

TEST_CASE("unrolled T=2 gradients match finite differences for every parameter group") {
  ExperimentConfig cfg = tiny_config();
  for (Variant v : {Variant::kHyperRnn, Variant::kBaseline}) {
    networks::Model model = networks::init_model(cfg, v, 21);
    Rng rng(22);
    // Non-zero biases exercise every term of the backward pass.
    networks::for_each_parameter(model, [&](const std::string& name, Matrix& p) {
      if (name.find("bias") != std::string::npos) p += testing::random_matrix(p.rows(), p.cols(), rng, 0.1);
    });
    const Batch batch = sample_batch(cfg, 23, 0, 3);
    const auto check = testing::check_unrolled_gradients(model, batch, cfg);
    CHECK(check.surrogate_matches_ste);
    for (const auto& [group, err] : check.group_error) {
      INFO(networks::to_string(v) << " " << group);
      CHECK(err < 1e-3);
    }
    CHECK(check.group_error.count("pilots") == 1);
    CHECK(check.group_error.count("quantizer") == 1);
  }
}

TEST_CASE("every parameter receives gradient through the straight-through estimator") {
  const ExperimentConfig cfg = tiny_config();
  const networks::Model model = networks::init_model(cfg, Variant::kHyperRnn, 31);
  const auto graph = networks::bind(model, true);
  ad::backward(unrolled_forward(graph, sample_batch(cfg, 32, 0, 8), cfg).loss);
  networks::for_each_parameter(graph, [](const std::string& name, const ad::Var& v) {
    INFO(name);
    CHECK(v->has_grad());
    if (name != "hypernet/bias_a" && name != "estimator/bias_a") CHECK(v->grad().norm() > 0.0);
  });
}

TEST_CASE("the estimator sees channels only through received pilots and feedback") {
  const ExperimentConfig cfg = tiny_config();
  const networks::Model model = networks::init_model(cfg, Variant::kHyperRnn, 41);
  const auto graph = networks::bind(model, true);
  const auto un = unrolled_forward(graph, sample_batch(cfg, 42, 0, 4), cfg);
  const std::set<std::string> boundary{"Y_ul", "q_dl"};
  std::set<std::string> reached;
  bool leaked = false;
  for (const auto& est : un.estimates) {
    REQUIRE(est->label() == "h_hat");
    std::vector<const ad::Node*> stack{est.get()};
    std::unordered_set<const ad::Node*> seen;
    while (!stack.empty()) {
      const ad::Node* n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      if (n->label() == "h_ul" || n->label() == "h_dl") leaked = true;
      if (boundary.count(n->label())) {
        reached.insert(n->label());
        continue;
      }
      for (const auto& p : n->parents()) stack.push_back(p.get());
    }
  }
  CHECK_FALSE(leaked);
  CHECK(reached == boundary);
}

TEST_CASE("training is deterministic and keeps pilots on their power budget") {
  const ExperimentConfig cfg = tiny_config();
  for (Variant v : {Variant::kHyperRnn, Variant::kBaseline}) {
    const auto a = train(cfg, v);
    const auto b = train(cfg, v);
    CHECK(a.history.loss == b.history.loss);
    CHECK(a.history.lr == b.history.lr);
    CHECK(a.model.pilots_dl == b.model.pilots_dl);
    CHECK(a.history.loss.size() == static_cast<std::size_t>(cfg.train.iterations));
    for (Eigen::Index l = 0; l < cfg.pilots_dl; ++l)
      CHECK(a.model.pilots_dl.col(l).squaredNorm() == doctest::Approx(cfg.power_dl).epsilon(1e-12));
    if (v == Variant::kHyperRnn)
      for (Eigen::Index l = 0; l < cfg.pilots_ul; ++l)
        CHECK(a.model.pilots_ul.col(l).squaredNorm() == doctest::Approx(cfg.power_ul).epsilon(1e-12));
    ExperimentConfig other = cfg;
    other.seed = 2;
    CHECK(train(other, v).history.loss != a.history.loss);
  }
}

TEST_CASE("periodic evaluation is recorded in the history") {
  ExperimentConfig cfg = tiny_config();
  cfg.train.iterations = 6;
  cfg.train.eval_every = 4;
  const auto r = train(cfg, Variant::kBaseline);
  REQUIRE(r.history.evals.size() == 2);
  CHECK(r.history.evals[0].iteration == 3);
  CHECK(r.history.evals[1].iteration == 5);
  CHECK(r.history.evals[1].nmse_db.size() == static_cast<std::size_t>(cfg.slots));
}

TEST_CASE("non-finite loss aborts training") {
  const ExperimentConfig cfg = tiny_config();
  networks::Model bad = networks::init_model(cfg, Variant::kBaseline, 1);
  bad.baseline.layers.back().bias(0, 0) = std::numeric_limits<double>::quiet_NaN();
  TrainOptions opts;
  opts.initial = bad;
  CHECK_THROWS_AS(train(cfg, Variant::kBaseline, opts), TrainingDivergedError);
}

TEST_CASE("training on a fixed frame set") {
  const ExperimentConfig cfg = tiny_config();
  Rng rng(50);
  std::vector<channel::MultipathFrame> frames;
  for (int i = 0; i < 5; ++i) frames.push_back(channel::sample_frame(cfg, rng));
  const Batch b = batch_from_frames(cfg, frames, 9, 0, 7);
  const auto dl = channel::link_geometry(cfg, channel::Link::kDownlink);
  CHECK(b.h_dl[1].col(6) == channel::stacked_channels(frames[1], channel::Link::kDownlink, dl).col(1));
  TrainOptions opts;
  opts.dataset = frames;
  CHECK(train(cfg, Variant::kBaseline, opts).history.loss.size() == 20);
}

TEST_CASE("evaluation is reproducible and reports every slot") {
  const ExperimentConfig cfg = tiny_config();
  const networks::Model m = networks::init_model(cfg, Variant::kHyperRnn, 60);
  const auto a = evaluate(m, cfg, 300, 5);
  const auto b = evaluate(m, cfg, 300, 5);
  CHECK(a.db == b.db);
  CHECK(a.frames == 300);
  CHECK(a.db.size() == static_cast<std::size_t>(cfg.slots));
  for (std::size_t t = 0; t < a.db.size(); ++t) {
    CHECK(a.db[t] == doctest::Approx(to_db(a.linear[t])));
    CHECK(a.stderr_db[t] > 0.0);
  }
  CHECK(evaluate(m, cfg, 300, 6).db != a.db);
}

TEST_CASE("an all-zero estimator scores exactly 0 dB") {
  const ExperimentConfig cfg = tiny_config();
  networks::Model m = networks::init_model(cfg, Variant::kBaseline, 70);
  m.baseline.layers.back().weight.setZero();
  m.baseline.layers.back().bias.setZero();
  const auto r = evaluate(m, cfg, 500, 1);
  for (double db : r.db) CHECK(std::abs(db) < 1e-12);
}
