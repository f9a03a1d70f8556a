#include "hyperrnn/config.hpp"
#include "hyperrnn/numerics/types.hpp"

#include <doctest.h>

#include <filesystem>

using namespace hyperrnn;

TEST_CASE("defaults describe the full-size system") {
  const ExperimentConfig c;
  CHECK(c.carrier_ul == 3e9);
  CHECK(c.carrier_dl() == 3.1e9);
  CHECK(c.speed == doctest::Approx(30.0 / 3.6));
  CHECK(c.slot_duration == 1e-4);
  CHECK(c.antennas == 64);
  CHECK(c.pilots_dl == 2);
  CHECK(c.snr_db == 10.0);
  CHECK(c.slots == 8);
  CHECK_FALSE(c.rho_override.has_value());
  CHECK(c.train.batch == 1024);
  CHECK(c.train.lr_initial == 1e-3);
  CHECK(c.train.lr_final == 1e-5);
  CHECK(c.train.beta1 == 0.9);
  CHECK(c.train.beta2 == 0.999);
  CHECK(c.train.epsilon == 1e-8);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("scales") {
  const ExperimentConfig desk = apply_scale(ExperimentConfig{}, Scale::kDesk);
  CHECK(desk.antennas == 16);
  CHECK(desk.network.estimator_hidden == 256);
  CHECK(desk.network.hypernet_hidden == 256);
  CHECK(desk.train.batch == 256);
  CHECK(desk.train.iterations == 3000);
  CHECK(desk.train.eval_frames == 10000);
  const ExperimentConfig paper = apply_scale(desk, Scale::kPaper);
  CHECK(paper == ExperimentConfig{});
  CHECK(parse_scale("desk") == Scale::kDesk);
  CHECK(parse_scale(to_string(Scale::kPaper)) == Scale::kPaper);
  CHECK_THROWS_AS(parse_scale("huge"), DomainError);
}

TEST_CASE("json round trip") {
  ExperimentConfig c = desk_scale({});
  c.rho_override = 0.25;
  c.seed = 1234567890123ULL;
  c.network.quantizer_hidden = {7, 3};
  CHECK(config_from_json(to_json(c)) == c);
  c.rho_override.reset();
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(to_json(ExperimentConfig{})) == ExperimentConfig{});

  const auto path = (std::filesystem::temp_directory_path() / "hyperrnn_cfg_test.json").string();
  save_config(path, c);
  CHECK(load_config(path) == c);
  std::filesystem::remove(path);
}

TEST_CASE("partial json keeps base values and rejects unknown keys") {
  ExperimentConfig base = desk_scale({});
  base.rho_override = 0.0;
  const ExperimentConfig c = config_from_json(R"({"paths": 2, "train": {"iterations": 10}})", base);
  CHECK(c.paths == 2);
  CHECK(c.train.iterations == 10);
  CHECK(c.antennas == 16);
  CHECK(c.rho_override == 0.0);
  CHECK_FALSE(config_from_json(R"({"rho_override": null})", base).rho_override.has_value());
  CHECK_THROWS_AS(config_from_json(R"({"pathz": 2})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"train": {"lr": 1}})"), DomainError);
  CHECK_THROWS_AS(config_from_json(R"({"paths": "two"})"), DomainError);
  CHECK_THROWS_AS(config_from_json("{not json"), DomainError);
}

TEST_CASE("validation names the offending field") {
  auto bad = [](auto mutate) {
    ExperimentConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.feedback_bits = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.antennas = 0; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.rho_override = 1.5; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.train.eval_slot = 9; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.train.lr_final = 1e-2; }).validate(), DomainError);
  CHECK_THROWS_AS(bad([](ExperimentConfig& c) { c.power_dl = 0.0; }).validate(), DomainError);
  CHECK_THROWS_WITH_AS(bad([](ExperimentConfig& c) { c.slots = 0; }).validate(),
                       "ExperimentConfig: invalid slots", DomainError);
}
