#include "hyperrnn/config.hpp"

#include "hyperrnn/numerics/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hyperrnn {

using nlohmann::json;

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DomainError(std::string("ExperimentConfig: invalid ") + what);
  };
  need(carrier_ul > 0, "carrier_ul");
  need(carrier_offset >= 0, "carrier_offset");
  need(speed >= 0, "speed");
  need(slot_duration > 0, "slot_duration");
  need(paths >= 1, "paths");
  need(antennas >= 1, "antennas");
  need(feedback_bits >= 1, "feedback_bits");
  need(pilots_dl >= 1, "pilots_dl");
  need(pilots_ul >= 1, "pilots_ul");
  need(std::isfinite(snr_db), "snr_db");
  need(slots >= 1, "slots");
  need(!rho_override || std::fabs(*rho_override) <= 1.0, "rho_override");
  need(power_ul > 0 && power_dl > 0, "power budget");
  for (int w : network.quantizer_hidden) need(w >= 1, "quantizer_hidden");
  for (int w : network.baseline_hidden) need(w >= 1, "baseline_hidden");
  need(network.estimator_hidden >= 1, "estimator_hidden");
  need(network.hypernet_hidden >= 1, "hypernet_hidden");
  need(train.batch >= 1, "batch");
  need(train.iterations >= 1, "iterations");
  need(train.lr_initial > 0 && train.lr_final > 0 && train.lr_final <= train.lr_initial,
       "learning-rate schedule");
  need(train.eval_every >= 0, "eval_every");
  need(train.eval_frames >= 1, "eval_frames");
  need(train.eval_slot >= 1 && train.eval_slot <= slots, "eval_slot");
}

Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::kDesk;
  if (s == "paper") return Scale::kPaper;
  throw DomainError("unknown scale '" + s + "' (expected desk|paper)");
}

std::string to_string(Scale s) { return s == Scale::kDesk ? "desk" : "paper"; }

ExperimentConfig desk_scale(ExperimentConfig cfg) {
  cfg.antennas = 16;
  cfg.network.quantizer_hidden = {256, 128, 64};
  cfg.network.estimator_hidden = 256;
  cfg.network.hypernet_hidden = 256;
  cfg.network.baseline_hidden = {256, 128, 64};
  cfg.train.batch = 256;
  cfg.train.iterations = 3000;
  cfg.train.eval_frames = 10000;
  return cfg;
}

ExperimentConfig paper_scale(ExperimentConfig cfg) {
  const ExperimentConfig defaults;
  cfg.antennas = defaults.antennas;
  cfg.network = defaults.network;
  cfg.train.batch = defaults.train.batch;
  cfg.train.iterations = defaults.train.iterations;
  cfg.train.eval_frames = defaults.train.eval_frames;
  return cfg;
}

ExperimentConfig apply_scale(const ExperimentConfig& cfg, Scale s) {
  return s == Scale::kDesk ? desk_scale(cfg) : paper_scale(cfg);
}

namespace {

json network_json(const NetworkShape& n) {
  return {{"quantizer_hidden", n.quantizer_hidden},
          {"estimator_hidden", n.estimator_hidden},
          {"hypernet_hidden", n.hypernet_hidden},
          {"baseline_hidden", n.baseline_hidden}};
}

json train_json(const TrainConfig& t) {
  return {{"batch", t.batch},           {"iterations", t.iterations},
          {"lr_initial", t.lr_initial}, {"lr_final", t.lr_final},
          {"beta1", t.beta1},           {"beta2", t.beta2},
          {"epsilon", t.epsilon},       {"eval_every", t.eval_every},
          {"eval_frames", t.eval_frames}, {"eval_slot", t.eval_slot}};
}

// Reads keys that are present, rejects keys that are not in `known`.
class Reader {
 public:
  Reader(const json& j, const char* section) : j_(j), section_(section) {
    if (!j_.is_object()) throw DomainError(std::string("config: '") + section + "' must be an object");
  }
  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        out = it->get<T>();
      } catch (const json::exception& e) {
        throw DomainError(std::string("config: bad value for '") + key + "': " + e.what());
      }
    }
  }
  const json* child(const char* key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
        throw DomainError("config: unknown key '" + k + "' in " + section_);
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::vector<std::string> seen_;
};

}  // namespace

std::string to_json(const ExperimentConfig& c) {
  json j = {{"carrier_ul", c.carrier_ul},
            {"carrier_offset", c.carrier_offset},
            {"speed", c.speed},
            {"slot_duration", c.slot_duration},
            {"paths", c.paths},
            {"antennas", c.antennas},
            {"feedback_bits", c.feedback_bits},
            {"pilots_dl", c.pilots_dl},
            {"pilots_ul", c.pilots_ul},
            {"snr_db", c.snr_db},
            {"slots", c.slots},
            {"rho_override", c.rho_override ? json(*c.rho_override) : json(nullptr)},
            {"power_ul", c.power_ul},
            {"power_dl", c.power_dl},
            {"seed", c.seed},
            {"network", network_json(c.network)},
            {"train", train_json(c.train)}};
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config: parse error: ") + e.what());
  }
  ExperimentConfig c = base;
  Reader r(j, "top level");
  r.get("carrier_ul", c.carrier_ul);
  r.get("carrier_offset", c.carrier_offset);
  r.get("speed", c.speed);
  r.get("slot_duration", c.slot_duration);
  r.get("paths", c.paths);
  r.get("antennas", c.antennas);
  r.get("feedback_bits", c.feedback_bits);
  r.get("pilots_dl", c.pilots_dl);
  r.get("pilots_ul", c.pilots_ul);
  r.get("snr_db", c.snr_db);
  r.get("slots", c.slots);
  if (const json* rho = r.child("rho_override"); rho && rho->is_null()) {
    c.rho_override.reset();
  } else if (rho) {
    if (!rho->is_number()) throw DomainError("config: rho_override must be a number or null");
    c.rho_override = rho->get<double>();
  }
  r.get("power_ul", c.power_ul);
  r.get("power_dl", c.power_dl);
  r.get("seed", c.seed);
  if (const json* n = r.child("network")) {
    Reader rn(*n, "network");
    rn.get("quantizer_hidden", c.network.quantizer_hidden);
    rn.get("estimator_hidden", c.network.estimator_hidden);
    rn.get("hypernet_hidden", c.network.hypernet_hidden);
    rn.get("baseline_hidden", c.network.baseline_hidden);
    rn.finish();
  }
  if (const json* t = r.child("train")) {
    Reader rt(*t, "train");
    rt.get("batch", c.train.batch);
    rt.get("iterations", c.train.iterations);
    rt.get("lr_initial", c.train.lr_initial);
    rt.get("lr_final", c.train.lr_final);
    rt.get("beta1", c.train.beta1);
    rt.get("beta2", c.train.beta2);
    rt.get("epsilon", c.train.epsilon);
    rt.get("eval_every", c.train.eval_every);
    rt.get("eval_frames", c.train.eval_frames);
    rt.get("eval_slot", c.train.eval_slot);
    rt.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), base);
}

void save_config(const std::string& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file " + path);
  out << to_json(cfg) << '\n';
}

}  // namespace hyperrnn
