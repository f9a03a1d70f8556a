#include "hyperrnn/channel/channel.hpp"
#include "hyperrnn/channel/frame_io.hpp"
#include "hyperrnn/config.hpp"
#include "hyperrnn/experiment/sweep.hpp"
#include "hyperrnn/networks/checkpoint.hpp"
#include "hyperrnn/networks/networks.hpp"
#include "hyperrnn/numerics/rng.hpp"
#include "hyperrnn/training/evaluation.hpp"
#include "hyperrnn/training/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hyperrnn;

namespace {

// Options shared by every subcommand. Resolution order: built-in defaults,
// then --scale, then the --config file, then individual flags.
struct CommonArgs {
  std::string config_path;
  std::string scale = "desk";
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<int> bits, pilots_ul, pilots_dl, paths, antennas, iterations, batch, eval_frames;
  std::optional<double> snr_db, rho;
  bool quiet = false;
};

void add_common(CLI::App* app, CommonArgs& a) {
  app->add_option("--config", a.config_path, "JSON config file (missing keys keep defaults)");
  app->add_option("--scale", a.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  app->add_option("--seed", a.seed, "master seed");
  app->add_option("--out", a.out, "output directory");
  app->add_option("--bits", a.bits, "feedback bits B");
  app->add_option("--pilots-ul", a.pilots_ul, "uplink pilot length");
  app->add_option("--pilots-dl", a.pilots_dl, "downlink pilot length");
  app->add_option("--paths", a.paths, "number of propagation paths P");
  app->add_option("--antennas", a.antennas, "base-station antennas M");
  app->add_option("--snr", a.snr_db, "SNR in dB for both links");
  app->add_option("--rho", a.rho, "force the fading correlation of both links");
  app->add_option("--iterations", a.iterations, "training iterations");
  app->add_option("--batch", a.batch, "training batch size");
  app->add_option("--eval-frames", a.eval_frames, "evaluation frames");
  app->add_flag("--quiet", a.quiet, "suppress progress output");
}

ExperimentConfig resolve(const CommonArgs& a, const ExperimentConfig& preset = {}) {
  ExperimentConfig cfg = apply_scale(preset, parse_scale(a.scale));
  if (!a.config_path.empty()) cfg = load_config(a.config_path, cfg);
  if (a.seed) cfg.seed = *a.seed;
  if (a.bits) cfg.feedback_bits = *a.bits;
  if (a.pilots_ul) cfg.pilots_ul = *a.pilots_ul;
  if (a.pilots_dl) cfg.pilots_dl = *a.pilots_dl;
  if (a.paths) cfg.paths = *a.paths;
  if (a.antennas) cfg.antennas = *a.antennas;
  if (a.snr_db) cfg.snr_db = *a.snr_db;
  if (a.rho) cfg.rho_override = *a.rho;
  if (a.iterations) cfg.train.iterations = *a.iterations;
  if (a.batch) cfg.train.batch = *a.batch;
  if (a.eval_frames) cfg.train.eval_frames = *a.eval_frames;
  cfg.validate();
  return cfg;
}

void print_report(const training::NmseReport& r) {
  std::cout << "slot,nmse_db,stderr_db\n";
  for (std::size_t t = 0; t < r.db.size(); ++t)
    std::cout << (t + 1) << ',' << r.db[t] << ',' << r.stderr_db[t] << '\n';
}

void print_checks(const experiment::SweepResult& res) {
  for (const auto& c : res.checks)
    std::cout << (c.passed ? "PASS " : (c.required ? "FAIL " : "WARN ")) << c.name << " (" << c.detail
              << ")\n";
  if (!res.all_completed()) std::cout << "FAIL some grid points did not complete\n";
}

experiment::SweepOptions sweep_options(const CommonArgs& a) {
  experiment::SweepOptions o;
  o.out_dir = a.out;
  if (!a.quiet) o.log = [](const std::string& m) { std::cerr << m << '\n'; };
  return o;
}

std::vector<int> or_default(const std::vector<int>& v, std::vector<int> fallback) {
  return v.empty() ? fallback : v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent downlink channel estimation with uplink-conditioned hypernetworks"};
  app.require_subcommand(1);

  CommonArgs train_args;
  std::string variant_name = "hyperrnn";
  auto* train_cmd = app.add_subcommand("train", "train one model and save a checkpoint");
  add_common(train_cmd, train_args);
  train_cmd->add_option("--variant", variant_name, "hyperrnn or baseline");

  CommonArgs eval_args;
  std::string ckpt_path;
  auto* eval_cmd = app.add_subcommand("eval", "per-slot NMSE of a checkpoint");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();

  CommonArgs fig4_args;
  std::vector<int> b_values, lul_values;
  auto* fig4_cmd = app.add_subcommand("sweep-fig4", "NMSE against feedback bits, i.i.d. slots");
  add_common(fig4_cmd, fig4_args);
  fig4_cmd->add_option("--b-values", b_values, "feedback bit grid")->delimiter(',');
  fig4_cmd->add_option("--lul-values", lul_values, "uplink pilot length grid")->delimiter(',');

  CommonArgs fig5_args;
  std::vector<int> p_values;
  auto* fig5_cmd = app.add_subcommand("sweep-fig5", "NMSE against path count, correlated slots");
  add_common(fig5_cmd, fig5_args);
  fig5_cmd->add_option("--p-values", p_values, "path count grid")->delimiter(',');

  CommonArgs export_args;
  int frame_count = 1000;
  auto* export_cmd = app.add_subcommand("export-frames", "sample channel frames to a binary file");
  add_common(export_cmd, export_args);
  export_cmd->add_option("--count", frame_count, "number of frames")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const ExperimentConfig cfg = resolve(train_args);
      const auto variant = networks::parse_variant(variant_name);
      fs::create_directories(train_args.out);
      training::TrainOptions opts;
      const int every = std::max(1, cfg.train.iterations / 20);
      if (!train_args.quiet)
        opts.progress = [every](int it, double loss) {
          if ((it + 1) % every == 0) std::cerr << "iteration " << (it + 1) << " loss " << loss << '\n';
        };
      auto result = training::train(cfg, variant, opts);
      const fs::path dir(train_args.out);
      networks::save_checkpoint((dir / "checkpoint.bin").string(), result.model, cfg);
      save_config((dir / "config.json").string(), cfg);
      training::write_history_csv((dir / "history.csv").string(), result.history, cfg.train.eval_slot);
      const auto report = training::evaluate(result.model, cfg, cfg.train.eval_frames, cfg.seed);
      experiment::write_eval_csv((dir / "eval.csv").string(), cfg, variant, report);
      print_report(report);
      return 0;
    }
    if (*eval_cmd) {
      const auto ckpt = networks::load_checkpoint(ckpt_path);
      // The checkpoint's own config is the base; flags and --config override it.
      ExperimentConfig cfg = ckpt.config;
      if (!eval_args.config_path.empty()) cfg = load_config(eval_args.config_path, cfg);
      CommonArgs flags = eval_args;
      flags.config_path.clear();
      if (eval_cmd->count("--scale") == 0) {
        // Keep the checkpoint's shapes unless a scale is requested explicitly.
        if (flags.seed) cfg.seed = *flags.seed;
        if (flags.snr_db) cfg.snr_db = *flags.snr_db;
        if (flags.rho) cfg.rho_override = *flags.rho;
        if (flags.paths) cfg.paths = *flags.paths;
        if (flags.eval_frames) cfg.train.eval_frames = *flags.eval_frames;
        cfg.validate();
      } else {
        cfg = resolve(flags, cfg);
      }
      const auto report = experiment::evaluate_checkpoint(ckpt, cfg, cfg.train.eval_frames);
      fs::create_directories(eval_args.out);
      experiment::write_eval_csv((fs::path(eval_args.out) / "eval.csv").string(), cfg,
                                 ckpt.model.variant, report);
      print_report(report);
      return 0;
    }
    if (*fig4_cmd) {
      ExperimentConfig preset;
      if (fig4_args.scale == "desk") preset.paths = 4;
      const ExperimentConfig base = resolve(fig4_args, preset);
      const auto bs = or_default(b_values, {5, 10, 20});
      const auto ls = or_default(lul_values, fig4_args.scale == "desk" ? std::vector<int>{1, 4}
                                                                       : std::vector<int>{1, 2, 4});
      fs::create_directories(fig4_args.out);
      save_config((fs::path(fig4_args.out) / "config.json").string(), base);
      const auto res = experiment::run_fig4_sweep(base, bs, ls, sweep_options(fig4_args));
      print_checks(res);
      return res.all_completed() && res.all_required_passed() ? 0 : 1;
    }
    if (*fig5_cmd) {
      ExperimentConfig preset;
      preset.feedback_bits = 20;
      preset.pilots_ul = 2;
      preset.pilots_dl = 2;
      const ExperimentConfig base = resolve(fig5_args, preset);
      const auto ps = or_default(p_values, fig5_args.scale == "desk" ? std::vector<int>{2, 8}
                                                                     : std::vector<int>{2, 4, 8, 16});
      fs::create_directories(fig5_args.out);
      save_config((fs::path(fig5_args.out) / "config.json").string(), base);
      const auto res = experiment::run_fig5_sweep(base, ps, sweep_options(fig5_args));
      print_checks(res);
      return res.all_completed() && res.all_required_passed() ? 0 : 1;
    }
    if (*export_cmd) {
      const ExperimentConfig cfg = resolve(export_args);
      Rng rng(mix_seed(cfg.seed, training::kEvalTag), 0);
      std::vector<channel::MultipathFrame> frames;
      frames.reserve(static_cast<std::size_t>(frame_count));
      for (int i = 0; i < frame_count; ++i) frames.push_back(channel::sample_frame(cfg, rng));
      fs::create_directories(export_args.out);
      channel::save_frames((fs::path(export_args.out) / "frames.bin").string(), frames);
      save_config((fs::path(export_args.out) / "config.json").string(), cfg);
      std::cout << "wrote " << frame_count << " frames\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
