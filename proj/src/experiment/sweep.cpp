#include "hyperrnn/experiment/sweep.hpp"

#include "hyperrnn/channel/channel.hpp"
#include "hyperrnn/training/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hyperrnn::experiment {

using networks::Variant;

bool SweepResult::all_completed() const {
  for (const auto& r : rows)
    if (!r.completed) return false;
  return true;
}

bool SweepResult::all_required_passed() const {
  for (const auto& c : checks)
    if (c.required && !c.passed) return false;
  return true;
}

const SweepRow* SweepResult::find(Variant v, int bits, int pilots_ul, int paths) const {
  for (const auto& r : rows) {
    if (r.variant != v || r.point.feedback_bits != bits || r.point.paths != paths) continue;
    if (v == Variant::kHyperRnn && r.point.pilots_ul != pilots_ul) continue;
    return &r;
  }
  return nullptr;
}

namespace {

std::string point_tag(const ExperimentConfig& cfg, Variant v) {
  std::ostringstream s;
  s << networks::to_string(v) << "_B" << cfg.feedback_bits;
  if (v == Variant::kHyperRnn) s << "_Lul" << cfg.pilots_ul;
  s << "_P" << cfg.paths;
  return s.str();
}

void say(const SweepOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::string fmt_db(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

bool usable(const SweepRow* r) { return r && r->completed && std::isfinite(r->nmse_db); }

}  // namespace

SweepRow run_point(const ExperimentConfig& cfg, Variant variant, const SweepOptions& options) {
  SweepRow row;
  row.point = cfg;
  row.variant = variant;
  const auto start = std::chrono::steady_clock::now();
  const std::string tag = point_tag(cfg, variant);
  say(options, "training " + tag);
  try {
    auto result = training::train(cfg, variant);
    const auto report = training::evaluate(result.model, cfg, cfg.train.eval_frames, cfg.seed);
    row.nmse_db_per_slot = report.db;
    row.nmse_db = report.db.at(static_cast<std::size_t>(cfg.train.eval_slot - 1));
    row.completed = true;
    if (!options.out_dir.empty()) {
      row.checkpoint = (std::filesystem::path(options.out_dir) / ("ckpt_" + tag + ".bin")).string();
      networks::save_checkpoint(row.checkpoint, result.model, cfg);
      training::write_history_csv(
          (std::filesystem::path(options.out_dir) / ("history_" + tag + ".csv")).string(),
          result.history, cfg.train.eval_slot);
    }
  } catch (const training::TrainingDivergedError& e) {
    row.completed = false;
    row.error = e.what();
    row.nmse_db = std::numeric_limits<double>::quiet_NaN();
  }
  row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  say(options, tag + ": nmse " + fmt_db(row.nmse_db) + " dB (" + fmt(row.runtime_s) + " s)" +
                   (row.completed ? "" : " FAILED: " + row.error));
  return row;
}

SweepResult run_fig4_sweep(const ExperimentConfig& base, std::span<const int> b_values,
                           std::span<const int> lul_values, const SweepOptions& options) {
  SweepResult result;
  if (b_values.empty()) return result;
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  for (int bits : b_values) {
    ExperimentConfig cfg = base;
    cfg.rho_override = 0.0;
    cfg.feedback_bits = bits;
    for (int lul : lul_values) {
      cfg.pilots_ul = lul;
      result.rows.push_back(run_point(cfg, Variant::kHyperRnn, options));
    }
    result.rows.push_back(run_point(cfg, Variant::kBaseline, options));
  }

  const int paths = base.paths;
  if (lul_values.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(lul_values.begin(), lul_values.end());
    for (int bits : b_values) {
      const SweepRow* shortp = result.find(Variant::kHyperRnn, bits, *lo, paths);
      const SweepRow* longp = result.find(Variant::kHyperRnn, bits, *hi, paths);
      TrendCheck c{"hyperrnn B=" + std::to_string(bits) + ": L_ul=" + std::to_string(*hi) +
                       " <= L_ul=" + std::to_string(*lo) + " + 0.5 dB",
                   false, true, {}};
      if (usable(shortp) && usable(longp)) {
        c.passed = longp->nmse_db <= shortp->nmse_db + 0.5;
        c.detail = fmt_db(longp->nmse_db) + " vs " + fmt_db(shortp->nmse_db) + " dB";
      } else {
        c.detail = "missing grid point";
      }
      result.checks.push_back(c);
    }
  }
  const int top = *std::max_element(b_values.begin(), b_values.end());
  const SweepRow* baseline = result.find(Variant::kBaseline, top, 0, paths);
  for (int lul : lul_values) {
    const SweepRow* hyper = result.find(Variant::kHyperRnn, top, lul, paths);
    TrendCheck c{"B=" + std::to_string(top) + ", L_ul=" + std::to_string(lul) +
                     ": hyperrnn <= baseline - 1 dB",
                 false, true, {}};
    if (usable(hyper) && usable(baseline)) {
      c.passed = hyper->nmse_db <= baseline->nmse_db - 1.0;
      c.detail = fmt_db(hyper->nmse_db) + " vs " + fmt_db(baseline->nmse_db) + " dB";
    } else {
      c.detail = "missing grid point";
    }
    result.checks.push_back(c);
  }
  if (!options.out_dir.empty())
    write_sweep_csv((std::filesystem::path(options.out_dir) / "fig4.csv").string(), result);
  return result;
}

SweepResult run_fig5_sweep(const ExperimentConfig& base, std::span<const int> p_values,
                           const SweepOptions& options) {
  SweepResult result;
  if (p_values.empty()) return result;
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  for (int paths : p_values) {
    ExperimentConfig cfg = base;
    cfg.rho_override.reset();
    cfg.paths = paths;
    result.rows.push_back(run_point(cfg, Variant::kHyperRnn, options));
    result.rows.push_back(run_point(cfg, Variant::kBaseline, options));
  }

  if (p_values.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(p_values.begin(), p_values.end());
    const int bits = base.feedback_bits;
    const int lul = base.pilots_ul;
    auto gap = [&](int paths) {
      const SweepRow* h = result.find(Variant::kHyperRnn, bits, lul, paths);
      const SweepRow* b = result.find(Variant::kBaseline, bits, lul, paths);
      return usable(h) && usable(b) ? b->nmse_db - h->nmse_db : std::numeric_limits<double>::quiet_NaN();
    };
    const double g_lo = gap(*lo);
    const double g_hi = gap(*hi);
    result.checks.push_back({"gain at P=" + std::to_string(*lo) + " > gain at P=" + std::to_string(*hi),
                             std::isfinite(g_lo) && std::isfinite(g_hi) && g_lo > g_hi, true,
                             fmt_db(g_lo) + " vs " + fmt_db(g_hi) + " dB"});
    for (Variant v : {Variant::kHyperRnn, Variant::kBaseline}) {
      const SweepRow* a = result.find(v, bits, lul, *lo);
      const SweepRow* b = result.find(v, bits, lul, *hi);
      const bool ok = usable(a) && usable(b) && a->nmse_db < b->nmse_db;
      result.checks.push_back({networks::to_string(v) + ": NMSE at P=" + std::to_string(*lo) +
                                   " < NMSE at P=" + std::to_string(*hi),
                               ok, false,
                               (a ? fmt_db(a->nmse_db) : "n/a") + " vs " + (b ? fmt_db(b->nmse_db) : "n/a") + " dB"});
    }
  }
  if (!options.out_dir.empty())
    write_sweep_csv((std::filesystem::path(options.out_dir) / "fig5.csv").string(), result);
  return result;
}

training::NmseReport evaluate_checkpoint(const networks::Checkpoint& ckpt,
                                         const ExperimentConfig& cfg, int frames) {
  networks::require_compatible(ckpt, cfg);
  return training::evaluate(ckpt.model, cfg, frames, cfg.seed);
}

namespace {

std::string row_prefix(const ExperimentConfig& cfg, Variant v) {
  const auto rho = channel::fading_correlation(cfg);
  std::ostringstream s;
  s << networks::to_string(v) << ',' << cfg.feedback_bits << ','
    << (v == Variant::kHyperRnn ? cfg.pilots_ul : 0) << ',' << cfg.pilots_dl << ',' << cfg.paths
    << ',' << cfg.antennas << ',' << fmt(cfg.snr_db) << ',' << fmt(rho.uplink) << ','
    << fmt(rho.downlink) << ',';
  return s.str();
}

}  // namespace

std::string csv_row(const SweepRow& row) {
  return row_prefix(row.point, row.variant) + std::to_string(row.point.train.eval_slot) + ',' +
         fmt_db(row.completed ? row.nmse_db : std::numeric_limits<double>::quiet_NaN()) + ',' +
         std::to_string(row.point.seed);
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kSweepCsvHeader << '\n';
  for (const auto& r : result.rows) out << csv_row(r) << '\n';
}

void write_eval_csv(const std::string& path, const ExperimentConfig& cfg, Variant variant,
                    const training::NmseReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kSweepCsvHeader << '\n';
  const std::string prefix = row_prefix(cfg, variant);
  for (std::size_t t = 0; t < report.db.size(); ++t)
    out << prefix << (t + 1) << ',' << fmt_db(report.db[t]) << ',' << cfg.seed << '\n';
}

}  // namespace hyperrnn::experiment
