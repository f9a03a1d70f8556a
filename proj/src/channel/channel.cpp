#include "hyperrnn/channel/channel.hpp"

#include "hyperrnn/numerics/special.hpp"

#include <cmath>
#include <numbers>

namespace hyperrnn::channel {

CarrierGeometry link_geometry(const ExperimentConfig& cfg, Link link) {
  const double spacing = kSpeedOfLight / cfg.carrier_ul / 2.0;
  return {cfg.antennas, spacing, link == Link::kUplink ? cfg.carrier_ul : cfg.carrier_dl()};
}

double doppler_rho(double speed, double carrier, double slot_duration) {
  if (!(carrier > 0.0)) throw DomainError("doppler_rho: carrier frequency must be positive");
  if (!(slot_duration > 0.0)) throw DomainError("doppler_rho: slot duration must be positive");
  if (!(speed >= 0.0)) throw DomainError("doppler_rho: speed must be non-negative");
  const double doppler = speed * carrier / kSpeedOfLight;
  return bessel_j0(2.0 * std::numbers::pi * doppler * slot_duration);
}

FadingCorrelation fading_correlation(const ExperimentConfig& cfg) {
  if (cfg.rho_override) return {*cfg.rho_override, *cfg.rho_override};
  return {doppler_rho(cfg.speed, cfg.carrier_ul, cfg.slot_duration),
          doppler_rho(cfg.speed, cfg.carrier_dl(), cfg.slot_duration)};
}

ComplexMatrix steering_vector(const CarrierGeometry& geom, double aod) {
  ComplexMatrix a(geom.antennas, 1);
  const double step = -2.0 * std::numbers::pi * geom.spacing * std::sin(aod) * geom.carrier /
                      kSpeedOfLight;
  for (int m = 0; m < geom.antennas; ++m) {
    a.re(m, 0) = std::cos(step * m);
    a.im(m, 0) = std::sin(step * m);
  }
  return a;
}

FadingTrack sample_fading_track(double rho, int slots, Rng& rng) {
  if (!(std::fabs(rho) <= 1.0)) throw DomainError("sample_fading_track: |rho| must be <= 1");
  if (slots < 1) throw DomainError("sample_fading_track: need at least one slot");
  FadingTrack track{{}, rho};
  track.values.reserve(static_cast<std::size_t>(slots));
  const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  std::complex<double> beta = rng.complex_normal();
  track.values.push_back(beta);
  for (int t = 1; t < slots; ++t) {
    beta = rho * beta + innovation * rng.complex_normal();
    track.values.push_back(beta);
  }
  return track;
}

MultipathFrame sample_frame(const ExperimentConfig& cfg, Rng& rng) {
  const auto rho = fading_correlation(cfg);
  MultipathFrame frame;
  frame.slots = cfg.slots;
  frame.carrier_ul = cfg.carrier_ul;
  frame.carrier_dl = cfg.carrier_dl();
  const double gain = 1.0 / std::sqrt(static_cast<double>(cfg.paths));
  constexpr double kMaxAod = std::numbers::pi / 6.0;
  frame.paths.reserve(static_cast<std::size_t>(cfg.paths));
  for (int p = 0; p < cfg.paths; ++p) frame.paths.push_back({rng.uniform(-kMaxAod, kMaxAod), gain});
  for (int p = 0; p < cfg.paths; ++p)
    frame.uplink.push_back(sample_fading_track(rho.uplink, cfg.slots, rng));
  for (int p = 0; p < cfg.paths; ++p)
    frame.downlink.push_back(sample_fading_track(rho.downlink, cfg.slots, rng));
  return frame;
}

ComplexMatrix channel_at(const MultipathFrame& frame, int slot, Link link,
                         const CarrierGeometry& geom) {
  if (slot < 1 || slot > frame.slots) throw IndexError("channel_at: slot out of range");
  const auto& tracks = link == Link::kUplink ? frame.uplink : frame.downlink;
  ComplexMatrix h(geom.antennas, 1);
  for (std::size_t p = 0; p < frame.paths.size(); ++p) {
    const ComplexMatrix a = steering_vector(geom, frame.paths[p].aod);
    const std::complex<double> c = frame.paths[p].gain * tracks[p].values[static_cast<std::size_t>(slot - 1)];
    h.re += c.real() * a.re - c.imag() * a.im;
    h.im += c.real() * a.im + c.imag() * a.re;
  }
  return h;
}

Matrix stacked_channels(const MultipathFrame& frame, Link link, const CarrierGeometry& geom) {
  const int m_count = geom.antennas;
  const auto& tracks = link == Link::kUplink ? frame.uplink : frame.downlink;
  Matrix out = Matrix::Zero(2 * m_count, frame.slots);
  for (std::size_t p = 0; p < frame.paths.size(); ++p) {
    const ComplexMatrix a = steering_vector(geom, frame.paths[p].aod);
    for (int t = 0; t < frame.slots; ++t) {
      const std::complex<double> c = frame.paths[p].gain * tracks[p].values[static_cast<std::size_t>(t)];
      out.col(t).head(m_count) += c.real() * a.re.col(0) - c.imag() * a.im.col(0);
      out.col(t).tail(m_count) += c.real() * a.im.col(0) + c.imag() * a.re.col(0);
    }
  }
  return out;
}

}  // namespace hyperrnn::channel
