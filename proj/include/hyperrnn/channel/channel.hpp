#pragma once

#include "hyperrnn/config.hpp"
#include "hyperrnn/numerics/rng.hpp"
#include "hyperrnn/numerics/tensor.hpp"

#include <complex>
#include <vector>

// Multipath FDD channel: per-path angles and gains are shared by both links,
// each link has its own AR(1) fading sequence over the T slots of a frame.
//
//   h_t = sum_p gain_p * a(aod_p) * beta_{p,t}
//
// The array is a ULA with half-wavelength spacing at the uplink carrier; the
// downlink steering vector uses the same physical spacing at f_dl.

namespace hyperrnn::channel {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Link { kUplink, kDownlink };

struct PathParams {
  double aod;   // radians
  double gain;  // > 0
};

struct FadingTrack {
  std::vector<std::complex<double>> values;  // slot t is values[t-1]
  double rho;
};

struct MultipathFrame {
  std::vector<PathParams> paths;
  std::vector<FadingTrack> uplink;
  std::vector<FadingTrack> downlink;
  int slots = 0;
  double carrier_ul = 0.0;
  double carrier_dl = 0.0;
};

struct CarrierGeometry {
  int antennas;
  double spacing;  // meters
  double carrier;  // Hz
};

CarrierGeometry link_geometry(const ExperimentConfig& cfg, Link link);

/// J0(2 pi f_d tau) with f_d = v f_c / c.
double doppler_rho(double speed, double carrier, double slot_duration);

struct FadingCorrelation {
  double uplink;
  double downlink;
};

/// Doppler-derived correlations, or the configured override for both links.
FadingCorrelation fading_correlation(const ExperimentConfig& cfg);

/// Entry m is exp(-j 2 pi m d sin(aod) f_c / c).
ComplexMatrix steering_vector(const CarrierGeometry& geom, double aod);

/// Unit-variance stationary AR(1) track: beta_1 ~ CN(0,1),
/// beta_t = rho beta_{t-1} + sqrt(1 - rho^2) eps_t.
FadingTrack sample_fading_track(double rho, int slots, Rng& rng);

/// Angles ~ U(-pi/6, pi/6), equal gains 1/sqrt(P), independent link fading.
MultipathFrame sample_frame(const ExperimentConfig& cfg, Rng& rng);

/// Channel vector (M x 1) at 1-based slot t.
ComplexMatrix channel_at(const MultipathFrame& frame, int slot, Link link,
                         const CarrierGeometry& geom);

/// All slots of one link, real-stacked: column t-1 holds c2r(h_t).
Matrix stacked_channels(const MultipathFrame& frame, Link link, const CarrierGeometry& geom);

}  // namespace hyperrnn::channel
