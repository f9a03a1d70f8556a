#pragma once

#include "hyperrnn/numerics/autodiff.hpp"
#include "hyperrnn/numerics/rng.hpp"
#include "hyperrnn/numerics/tensor.hpp"

#include <stdexcept>

// Pilot observation models.
//   uplink   (at the BS):   Y = h x + N          h: M x 1, x: 1 x L_ul
//   downlink (at the user): y = h^H X + n        X: M x L_dl
// Noise is circularly-symmetric complex Gaussian with variance sigma^2 per
// entry. A variance of exactly 0 gives the noiseless maps.

namespace hyperrnn::airlink {

class DegeneratePilotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PilotSet {
  ComplexMatrix uplink;    // 1 x L_ul
  ComplexMatrix downlink;  // M x L_dl
  double power_ul = 1.0;
  double power_dl = 1.0;
};

struct NoiseModel {
  double variance;
};

ComplexMatrix uplink_receive(const ComplexMatrix& h, const ComplexMatrix& x, NoiseModel noise,
                             Rng& rng);
ComplexMatrix downlink_receive(const ComplexMatrix& h, const ComplexMatrix& X, NoiseModel noise,
                               Rng& rng);

/// Rescales every uplink symbol to |x_l|^2 = P_ul and every downlink column
/// to ||X_l||^2 = P_dl. Zero symbols/columns throw DegeneratePilotError.
PilotSet project_power(const PilotSet& pilots);

/// sigma^2 = p_tx / 10^(snr_db / 10).
double snr_to_sigma(double snr_db, double p_tx);

/// Complex Gaussian draws projected onto the power budgets.
PilotSet random_pilots(int antennas, int pilots_ul, int pilots_dl, double power_ul,
                       double power_dl, Rng& rng);

// Trainable pilots are stored real-stacked:
//   uplink   2 x L_ul   row 0 = Re(x), row 1 = Im(x)
//   downlink 2M x L_dl  column l = c2r(X_l)
Matrix stack_uplink(const ComplexMatrix& x);
ComplexMatrix unstack_uplink(const Matrix& stacked);
Matrix stack_downlink(const ComplexMatrix& X);
ComplexMatrix unstack_downlink(const Matrix& stacked);

/// In-place projection of stacked pilots (same rules as project_power).
void project_stacked_uplink(Matrix& stacked, double power);
void project_stacked_downlink(Matrix& stacked, double power);

/// Real (2 M L_ul) x (2M) operator K(x) with c2r(vec(h x)) = K(x) c2r(h).
ad::Var uplink_operator(const ad::Var& stacked_ul, int antennas);
/// Real (2 L_dl) x (2M) operator G(X) with c2r(h^H X) = G(X) c2r(h).
ad::Var downlink_operator(const ad::Var& stacked_dl);

/// i.i.d. CN(0, variance) noise in real-stacked form (each real component
/// has variance/2), drawn in column-major order.
void fill_noise(Eigen::Ref<Matrix> out, double variance, Rng& rng);

}  // namespace hyperrnn::airlink
