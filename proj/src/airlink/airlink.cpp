#include "hyperrnn/airlink/airlink.hpp"

#include <cmath>

namespace hyperrnn::airlink {

namespace {

void check_noise(NoiseModel noise) {
  if (!(noise.variance >= 0.0) || !std::isfinite(noise.variance))
    throw DomainError("noise variance must be finite and non-negative");
}

void add_noise(ComplexMatrix& z, NoiseModel noise, Rng& rng) {
  if (noise.variance == 0.0) return;
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const auto n = rng.complex_normal(noise.variance);
      z.re(r, c) += n.real();
      z.im(r, c) += n.imag();
    }
}

}  // namespace

ComplexMatrix uplink_receive(const ComplexMatrix& h, const ComplexMatrix& x, NoiseModel noise,
                             Rng& rng) {
  require_dims(h.cols() == 1, "uplink_receive: channel must be M x 1");
  require_dims(x.rows() == 1, "uplink_receive: pilots must be 1 x L");
  check_noise(noise);
  ComplexMatrix y(h.re * x.re - h.im * x.im, h.re * x.im + h.im * x.re);
  add_noise(y, noise, rng);
  return y;
}

ComplexMatrix downlink_receive(const ComplexMatrix& h, const ComplexMatrix& X, NoiseModel noise,
                               Rng& rng) {
  require_dims(h.cols() == 1, "downlink_receive: channel must be M x 1");
  require_dims(X.rows() == h.rows(), "downlink_receive: pilot rows must equal antenna count");
  check_noise(noise);
  // (hr - j hi)^T (Xr + j Xi)
  ComplexMatrix y(h.re.transpose() * X.re + h.im.transpose() * X.im,
                  h.re.transpose() * X.im - h.im.transpose() * X.re);
  add_noise(y, noise, rng);
  return y;
}

PilotSet project_power(const PilotSet& pilots) {
  PilotSet out = pilots;
  for (Eigen::Index l = 0; l < out.uplink.cols(); ++l) {
    const double mag2 = std::norm(out.uplink(0, l));
    if (!(mag2 > 0.0)) throw DegeneratePilotError("uplink pilot symbol has zero energy");
    const double s = std::sqrt(pilots.power_ul / mag2);
    out.uplink.re(0, l) *= s;
    out.uplink.im(0, l) *= s;
  }
  for (Eigen::Index l = 0; l < out.downlink.cols(); ++l) {
    const double mag2 = out.downlink.re.col(l).squaredNorm() + out.downlink.im.col(l).squaredNorm();
    if (!(mag2 > 0.0)) throw DegeneratePilotError("downlink pilot column has zero energy");
    const double s = std::sqrt(pilots.power_dl / mag2);
    out.downlink.re.col(l) *= s;
    out.downlink.im.col(l) *= s;
  }
  return out;
}

double snr_to_sigma(double snr_db, double p_tx) {
  if (!(p_tx > 0.0)) throw DomainError("snr_to_sigma: transmit power must be positive");
  return p_tx / std::pow(10.0, snr_db / 10.0);
}

PilotSet random_pilots(int antennas, int pilots_ul, int pilots_dl, double power_ul,
                       double power_dl, Rng& rng) {
  PilotSet p{ComplexMatrix(1, pilots_ul), ComplexMatrix(antennas, pilots_dl), power_ul, power_dl};
  for (int l = 0; l < pilots_ul; ++l) p.uplink.set(0, l, rng.complex_normal());
  for (int l = 0; l < pilots_dl; ++l)
    for (int m = 0; m < antennas; ++m) p.downlink.set(m, l, rng.complex_normal());
  return project_power(p);
}

Matrix stack_uplink(const ComplexMatrix& x) {
  require_dims(x.rows() == 1, "stack_uplink: pilots must be 1 x L");
  Matrix s(2, x.cols());
  s.row(0) = x.re.row(0);
  s.row(1) = x.im.row(0);
  return s;
}

ComplexMatrix unstack_uplink(const Matrix& s) {
  require_dims(s.rows() == 2, "unstack_uplink: expected 2 rows");
  return ComplexMatrix(s.row(0), s.row(1));
}

Matrix stack_downlink(const ComplexMatrix& X) {
  Matrix s(2 * X.rows(), X.cols());
  s.topRows(X.rows()) = X.re;
  s.bottomRows(X.rows()) = X.im;
  return s;
}

ComplexMatrix unstack_downlink(const Matrix& s) {
  require_dims(s.rows() % 2 == 0, "unstack_downlink: expected an even row count");
  const Eigen::Index m = s.rows() / 2;
  return ComplexMatrix(s.topRows(m), s.bottomRows(m));
}

void project_stacked_uplink(Matrix& s, double power) {
  for (Eigen::Index l = 0; l < s.cols(); ++l) {
    const double mag2 = s.col(l).squaredNorm();
    if (!(mag2 > 0.0)) throw DegeneratePilotError("uplink pilot symbol has zero energy");
    s.col(l) *= std::sqrt(power / mag2);
  }
}

void project_stacked_downlink(Matrix& s, double power) { project_stacked_uplink(s, power); }

ad::Var uplink_operator(const ad::Var& stacked_ul, int antennas) {
  const Matrix& x = stacked_ul->value();
  require_dims(x.rows() == 2, "uplink_operator: pilots must be 2 x L");
  const Eigen::Index m_count = antennas;
  const Eigen::Index l_count = x.cols();
  const Eigen::Index half = m_count * l_count;
  Matrix k = Matrix::Zero(2 * half, 2 * m_count);
  for (Eigen::Index l = 0; l < l_count; ++l)
    for (Eigen::Index m = 0; m < m_count; ++m) {
      const Eigen::Index r = l * m_count + m;
      // Re(h_m x_l) = hr xr - hi xi ;  Im(h_m x_l) = hr xi + hi xr
      k(r, m) = x(0, l);
      k(r, m_count + m) = -x(1, l);
      k(half + r, m) = x(1, l);
      k(half + r, m_count + m) = x(0, l);
    }
  return ad::make_op(std::move(k), {stacked_ul}, [m_count, l_count, half](const ad::Node& self) {
    const Matrix& g = self.grad();
    Matrix& gx = self.parents()[0]->grad_buffer();
    for (Eigen::Index l = 0; l < l_count; ++l)
      for (Eigen::Index m = 0; m < m_count; ++m) {
        const Eigen::Index r = l * m_count + m;
        gx(0, l) += g(r, m) + g(half + r, m_count + m);
        gx(1, l) += -g(r, m_count + m) + g(half + r, m);
      }
  });
}

ad::Var downlink_operator(const ad::Var& stacked_dl) {
  const Matrix& x = stacked_dl->value();
  require_dims(x.rows() % 2 == 0, "downlink_operator: pilots must be 2M x L");
  const Eigen::Index m_count = x.rows() / 2;
  const Eigen::Index l_count = x.cols();
  const auto xr = x.topRows(m_count);
  const auto xi = x.bottomRows(m_count);
  // Re(y) = Xr^T hr + Xi^T hi ;  Im(y) = Xi^T hr - Xr^T hi
  Matrix g(2 * l_count, 2 * m_count);
  g.topLeftCorner(l_count, m_count) = xr.transpose();
  g.topRightCorner(l_count, m_count) = xi.transpose();
  g.bottomLeftCorner(l_count, m_count) = xi.transpose();
  g.bottomRightCorner(l_count, m_count) = -xr.transpose();
  return ad::make_op(std::move(g), {stacked_dl}, [m_count, l_count](const ad::Node& self) {
    const Matrix& d = self.grad();
    Matrix& gx = self.parents()[0]->grad_buffer();
    gx.topRows(m_count) += d.topLeftCorner(l_count, m_count).transpose() -
                           d.bottomRightCorner(l_count, m_count).transpose();
    gx.bottomRows(m_count) += d.topRightCorner(l_count, m_count).transpose() +
                              d.bottomLeftCorner(l_count, m_count).transpose();
  });
}

void fill_noise(Eigen::Ref<Matrix> out, double variance, Rng& rng) {
  require_dims(out.rows() % 2 == 0, "fill_noise: real-stacked rows must be even");
  const double s = std::sqrt(0.5 * variance);
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = s * rng.normal();
}

}  // namespace hyperrnn::airlink
