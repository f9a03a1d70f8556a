#include "hyperrnn/numerics/reference_kernels.hpp"

namespace hyperrnn::kernels::reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_dims(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c = Matrix::Zero(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      for (Eigen::Index i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

void matmul_acc_nt(const Matrix& dc, const Matrix& b, Matrix& ga) {
  require_dims(dc.cols() == b.cols() && ga.rows() == dc.rows() && ga.cols() == b.rows(),
               "matmul_acc_nt: shape mismatch");
  for (Eigen::Index i = 0; i < ga.rows(); ++i)
    for (Eigen::Index k = 0; k < ga.cols(); ++k) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < dc.cols(); ++j) s += dc(i, j) * b(k, j);
      ga(i, k) += s;
    }
}

void matmul_acc_tn(const Matrix& a, const Matrix& dc, Matrix& gb) {
  require_dims(a.rows() == dc.rows() && gb.rows() == a.cols() && gb.cols() == dc.cols(),
               "matmul_acc_tn: shape mismatch");
  for (Eigen::Index j = 0; j < gb.cols(); ++j)
    for (Eigen::Index k = 0; k < gb.rows(); ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < a.rows(); ++i) s += a(i, k) * dc(i, j);
      gb(k, j) += s;
    }
}

Matrix add_bias(const Matrix& x, const Matrix& bias) {
  require_dims(bias.rows() == x.rows() && bias.cols() == 1, "add_bias: bias must be rows x 1");
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) y(i, j) = x(i, j) + bias(i, 0);
  return y;
}

void bias_grad_acc(const Matrix& g, Matrix& gbias) {
  require_dims(gbias.rows() == g.rows() && gbias.cols() == 1, "bias_grad_acc: shape mismatch");
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) s += g(i, j);
    gbias(i, 0) += s;
  }
}

Matrix relu(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) y(i, j) = x(i, j) > 0.0 ? x(i, j) : 0.0;
  return y;
}

void relu_backward_acc(const Matrix& x, const Matrix& dy, Matrix& dx) {
  require_dims(x.rows() == dy.rows() && x.cols() == dy.cols() && dx.rows() == x.rows() &&
                   dx.cols() == x.cols(),
               "relu_backward: shape mismatch");
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (x(i, j) > 0.0) dx(i, j) += dy(i, j);
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shape mismatch");
  Matrix y(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) y(i, j) = a(i, j) * b(i, j);
  return y;
}

}  // namespace hyperrnn::kernels::reference
