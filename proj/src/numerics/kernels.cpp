#include "hyperrnn/numerics/kernels.hpp"

#include <omp.h>

#include <algorithm>

namespace hyperrnn::kernels {

namespace {

// Below this many multiply-adds a kernel runs on the calling thread.
constexpr double kParallelWork = 1 << 16;

struct Block {
  Eigen::Index begin;
  Eigen::Index size;
};

inline Block block_of(Eigen::Index n, int part, int parts) {
  const Eigen::Index base = n / parts;
  const Eigen::Index extra = n % parts;
  const Eigen::Index begin = part * base + std::min<Eigen::Index>(part, extra);
  return {begin, base + (part < extra ? 1 : 0)};
}

inline int parts_for(Eigen::Index n, double work) {
  const int threads = thread_count();
  if (threads <= 1 || work < kParallelWork || omp_in_parallel()) return 1;
  return static_cast<int>(std::min<Eigen::Index>(threads, std::max<Eigen::Index>(n, 1)));
}

}  // namespace

int thread_count() { return omp_get_max_threads(); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  require_dims(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const int parts = parts_for(b.cols(), double(a.rows()) * a.cols() * b.cols());
  if (parts == 1) {
    c.noalias() = a * b;
    return c;
  }
#pragma omp parallel for num_threads(parts) schedule(static)
  for (int p = 0; p < parts; ++p) {
    const Block blk = block_of(b.cols(), p, parts);
    if (blk.size > 0) c.middleCols(blk.begin, blk.size).noalias() = a * b.middleCols(blk.begin, blk.size);
  }
  return c;
}

void matmul_acc_nt(const Matrix& dc, const Matrix& b, Matrix& ga) {
  require_dims(dc.cols() == b.cols() && ga.rows() == dc.rows() && ga.cols() == b.rows(),
               "matmul_acc_nt: shape mismatch");
  const int parts = parts_for(ga.rows(), double(dc.rows()) * dc.cols() * b.rows());
  if (parts == 1) {
    ga.noalias() += dc * b.transpose();
    return;
  }
#pragma omp parallel for num_threads(parts) schedule(static)
  for (int p = 0; p < parts; ++p) {
    const Block blk = block_of(ga.rows(), p, parts);
    if (blk.size > 0)
      ga.middleRows(blk.begin, blk.size).noalias() += dc.middleRows(blk.begin, blk.size) * b.transpose();
  }
}

void matmul_acc_tn(const Matrix& a, const Matrix& dc, Matrix& gb) {
  require_dims(a.rows() == dc.rows() && gb.rows() == a.cols() && gb.cols() == dc.cols(),
               "matmul_acc_tn: shape mismatch");
  const int parts = parts_for(gb.cols(), double(a.rows()) * a.cols() * dc.cols());
  if (parts == 1) {
    gb.noalias() += a.transpose() * dc;
    return;
  }
#pragma omp parallel for num_threads(parts) schedule(static)
  for (int p = 0; p < parts; ++p) {
    const Block blk = block_of(gb.cols(), p, parts);
    if (blk.size > 0)
      gb.middleCols(blk.begin, blk.size).noalias() += a.transpose() * dc.middleCols(blk.begin, blk.size);
  }
}

Matrix add_bias(const Matrix& x, const Matrix& bias) {
  require_dims(bias.rows() == x.rows() && bias.cols() == 1, "add_bias: bias must be rows x 1");
  Matrix y(x.rows(), x.cols());
  const Eigen::Index n = x.cols();
#pragma omp parallel for schedule(static) if (double(x.size()) >= kParallelWork)
  for (Eigen::Index j = 0; j < n; ++j) y.col(j) = x.col(j) + bias.col(0);
  return y;
}

void bias_grad_acc(const Matrix& g, Matrix& gbias) {
  require_dims(gbias.rows() == g.rows() && gbias.cols() == 1, "bias_grad_acc: shape mismatch");
  gbias.col(0) += g.rowwise().sum();
}

Matrix relu(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  const Eigen::Index n = x.cols();
#pragma omp parallel for schedule(static) if (double(x.size()) >= kParallelWork)
  for (Eigen::Index j = 0; j < n; ++j) y.col(j) = x.col(j).cwiseMax(0.0);
  return y;
}

void relu_backward_acc(const Matrix& x, const Matrix& dy, Matrix& dx) {
  require_dims(x.rows() == dy.rows() && x.cols() == dy.cols() && dx.rows() == x.rows() &&
                   dx.cols() == x.cols(),
               "relu_backward: shape mismatch");
  const Eigen::Index n = x.cols();
#pragma omp parallel for schedule(static) if (double(x.size()) >= kParallelWork)
  for (Eigen::Index j = 0; j < n; ++j)
    dx.col(j) += (x.col(j).array() > 0.0).select(dy.col(j), 0.0);
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shape mismatch");
  Matrix y(a.rows(), a.cols());
  const Eigen::Index n = a.cols();
#pragma omp parallel for schedule(static) if (double(a.size()) >= kParallelWork)
  for (Eigen::Index j = 0; j < n; ++j) y.col(j) = a.col(j).cwiseProduct(b.col(j));
  return y;
}

}  // namespace hyperrnn::kernels
