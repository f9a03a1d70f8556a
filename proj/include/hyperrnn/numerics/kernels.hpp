#pragma once

#include "hyperrnn/numerics/types.hpp"

// Dense kernels behind the autodiff ops. Batched operands keep one sample per
// column, so the parallel versions split work over column (batch) blocks, or
// over row blocks when the batch is the reduction axis. Every kernel has a
// serial counterpart in reference_kernels.hpp with identical semantics.

namespace hyperrnn::kernels {

int thread_count();

/// c = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// ga += dc * b^T
void matmul_acc_nt(const Matrix& dc, const Matrix& b, Matrix& ga);
/// gb += a^T * dc
void matmul_acc_tn(const Matrix& a, const Matrix& dc, Matrix& gb);

/// x + bias broadcast over columns; bias is rows x 1.
Matrix add_bias(const Matrix& x, const Matrix& bias);
/// Row sums of g accumulated into a rows x 1 bias gradient.
void bias_grad_acc(const Matrix& g, Matrix& gbias);

Matrix relu(const Matrix& x);
/// dx += dy where x > 0. The kink at exactly 0 passes no gradient.
void relu_backward_acc(const Matrix& x, const Matrix& dy, Matrix& dx);

Matrix hadamard(const Matrix& a, const Matrix& b);

}  // namespace hyperrnn::kernels
