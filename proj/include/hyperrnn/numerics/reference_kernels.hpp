#pragma once

#include "hyperrnn/numerics/types.hpp"

// Plain loop versions of kernels.hpp. Kept for tests and benchmarks only.
namespace hyperrnn::kernels::reference {

Matrix matmul(const Matrix& a, const Matrix& b);
void matmul_acc_nt(const Matrix& dc, const Matrix& b, Matrix& ga);
void matmul_acc_tn(const Matrix& a, const Matrix& dc, Matrix& gb);
Matrix add_bias(const Matrix& x, const Matrix& bias);
void bias_grad_acc(const Matrix& g, Matrix& gbias);
Matrix relu(const Matrix& x);
void relu_backward_acc(const Matrix& x, const Matrix& dy, Matrix& dx);
Matrix hadamard(const Matrix& a, const Matrix& b);

}  // namespace hyperrnn::kernels::reference
