#pragma once

#include "hyperrnn/numerics/autodiff.hpp"
#include "hyperrnn/numerics/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace hyperrnn::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

/// ||a - n|| / max(||a||, ||n||), 0 when both vanish.
inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

/// Central differences of a scalar function of one matrix argument.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                               double eps = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = probe.data()[i];
    probe.data()[i] = keep + eps;
    const double up = f(probe);
    probe.data()[i] = keep - eps;
    const double down = f(probe);
    probe.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

/// Builds a scalar graph from fresh parameter leaves holding `inputs` and
/// returns the worst relative error over all inputs.
using GraphFn = std::function<ad::Var(const std::vector<ad::Var>&)>;

inline double max_gradient_error(const GraphFn& build, const std::vector<Matrix>& inputs,
                                 double eps = 1e-6) {
  std::vector<ad::Var> leaves;
  for (const auto& m : inputs) leaves.push_back(ad::parameter(m));
  const ad::Var out = build(leaves);
  ad::backward(out);
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto f = [&](const Matrix& probe) {
      std::vector<ad::Var> args;
      for (std::size_t j = 0; j < inputs.size(); ++j)
        args.push_back(ad::constant(j == k ? probe : inputs[j]));
      return build(args)->value()(0, 0);
    };
    const Matrix numeric = numeric_gradient(f, inputs[k], eps);
    worst = std::max(worst, relative_error(leaves[k]->grad(), numeric));
  }
  return worst;
}

/// Reduces any graph output to a scalar with a fixed random projection so
/// that every output entry contributes a distinct weight.
inline ad::Var project(const ad::Var& y, std::uint64_t seed = 99) {
  Rng rng(seed);
  const Matrix w = random_matrix(y->rows(), y->cols(), rng);
  return ad::sum(ad::mul(y, ad::constant(w)));
}

}  // namespace hyperrnn::testing
