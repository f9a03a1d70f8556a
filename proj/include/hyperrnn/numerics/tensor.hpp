#pragma once

#include "hyperrnn/numerics/types.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace hyperrnn {

/// Dense real tensor with an explicit shape. Data is row-major; every entry
/// must be finite.
class RealTensor {
 public:
  RealTensor() = default;
  RealTensor(std::vector<std::size_t> shape, std::vector<double> data);

  static RealTensor from_matrix(const Matrix& m);
  static RealTensor from_vector(const Vector& v);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }
  std::size_t size() const { return data_.size(); }
  double operator[](std::size_t i) const { return data_[i]; }

  /// 1-D tensors become column vectors, 2-D tensors keep rows x cols.
  Matrix to_matrix() const;
  Vector to_vector() const;

  friend bool operator==(const RealTensor&, const RealTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Complex matrix held as a pair of real planes.
struct ComplexMatrix {
  Matrix re;
  Matrix im;

  ComplexMatrix() = default;
  ComplexMatrix(Eigen::Index rows, Eigen::Index cols);
  ComplexMatrix(Matrix real, Matrix imag);

  static ComplexMatrix from_eigen(const Eigen::MatrixXcd& z);
  Eigen::MatrixXcd to_eigen() const;

  Eigen::Index rows() const { return re.rows(); }
  Eigen::Index cols() const { return re.cols(); }
  std::complex<double> operator()(Eigen::Index r, Eigen::Index c) const {
    return {re(r, c), im(r, c)};
  }
  void set(Eigen::Index r, Eigen::Index c, std::complex<double> z) {
    re(r, c) = z.real();
    im(r, c) = z.imag();
  }
  double squared_norm() const { return re.squaredNorm() + im.squaredNorm(); }
};

/// [Re(vec(z)); Im(vec(z))] with column-major vectorisation.
RealTensor c2r(const ComplexMatrix& z);
Vector c2r_vector(const ComplexMatrix& z);

ComplexMatrix r2c(std::span<const double> v, Eigen::Index rows, Eigen::Index cols);
ComplexMatrix r2c(const RealTensor& v, Eigen::Index rows, Eigen::Index cols);

}  // namespace hyperrnn
