#include "hyperrnn/numerics/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace hyperrnn {

RealTensor::RealTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t n = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                                        std::multiplies<>());
  require_dims(n == data_.size(), "RealTensor: shape does not match data length");
  for (double v : data_) {
    if (!std::isfinite(v)) throw DomainError("RealTensor: non-finite entry");
  }
}

RealTensor RealTensor::from_matrix(const Matrix& m) {
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data[k++] = m(r, c);
  return RealTensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                    std::move(data));
}

RealTensor RealTensor::from_vector(const Vector& v) {
  return RealTensor({static_cast<std::size_t>(v.size())},
                    std::vector<double>(v.data(), v.data() + v.size()));
}

Matrix RealTensor::to_matrix() const {
  if (shape_.size() == 1) return to_vector();
  require_dims(shape_.size() == 2, "RealTensor::to_matrix: tensor is not 1-D or 2-D");
  const auto rows = static_cast<Eigen::Index>(shape_[0]);
  const auto cols = static_cast<Eigen::Index>(shape_[1]);
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data_[k++];
  return m;
}

Vector RealTensor::to_vector() const {
  return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size()));
}

ComplexMatrix::ComplexMatrix(Eigen::Index rows, Eigen::Index cols)
    : re(Matrix::Zero(rows, cols)), im(Matrix::Zero(rows, cols)) {}

ComplexMatrix::ComplexMatrix(Matrix real, Matrix imag) : re(std::move(real)), im(std::move(imag)) {
  require_dims(re.rows() == im.rows() && re.cols() == im.cols(),
               "ComplexMatrix: real and imaginary planes differ in shape");
}

ComplexMatrix ComplexMatrix::from_eigen(const Eigen::MatrixXcd& z) {
  return ComplexMatrix(z.real(), z.imag());
}

Eigen::MatrixXcd ComplexMatrix::to_eigen() const {
  Eigen::MatrixXcd z(rows(), cols());
  z.real() = re;
  z.imag() = im;
  return z;
}

Vector c2r_vector(const ComplexMatrix& z) {
  const Eigen::Index n = z.re.size();
  Vector v(2 * n);
  // Eigen storage is column-major, so a flat copy is vec().
  v.head(n) = Eigen::Map<const Vector>(z.re.data(), n);
  v.tail(n) = Eigen::Map<const Vector>(z.im.data(), n);
  return v;
}

RealTensor c2r(const ComplexMatrix& z) { return RealTensor::from_vector(c2r_vector(z)); }

ComplexMatrix r2c(std::span<const double> v, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  require_dims(rows >= 0 && cols >= 0 && static_cast<Eigen::Index>(v.size()) == 2 * n,
               "r2c: length must equal 2*rows*cols");
  ComplexMatrix z(rows, cols);
  z.re = Eigen::Map<const Matrix>(v.data(), rows, cols);
  z.im = Eigen::Map<const Matrix>(v.data() + n, rows, cols);
  return z;
}

ComplexMatrix r2c(const RealTensor& v, Eigen::Index rows, Eigen::Index cols) {
  return r2c(v.data(), rows, cols);
}

}  // namespace hyperrnn
