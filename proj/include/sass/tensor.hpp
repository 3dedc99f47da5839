#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sass {

// Length-L complex signal stored as two real arrays (structure of arrays).
struct ComplexVec {
  std::vector<double> re;
  std::vector<double> im;

  ComplexVec() = default;
  explicit ComplexVec(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  ComplexVec(std::vector<double> real, std::vector<double> imag);

  static ComplexVec from_real(std::span<const double> real);

  std::size_t size() const { return re.size(); }
  bool empty() const { return re.empty(); }
  bool operator==(const ComplexVec&) const = default;
};

// Dense row-major real array of rank 1 to 3.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::initializer_list<std::size_t> shape) {
    return Tensor(std::vector<std::size_t>(shape));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }

  // Rank-2 helpers; rows() of a rank-1 tensor is 1.
  std::size_t rows() const { return rank() >= 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols() + j]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols(), cols()}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols(), cols()};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v);
  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace sass
