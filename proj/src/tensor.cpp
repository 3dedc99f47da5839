#include "sass/tensor.hpp"

#include <algorithm>
#include <string>

#include "sass/error.hpp"

namespace sass {

ComplexVec::ComplexVec(std::vector<double> real, std::vector<double> imag)
    : re(std::move(real)), im(std::move(imag)) {
  if (re.size() != im.size()) {
    throw ShapeError("ComplexVec: re has " + std::to_string(re.size()) +
                     " entries, im has " + std::to_string(im.size()));
  }
}

ComplexVec ComplexVec::from_real(std::span<const double> real) {
  ComplexVec out(real.size());
  std::copy(real.begin(), real.end(), out.re.begin());
  return out;
}

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

namespace {

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw ShapeError("Tensor: rank must be 1..3, got " + std::to_string(shape.size()));
  }
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("Tensor: zero-sized dimension");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_product(shape_)) {
    throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape product " +
                     std::to_string(shape_product(shape_)));
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

}  // namespace sass
