#include "med/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace med::nn {

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (std::size_t d : shape_) n *= d;
  v_.assign(n, 0.0);
}

Tensor zero_init(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw std::invalid_argument("empty shape");
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("zero-sized dimension");
  }
  return Tensor(shape);
}

Tensor identity_init(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("zero-sized dimension");
  Tensor t = Tensor::matrix(rows, cols);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("zero-sized dimension");
  Tensor t = Tensor::matrix(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

}  // namespace med::nn
