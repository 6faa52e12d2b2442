#pragma once

#include <cstddef>
#include <vector>

#include "med/rng.hpp"

namespace med::nn {

// Dense row-major tensor of doubles (rank 1 or 2 in practice).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  static Tensor vector(std::size_t n) { return Tensor({n}); }
  static Tensor matrix(std::size_t rows, std::size_t cols) {
    return Tensor({rows, cols});
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return v_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t rows() const { return shape_[0]; }
  std::size_t cols() const { return shape_[1]; }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double& at(std::size_t r, std::size_t c) { return v_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const {
    return v_[r * shape_[1] + c];
  }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> v_;
};

// All-zero tensor; rejects zero-sized dimensions.
Tensor zero_init(const std::vector<std::size_t>& shape);

// Ones on the main diagonal up to min(rows, cols), zero elsewhere.
Tensor identity_init(std::size_t rows, std::size_t cols);

// Scaled uniform init, limit sqrt(6 / (fan_in + fan_out)).
Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace med::nn
