#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kws {

// Dense row-major tensor of doubles. Ranks in this project never exceed 3.
// Everything runs at 64-bit precision; the feature cache is the only 32-bit
// surface.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor full(std::vector<int> shape, double v);
  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](std::int64_t i) const {
    return data_[static_cast<size_t>(i)];
  }

  double& at(int r, int c) {
    return data_[static_cast<size_t>(r) * shape_[1] + c];
  }
  double at(int r, int c) const {
    return data_[static_cast<size_t>(r) * shape_[1] + c];
  }
  double& at(int b, int r, int c) {
    return data_[(static_cast<size_t>(b) * shape_[1] + r) * shape_[2] + c];
  }
  double at(int b, int r, int c) const {
    return data_[(static_cast<size_t>(b) * shape_[1] + r) * shape_[2] + c];
  }

  void fill(double v);
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  // Reinterprets the flat buffer under a new shape of equal element count.
  Tensor reshaped(std::vector<int> shape) const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_str(const std::vector<int>& shape);

}  // namespace kws
