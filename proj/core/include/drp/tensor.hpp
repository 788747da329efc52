#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace drp {

// Dense row-major tensor of doubles. Rank 1 and 2 cover everything in this
// project; the shape vector is kept general so parameter bookkeeping stays
// uniform.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  std::span<double> view() { return {data_.data(), data_.size()}; }
  std::span<const double> view() const { return {data_.data(), data_.size()}; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  void fill(double v);
  bool all_finite() const;

  std::string shape_str() const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace drp
