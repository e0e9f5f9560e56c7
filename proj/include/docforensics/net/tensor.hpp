#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "docforensics/errors.hpp"

namespace docforensics::net {

/// Dense row-major tensor. Feature maps use shape {C, H, W}.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)), data(count(shape), fill) {}

  static std::size_t count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, [](std::size_t a, int d) { return a * d; });
  }
  std::size_t size() const { return data.size(); }
  int dim(std::size_t i) const { return shape.at(i); }

  T& operator[](std::size_t i) { return data[i]; }
  T operator[](std::size_t i) const { return data[i]; }

  // (c, y, x) access for rank-3 tensors.
  T& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x]; }
  T at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x]; }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

  bool operator==(const Tensor&) const = default;
};

std::string shape_string(const std::vector<int>& shape);

template <typename T>
void expect_shape(const Tensor<T>& t, const std::vector<int>& shape, const char* what) {
  if (t.shape != shape) {
    throw ShapeMismatch(std::string(what) + ": expected " + shape_string(shape) + ", got " + shape_string(t.shape));
  }
}

}  // namespace docforensics::net
