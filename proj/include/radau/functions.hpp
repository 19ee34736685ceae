#pragma once

// Type-erased vector functions that can be evaluated over real, bicomplex and
// hyper-dual scalars.  Problem code is written once as a generic callable
//
//   [](auto x, auto y) { ... }   // x: std::span<const T>, y: std::span<T>
//
// and wrapped in a VectorFunction, which instantiates it for every scalar type.

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "radau/hypercomplex.hpp"

namespace radau {

template <class T>
using VectorCallback = std::function<void(std::span<const T>, std::span<T>)>;

class VectorFunction {
 public:
  VectorFunction() = default;

  template <class F>
  VectorFunction(std::size_t n_in, std::size_t n_out, F f)
      : n_in_(n_in),
        n_out_(n_out),
        real_([f](std::span<const double> x, std::span<double> y) { f(x, y); }),
        bicomplex_([f](std::span<const Bicomplex> x, std::span<Bicomplex> y) { f(x, y); }),
        hyperdual_([f](std::span<const HyperDual> x, std::span<HyperDual> y) { f(x, y); }) {}

  [[nodiscard]] std::size_t n_in() const { return n_in_; }
  [[nodiscard]] std::size_t n_out() const { return n_out_; }
  [[nodiscard]] bool empty() const { return !real_; }
  explicit operator bool() const { return !empty(); }

  // Outputs are zeroed before the callback runs.
  template <Scalar T>
  void operator()(std::span<const T> x, std::span<T> y) const {
    if (x.size() != n_in_ || y.size() != n_out_) {
      throw std::invalid_argument("VectorFunction: expected " + std::to_string(n_in_) + " inputs and " +
                                  std::to_string(n_out_) + " outputs, got " + std::to_string(x.size()) + " and " +
                                  std::to_string(y.size()));
    }
    for (auto& v : y) v = T(0.0);
    callback<T>()(x, y);
  }

  template <Scalar T>
  std::vector<T> operator()(std::span<const T> x) const {
    std::vector<T> y(n_out_);
    (*this)(x, std::span<T>(y));
    return y;
  }

 private:
  template <class T>
  const VectorCallback<T>& callback() const {
    if constexpr (std::is_same_v<T, double>) {
      return real_;
    } else if constexpr (std::is_same_v<T, Bicomplex>) {
      return bicomplex_;
    } else {
      return hyperdual_;
    }
  }

  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  VectorCallback<double> real_;
  VectorCallback<Bicomplex> bicomplex_;
  VectorCallback<HyperDual> hyperdual_;
};

// Wraps a generic scalar-to-scalar callable `f(T) -> T` as a one-input,
// one-output VectorFunction.
template <class F>
VectorFunction make_scalar_function(F f) {
  return VectorFunction(1, 1, [f](auto x, auto y) { y[0] = f(x[0]); });
}

}  // namespace radau
