#pragma once

// Natural cubic splines (1-D and tensor-product 2-D) evaluable over every
// scalar type.  Queries outside the table are clamped to the end value, with
// a one-time warning on stderr per table.

#include <atomic>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "radau/hypercomplex.hpp"

namespace radau {

namespace detail {
void warn_clamped(const std::string& table, double query, double lo, double hi);
}

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::string name, std::vector<double> x, std::vector<double> y);

  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }
  [[nodiscard]] const std::string& name() const { return name_; }

  template <class T>
  T operator()(const T& q) const {
    const double qr = real_part(q);
    if (std::isnan(qr)) return q;
    std::size_t k = 0;
    if (qr < x_.front() || qr > x_.back()) {
      clamp_warning(qr);
      return T(qr < x_.front() ? y_.front() : y_.back());
    }
    k = interval(qr);
    const double h = x_[k + 1] - x_[k];
    const T a = (x_[k + 1] - q) / h;
    const T b = (q - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * (h * h / 6.0);
  }

 private:
  [[nodiscard]] std::size_t interval(double q) const;
  void clamp_warning(double q) const;

  std::string name_;
  std::vector<double> x_, y_, m_;  // m_: second derivatives
  std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);
};

// Natural spline in the second coordinate per grid row, then a natural spline
// through the row values in the first coordinate.
class BicubicSpline {
 public:
  BicubicSpline() = default;
  // values[i * ny + j] = f(x[i], y[j])
  BicubicSpline(std::string name, std::vector<double> x, std::vector<double> y, std::vector<double> values);

  [[nodiscard]] const std::vector<double>& x() const { return x_; }
  [[nodiscard]] const std::vector<double>& y() const { return y_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  template <class T>
  T operator()(const T& qx, const T& qy) const {
    const double xr = real_part(qx);
    const double yr = real_part(qy);
    if (std::isnan(xr) || std::isnan(yr)) return qx + qy;
    const std::size_t nx = x_.size();
    std::vector<T> col(nx);
    for (std::size_t i = 0; i < nx; ++i) col[i] = rows_[i](qy);
    // Second derivatives along x are linear in the row values.
    T px = qx;
    if (xr < x_.front() || xr > x_.back()) {
      if (!warned_->exchange(true)) detail::warn_clamped(name_, xr, x_.front(), x_.back());
      px = T(xr < x_.front() ? x_.front() : x_.back());
    }
    const std::size_t k = interval(real_part(px));
    T mk(0.0);
    T mk1(0.0);
    for (std::size_t i = 0; i < nx; ++i) {
      mk += second_[k * nx + i] * col[i];
      mk1 += second_[(k + 1) * nx + i] * col[i];
    }
    const double h = x_[k + 1] - x_[k];
    const T a = (x_[k + 1] - px) / h;
    const T b = (px - x_[k]) / h;
    return a * col[k] + b * col[k + 1] + ((a * a * a - a) * mk + (b * b * b - b) * mk1) * (h * h / 6.0);
  }

 private:
  [[nodiscard]] std::size_t interval(double q) const;

  std::string name_;
  std::vector<double> x_, y_, values_;
  std::vector<CubicSpline> rows_;
  std::vector<double> second_;  // nx x nx map from row values to d2/dx2
  std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);
};

// Natural-spline second derivatives for knots x and values y.
std::vector<double> spline_second_derivatives(const std::vector<double>& x, const std::vector<double>& y);

// CSV readers: "x,value" rows and "x,y,value" rows on a rectangular grid.
// A non-numeric first line is treated as a header.
CubicSpline read_table_1d(std::istream& is, const std::string& name);
BicubicSpline read_table_2d(std::istream& is, const std::string& name);
void write_table_1d(std::ostream& os, const CubicSpline& s, const std::string& header);
void write_table_2d(std::ostream& os, const BicubicSpline& s, const std::string& header);

}  // namespace radau
