#include "radau/spline.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace radau {

namespace detail {
void warn_clamped(const std::string& table, double query, double lo, double hi) {
  std::cerr << "warning: table '" << table << "' queried at " << query << " outside [" << lo << ", " << hi
            << "]; clamping (reported once)\n";
}
}  // namespace detail

namespace {

void check_knots(const std::string& name, const std::vector<double>& x) {
  if (x.size() < 3) throw std::invalid_argument("table '" + name + "' needs at least 3 knots");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("table '" + name + "' knots must increase strictly");
}

std::size_t find_interval(const std::vector<double>& x, double q) {
  auto it = std::upper_bound(x.begin(), x.end(), q);
  std::size_t k = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  return std::min(k, x.size() - 2);
}

std::vector<double> parse_numbers(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    out.push_back(v);
  }
  return out;
}

std::vector<std::vector<double>> read_rows(std::istream& is, std::size_t width, const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> r;
    try {
      r = parse_numbers(line);
    } catch (const std::exception&) {
      if (first) {
        first = false;
        continue;
      }
      throw std::runtime_error("table '" + name + "': bad line '" + line + "'");
    }
    first = false;
    if (r.size() != width) throw std::runtime_error("table '" + name + "': expected " + std::to_string(width) + " columns");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::vector<double> spline_second_derivatives(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // Thomas algorithm on the interior equations.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    const double a = h0 / 6.0;
    const double b = (h0 + h1) / 3.0;
    const double cc = h1 / 6.0;
    const double r = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    d[i] = (r - a * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
  return m;
}

CubicSpline::CubicSpline(std::string name, std::vector<double> x, std::vector<double> y)
    : name_(std::move(name)), x_(std::move(x)), y_(std::move(y)) {
  check_knots(name_, x_);
  if (y_.size() != x_.size()) throw std::invalid_argument("table '" + name_ + "' size mismatch");
  m_ = spline_second_derivatives(x_, y_);
}

std::size_t CubicSpline::interval(double q) const { return find_interval(x_, q); }

void CubicSpline::clamp_warning(double q) const {
  if (!warned_->exchange(true)) detail::warn_clamped(name_, q, x_.front(), x_.back());
}

BicubicSpline::BicubicSpline(std::string name, std::vector<double> x, std::vector<double> y,
                             std::vector<double> values)
    : name_(std::move(name)), x_(std::move(x)), y_(std::move(y)), values_(std::move(values)) {
  check_knots(name_, x_);
  check_knots(name_, y_);
  const std::size_t nx = x_.size();
  const std::size_t ny = y_.size();
  if (values_.size() != nx * ny) throw std::invalid_argument("table '" + name_ + "' size mismatch");
  rows_.reserve(nx);
  for (std::size_t i = 0; i < nx; ++i)
    rows_.emplace_back(name_, y_,
                       std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(i * ny),
                                           values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * ny)));
  second_.assign(nx * nx, 0.0);
  std::vector<double> e(nx, 0.0);
  for (std::size_t j = 0; j < nx; ++j) {
    e[j] = 1.0;
    auto col = spline_second_derivatives(x_, e);
    for (std::size_t i = 0; i < nx; ++i) second_[i * nx + j] = col[i];
    e[j] = 0.0;
  }
}

std::size_t BicubicSpline::interval(double q) const { return find_interval(x_, q); }

CubicSpline read_table_1d(std::istream& is, const std::string& name) {
  auto rows = read_rows(is, 2, name);
  std::vector<double> x, y;
  for (auto& r : rows) {
    x.push_back(r[0]);
    y.push_back(r[1]);
  }
  return CubicSpline(name, std::move(x), std::move(y));
}

BicubicSpline read_table_2d(std::istream& is, const std::string& name) {
  auto rows = read_rows(is, 3, name);
  std::map<std::pair<double, double>, double> grid;
  std::vector<double> xs, ys;
  for (auto& r : rows) {
    if (!grid.emplace(std::make_pair(r[0], r[1]), r[2]).second)
      throw std::runtime_error("table '" + name + "': duplicate grid point");
    xs.push_back(r[0]);
    ys.push_back(r[1]);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (grid.size() != xs.size() * ys.size()) throw std::runtime_error("table '" + name + "' is not a full grid");
  std::vector<double> v;
  v.reserve(grid.size());
  for (double a : xs)
    for (double b : ys) v.push_back(grid.at({a, b}));
  return BicubicSpline(name, std::move(xs), std::move(ys), std::move(v));
}

void write_table_1d(std::ostream& os, const CubicSpline& s, const std::string& header) {
  os << header << '\n';
  char buf[64];
  for (std::size_t i = 0; i < s.x().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.x()[i], s.y()[i]);
    os << buf;
  }
}

void write_table_2d(std::ostream& os, const BicubicSpline& s, const std::string& header) {
  os << header << '\n';
  char buf[96];
  const std::size_t ny = s.y().size();
  for (std::size_t i = 0; i < s.x().size(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.x()[i], s.y()[j], s.values()[i * ny + j]);
      os << buf;
    }
}

}  // namespace radau
