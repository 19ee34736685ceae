#include "radau/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

namespace radau {

namespace {

void sort_unique(std::vector<Entry>& entries) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
}

std::size_t find_entry(const std::vector<Entry>& entries, Entry e) {
  auto it = std::lower_bound(entries.begin(), entries.end(), e);
  if (it == entries.end() || *it != e) return static_cast<std::size_t>(-1);
  return static_cast<std::size_t>(it - entries.begin());
}

bool sorted_subset(const std::vector<Entry>& a, const std::vector<Entry>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

JacobianPattern::JacobianPattern(std::size_t rows, std::size_t cols, std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.row >= rows_ || e.col >= cols_) {
      throw std::out_of_range("JacobianPattern: entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                              ") outside " + std::to_string(rows_) + " x " + std::to_string(cols_));
    }
  }
  sort_unique(entries_);
}

bool JacobianPattern::contains(std::size_t row, std::size_t col) const { return find(row, col) != npos; }

std::size_t JacobianPattern::find(std::size_t row, std::size_t col) const { return find_entry(entries_, {row, col}); }

bool JacobianPattern::is_subset_of(const JacobianPattern& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && sorted_subset(entries_, other.entries_);
}

HessianPattern::HessianPattern(std::size_t n, std::vector<Entry> entries) : n_(n), entries_(std::move(entries)) {
  for (auto& e : entries_) {
    if (e.row >= n_ || e.col >= n_) {
      throw std::out_of_range("HessianPattern: entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                              ") outside " + std::to_string(n_) + " x " + std::to_string(n_));
    }
    if (e.row < e.col) std::swap(e.row, e.col);
  }
  sort_unique(entries_);
}

bool HessianPattern::contains(std::size_t row, std::size_t col) const { return find(row, col) != npos; }

std::size_t HessianPattern::find(std::size_t row, std::size_t col) const {
  if (row < col) std::swap(row, col);
  return find_entry(entries_, {row, col});
}

bool HessianPattern::is_subset_of(const HessianPattern& other) const {
  return n_ == other.n_ && sorted_subset(entries_, other.entries_);
}

JacobianPattern detect_first_nan(const VectorFunction& f, std::span<const std::vector<double>> probe_points) {
  if (probe_points.empty()) throw std::invalid_argument("detect_first_nan: no probe points");
  const std::size_t n_in = f.n_in();
  const std::size_t n_out = f.n_out();
  std::vector<Entry> entries;
  std::vector<double> x(n_in);
  std::vector<double> y(n_out);
  for (const auto& probe : probe_points) {
    if (probe.size() != n_in) throw std::invalid_argument("detect_first_nan: probe point has the wrong dimension");
    for (std::size_t i = 0; i < n_in; ++i) {
      std::copy(probe.begin(), probe.end(), x.begin());
      x[i] = std::numeric_limits<double>::quiet_NaN();
      try {
        f(std::span<const double>(x), std::span<double>(y));
      } catch (const std::exception& ex) {
        throw DetectionError("NaN dependency detection failed for input " + std::to_string(i) +
                             ": function raised instead of propagating NaN (" + ex.what() + ")");
      }
      for (std::size_t r = 0; r < n_out; ++r) {
        if (std::isnan(y[r])) entries.push_back({r, i});
      }
    }
  }
  return JacobianPattern(n_out, n_in, std::move(entries));
}

HessianPattern overestimate_hessian(const JacobianPattern& jacobian, std::span<const std::size_t> rows) {
  std::vector<std::vector<std::size_t>> deps(jacobian.rows());
  for (const auto& e : jacobian.entries()) deps[e.row].push_back(e.col);

  std::vector<std::size_t> selected(rows.begin(), rows.end());
  if (selected.empty()) {
    selected.resize(jacobian.rows());
    for (std::size_t r = 0; r < jacobian.rows(); ++r) selected[r] = r;
  }

  std::vector<Entry> entries;
  for (std::size_t r : selected) {
    if (r >= jacobian.rows()) throw std::out_of_range("overestimate_hessian: row out of range");
    const auto& d = deps[r];  // ascending by construction
    for (std::size_t a = 0; a < d.size(); ++a) {
      for (std::size_t b = 0; b <= a; ++b) entries.push_back({d[a], d[b]});
    }
  }
  return HessianPattern(jacobian.cols(), std::move(entries));
}

ExactPatterns detect_exact(const VectorFunction& f, std::span<const std::vector<double>> probe_points) {
  if (probe_points.empty()) throw std::invalid_argument("detect_exact: no probe points");
  const std::size_t n_in = f.n_in();
  const std::size_t n_out = f.n_out();

  std::vector<std::set<std::size_t>> row_deps(n_out);
  std::vector<std::set<std::pair<std::size_t, std::size_t>>> row_pairs(n_out);
  ExactPatterns result;
  std::size_t usable = 0;

  std::vector<HyperDual> x(n_in);
  std::vector<HyperDual> y(n_out);
  auto eval = [&](std::span<const double> probe, std::size_t i, std::size_t j) {
    for (std::size_t k = 0; k < n_in; ++k) x[k] = HyperDual(probe[k]);
    x[i].ep1 = 1.0;
    x[j].ep2 = 1.0;
    f(std::span<const HyperDual>(x), std::span<HyperDual>(y));
  };

  for (std::size_t p = 0; p < probe_points.size(); ++p) {
    const auto& probe = probe_points[p];
    if (probe.size() != n_in) throw std::invalid_argument("detect_exact: probe point has the wrong dimension");
    try {
      // Diagonal seeds give every first derivative and the pure seconds.
      std::vector<std::vector<bool>> depends(n_out, std::vector<bool>(n_in, false));
      for (std::size_t i = 0; i < n_in; ++i) {
        eval(probe, i, i);
        for (std::size_t r = 0; r < n_out; ++r) {
          if (y[r].ep1 != 0.0 || y[r].ep12 != 0.0) depends[r][i] = true;
          if (y[r].ep1 != 0.0) row_deps[r].insert(i);
          if (y[r].ep12 != 0.0) row_pairs[r].insert({i, i});
        }
      }
      // Mixed seeds only where some output sees both inputs.
      for (std::size_t i = 0; i < n_in; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          bool needed = false;
          for (std::size_t r = 0; r < n_out && !needed; ++r) needed = depends[r][i] && depends[r][j];
          if (!needed) continue;
          eval(probe, i, j);
          for (std::size_t r = 0; r < n_out; ++r) {
            if (y[r].ep12 != 0.0) row_pairs[r].insert({i, j});
          }
        }
      }
      ++usable;
    } catch (const std::domain_error& ex) {
      result.warnings.push_back("probe point " + std::to_string(p) + " skipped: " + ex.what());
    }
  }
  if (usable == 0) {
    throw DetectionError("exact dependency detection failed at every probe point" +
                         (result.warnings.empty() ? std::string() : ": " + result.warnings.front()));
  }

  std::vector<Entry> jac;
  std::vector<Entry> hess;
  result.row_hessians.reserve(n_out);
  for (std::size_t r = 0; r < n_out; ++r) {
    for (std::size_t c : row_deps[r]) jac.push_back({r, c});
    std::vector<Entry> rh;
    for (const auto& [i, j] : row_pairs[r]) {
      rh.push_back({i, j});
      hess.push_back({i, j});
    }
    result.row_hessians.emplace_back(n_in, std::move(rh));
  }
  result.jacobian = JacobianPattern(n_out, n_in, std::move(jac));
  result.hessian = HessianPattern(n_in, std::move(hess));
  return result;
}

std::vector<std::vector<double>> default_probe_points(std::span<const double> lower, std::span<const double> upper,
                                                      std::size_t count, std::uint64_t seed) {
  if (lower.size() != upper.size()) throw std::invalid_argument("default_probe_points: bound size mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> points(count, std::vector<double>(lower.size()));
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t i = 0; i < lower.size(); ++i) {
      const double u = unit(rng);
      const double lo = lower[i];
      const double hi = upper[i];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        points[p][i] = lo + u * (hi - lo);
      } else {
        // sqrt(2)/2 and the golden-ratio conjugate avoid symmetric accidental zeros.
        const double offset = std::numbers::sqrt2 / 2.0 + (static_cast<double>(p) + u) * (std::numbers::phi - 1.0);
        if (std::isfinite(lo)) {
          points[p][i] = lo + offset;
        } else if (std::isfinite(hi)) {
          points[p][i] = hi - offset;
        } else {
          points[p][i] = offset;
        }
      }
    }
  }
  return points;
}

namespace {

void write_entries(std::ostream& os, std::size_t rows, std::size_t cols, const std::vector<Entry>& entries) {
  os << rows << ' ' << cols << ' ' << entries.size() << '\n';
  for (const auto& e : entries) os << e.row << ' ' << e.col << '\n';
}

std::vector<Entry> read_entries(std::istream& is, std::size_t& rows, std::size_t& cols) {
  std::size_t nnz = 0;
  if (!(is >> rows >> cols >> nnz)) throw std::runtime_error("pattern file: malformed header");
  std::vector<Entry> entries(nnz);
  for (auto& e : entries) {
    if (!(is >> e.row >> e.col)) throw std::runtime_error("pattern file: truncated entry list");
  }
  return entries;
}

}  // namespace

void write_pattern(std::ostream& os, const JacobianPattern& p) { write_entries(os, p.rows(), p.cols(), p.entries()); }

void write_pattern(std::ostream& os, const HessianPattern& p) { write_entries(os, p.size(), p.size(), p.entries()); }

JacobianPattern read_jacobian_pattern(std::istream& is) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  auto entries = read_entries(is, rows, cols);
  return JacobianPattern(rows, cols, std::move(entries));
}

HessianPattern read_hessian_pattern(std::istream& is) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  auto entries = read_entries(is, rows, cols);
  if (rows != cols) throw std::runtime_error("pattern file: Hessian pattern must be square");
  return HessianPattern(rows, std::move(entries));
}

}  // namespace radau
