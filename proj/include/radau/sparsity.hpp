#pragma once

// Structural-nonzero patterns for Jacobians and (lower-triangular) Hessians,
// plus the two dependency detectors: NaN propagation and hyper-dual probing.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radau/functions.hpp"

namespace radau {

struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const Entry&, const Entry&) = default;
};

// Row-major sorted, duplicate-free set of (row, col) pairs.
class JacobianPattern {
 public:
  JacobianPattern() = default;
  JacobianPattern(std::size_t rows, std::size_t cols, std::vector<Entry> entries = {});

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t nnz() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] bool contains(std::size_t row, std::size_t col) const;
  // Position of (row, col) in entries(), or npos.
  [[nodiscard]] std::size_t find(std::size_t row, std::size_t col) const;
  [[nodiscard]] bool is_subset_of(const JacobianPattern& other) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const JacobianPattern&, const JacobianPattern&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Entry> entries_;
};

// Lower triangle (row >= col) of a symmetric n x n pattern.  Upper-triangle
// entries passed to the constructor are mirrored.
class HessianPattern {
 public:
  HessianPattern() = default;
  HessianPattern(std::size_t n, std::vector<Entry> entries = {});

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t nnz() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] bool contains(std::size_t row, std::size_t col) const;
  [[nodiscard]] std::size_t find(std::size_t row, std::size_t col) const;
  [[nodiscard]] bool is_subset_of(const HessianPattern& other) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const HessianPattern&, const HessianPattern&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Entry> entries_;
};

class DetectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Marks (row, i) whenever setting input i to NaN makes output `row` NaN at any
// probe point.
JacobianPattern detect_first_nan(const VectorFunction& f, std::span<const std::vector<double>> probe_points);

// Dense lower-triangular block over the inputs each selected row depends on.
// An empty `rows` selects every row of the pattern.
HessianPattern overestimate_hessian(const JacobianPattern& jacobian, std::span<const std::size_t> rows = {});

struct ExactPatterns {
  JacobianPattern jacobian;
  HessianPattern hessian;                 // union over all outputs
  std::vector<HessianPattern> row_hessians;  // one per output
  std::vector<std::string> warnings;      // skipped probe points
};

// Hyper-dual probing of every seed pair.  Any nonzero channel marks an entry.
ExactPatterns detect_exact(const VectorFunction& f, std::span<const std::vector<double>> probe_points);

// Probe points drawn uniformly from [lower, upper] with a fixed seed.  Infinite
// bounds fall back to irrational offsets from zero.
std::vector<std::vector<double>> default_probe_points(std::span<const double> lower, std::span<const double> upper,
                                                      std::size_t count = 3, std::uint64_t seed = 20190731);

// Text format: "rows cols nnz" then one "row col" per line, row-major.
void write_pattern(std::ostream& os, const JacobianPattern& p);
void write_pattern(std::ostream& os, const HessianPattern& p);
JacobianPattern read_jacobian_pattern(std::istream& is);
HessianPattern read_hessian_pattern(std::istream& is);

}  // namespace radau
