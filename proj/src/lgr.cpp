#include "radau/lgr.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace radau {

void legendre_pair(std::size_t n, double x, double& p_n, double& p_nm1) {
  if (n == 0) {
    p_n = 1.0;
    p_nm1 = 0.0;
    return;
  }
  double pm = 1.0;
  double p = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double next = ((2.0 * kk - 1.0) * x * p - (kk - 1.0) * pm) / kk;
    pm = p;
    p = next;
  }
  p_n = p;
  p_nm1 = pm;
}

namespace {

LgrRule compute_rule(std::size_t n) {
  LgrRule rule;
  rule.n = n;
  rule.points.resize(static_cast<Eigen::Index>(n));
  rule.weights.resize(static_cast<Eigen::Index>(n));
  const double nd = static_cast<double>(n);

  rule.points[0] = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    double x = -std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / (2.0 * nd - 1.0));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double pn = 0.0;
      double pnm1 = 0.0;
      legendre_pair(n, x, pn, pnm1);
      const double step = ((1.0 - x) / nd) * (pnm1 + pn) / (pnm1 - pn);
      x -= step;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("lgr_rule: Newton iteration did not converge for n = " + std::to_string(n));
    rule.points[static_cast<Eigen::Index>(i)] = x;
  }
  std::sort(rule.points.data(), rule.points.data() + n);

  rule.weights[0] = 2.0 / (nd * nd);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = rule.points[static_cast<Eigen::Index>(i)];
    double pn = 0.0;
    double pnm1 = 0.0;
    legendre_pair(n, x, pn, pnm1);
    rule.weights[static_cast<Eigen::Index>(i)] = (1.0 - x) / (nd * nd * pnm1 * pnm1);
  }

  // Barycentric differentiation over points plus +1.
  const Eigen::Index m = static_cast<Eigen::Index>(n) + 1;
  Eigen::VectorXd s(m);
  s.head(m - 1) = rule.points;
  s[m - 1] = 1.0;
  Eigen::VectorXd bw = Eigen::VectorXd::Ones(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != j) bw[j] /= (s[j] - s[k]);
    }
  }
  rule.D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j == i) continue;
      rule.D(i, j) = (bw[j] / bw[i]) / (s[i] - s[j]);
      diag -= rule.D(i, j);
    }
    rule.D(i, i) = diag;
  }
  return rule;
}

}  // namespace

const LgrRule& lgr_rule(std::size_t n) {
  if (n < 1) throw std::invalid_argument("lgr_rule: n must be at least 1");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<LgrRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<LgrRule>(compute_rule(n));
  return *slot;
}

double map_time(double tau, double t0, double tf) {
  if (!(tf > t0)) throw std::domain_error("map_time: tf must exceed t0");
  return 0.5 * (tf - t0) * tau + 0.5 * (tf + t0);
}

Mesh Mesh::uniform(std::size_t intervals, std::size_t points_per_interval) {
  if (intervals < 1) throw std::invalid_argument("Mesh::uniform: at least one interval required");
  if (points_per_interval < 1) throw std::invalid_argument("Mesh::uniform: at least one point per interval required");
  Mesh m;
  m.boundaries.resize(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) {
    m.boundaries[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(intervals);
  }
  m.boundaries.back() = 1.0;
  m.counts.assign(intervals, points_per_interval);
  return m;
}

std::size_t Mesh::total_points() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

void Mesh::validate() const {
  if (counts.empty()) throw std::invalid_argument("Mesh: no intervals");
  if (boundaries.size() != counts.size() + 1) throw std::invalid_argument("Mesh: need K + 1 boundaries");
  if (boundaries.front() != -1.0 || boundaries.back() != 1.0) {
    throw std::invalid_argument("Mesh: boundaries must span [-1, 1]");
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (!(boundaries[k + 1] > boundaries[k])) throw std::invalid_argument("Mesh: boundaries must increase");
    if (counts[k] < 1) throw std::invalid_argument("Mesh: every interval needs a collocation point");
  }
}

MeshRules mesh_assemble(const Mesh& mesh) {
  mesh.validate();
  const std::size_t total = mesh.total_points();
  MeshRules out;
  out.tau.resize(static_cast<Eigen::Index>(total));
  out.support.resize(static_cast<Eigen::Index>(total + 1));
  out.weights.resize(static_cast<Eigen::Index>(total));
  std::size_t off = 0;
  for (std::size_t k = 0; k < mesh.intervals(); ++k) {
    const LgrRule& r = lgr_rule(mesh.counts[k]);
    const double a = mesh.boundaries[k];
    const double b = mesh.boundaries[k + 1];
    const double half = 0.5 * (b - a);
    out.offsets.push_back(off);
    for (std::size_t i = 0; i < r.n; ++i) {
      const auto gi = static_cast<Eigen::Index>(off + i);
      const auto li = static_cast<Eigen::Index>(i);
      out.tau[gi] = a + half * (r.points[li] + 1.0);
      out.support[gi] = out.tau[gi];
      out.weights[gi] = half * r.weights[li];
    }
    out.D.push_back(r.D / half);
    off += r.n;
  }
  out.support[static_cast<Eigen::Index>(total)] = 1.0;
  return out;
}

}  // namespace radau
