#pragma once

// Legendre-Gauss-Radau rules, differentiation matrices and multi-interval meshes.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace radau {

struct LgrRule {
  std::size_t n = 0;
  Eigen::VectorXd points;   // n collocation points in [-1, 1), points[0] = -1
  Eigen::VectorXd weights;  // n quadrature weights
  Eigen::MatrixXd D;        // n x (n + 1), columns over points plus +1
};

// Cached per n; the returned reference stays valid for the life of the program.
const LgrRule& lgr_rule(std::size_t n);

// Legendre polynomial P_n(x) and P_{n-1}(x) by the three-term recurrence.
void legendre_pair(std::size_t n, double x, double& p_n, double& p_nm1);

double map_time(double tau, double t0, double tf);

struct Mesh {
  std::vector<double> boundaries;  // T_0 = -1 < ... < T_K = +1
  std::vector<std::size_t> counts;  // N_k per interval

  static Mesh uniform(std::size_t intervals, std::size_t points_per_interval);
  [[nodiscard]] std::size_t intervals() const { return counts.size(); }
  [[nodiscard]] std::size_t total_points() const;
  void validate() const;
};

struct MeshRules {
  Eigen::VectorXd tau;      // N collocation points on [-1, 1)
  Eigen::VectorXd support;  // N + 1 state points, last is +1
  Eigen::VectorXd weights;  // N weights, sum 2
  std::vector<Eigen::MatrixXd> D;      // per interval, N_k x (N_k + 1), scaled
  std::vector<std::size_t> offsets;    // first collocation index of each interval
};

MeshRules mesh_assemble(const Mesh& mesh);

}  // namespace radau
