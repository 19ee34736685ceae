#pragma once

// Dense central-difference oracles for the black-box NLP functions.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "radau/transcription.hpp"

namespace radau::testing {

inline std::vector<double> constraints_of(const NlpProblem& nlp, const std::vector<double>& z) {
  std::vector<double> g(nlp.n_g());
  nlp.constraints(z, g);
  return g;
}

inline Eigen::MatrixXd dense_jac(const NlpProblem& nlp, const std::vector<double>& vals) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nlp.n_g()), static_cast<Eigen::Index>(nlp.n_z()));
  const auto& e = nlp.jacobian_pattern().entries();
  for (std::size_t k = 0; k < e.size(); ++k) A(e[k].row, e[k].col) = vals[k];
  return A;
}

inline Eigen::MatrixXd dense_hess(const NlpProblem& nlp, const std::vector<double>& vals) {
  const auto n = static_cast<Eigen::Index>(nlp.n_z());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  const auto& e = nlp.hessian_pattern().entries();
  for (std::size_t k = 0; k < e.size(); ++k) {
    H(e[k].row, e[k].col) = vals[k];
    H(e[k].col, e[k].row) = vals[k];
  }
  return H;
}

// Central differences of the black-box constraint function.
inline Eigen::MatrixXd fd_jac(const NlpProblem& nlp, const std::vector<double>& z) {
  Eigen::MatrixXd A(static_cast<Eigen::Index>(nlp.n_g()), static_cast<Eigen::Index>(nlp.n_z()));
  auto zp = z;
  for (std::size_t c = 0; c < z.size(); ++c) {
    const double h = 1e-6 * (1.0 + std::abs(z[c]));
    zp[c] = z[c] + h;
    const auto gp = constraints_of(nlp, zp);
    zp[c] = z[c] - h;
    const auto gm = constraints_of(nlp, zp);
    zp[c] = z[c];
    for (std::size_t r = 0; r < gp.size(); ++r) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (gp[r] - gm[r]) / (2 * h);
  }
  return A;
}

// Central second differences of the black-box Lagrangian.
inline Eigen::MatrixXd fd_hess(const NlpProblem& nlp, const std::vector<double>& z, double sigma,
                        const std::vector<double>& lambda) {
  auto L = [&](const std::vector<double>& x) {
    const auto g = constraints_of(nlp, x);
    double s = sigma * nlp.objective(x);
    for (std::size_t r = 0; r < g.size(); ++r) s += lambda[r] * g[r];
    return s;
  };
  const auto n = static_cast<Eigen::Index>(z.size());
  Eigen::MatrixXd H(n, n);
  auto x = z;
  const double l0 = L(x);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double hi = 1e-4 * (1.0 + std::abs(z[i]));
    for (std::size_t j = 0; j <= i; ++j) {
      const double hj = 1e-4 * (1.0 + std::abs(z[j]));
      double v = 0.0;
      if (i == j) {
        x[i] = z[i] + hi;
        const double lp = L(x);
        x[i] = z[i] - hi;
        const double lm = L(x);
        v = (lp - 2 * l0 + lm) / (hi * hi);
      } else {
        double c[4];
        int k = 0;
        for (double si : {1.0, -1.0}) {
          for (double sj : {1.0, -1.0}) {
            x[i] = z[i] + si * hi;
            x[j] = z[j] + sj * hj;
            c[k++] = L(x);
          }
        }
        v = (c[0] - c[1] - c[2] + c[3]) / (4 * hi * hj);
      }
      x[i] = z[i];
      x[j] = z[j];
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return H;
}

inline std::vector<double> perturbed_guess(const NlpProblem& nlp, std::uint64_t seed) {
  auto z = nlp.initial_guess();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (nlp.z_lower()[k] == nlp.z_upper()[k]) continue;
    z[k] += u(rng) * (1.0 + std::abs(z[k]));
  }
  return z;
}

}  // namespace radau::testing
