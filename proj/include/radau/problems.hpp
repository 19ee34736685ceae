#pragma once

// Benchmark problems: the scalar error-study function and three optimal
// control problems (free-flying robot, minimum time-to-climb, space station
// attitude control).  All model functions are generic over the scalar type.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "radau/functions.hpp"
#include "radau/hypercomplex.hpp"
#include "radau/spline.hpp"
#include "radau/transcription.hpp"

namespace radau {

// ---------------------------------------------------------------------------
// Scalar study function f(x) = x^2 / (sin x + x e^x)

template <class T>
T example_function(const T& x) {
  using std::exp;
  using std::sin;
  const T den = sin(x) + x * exp(x);
  if (real_part(den) == 0.0) throw std::domain_error("example function: sin(x) + x*exp(x) = 0");
  return x * x / den;
}

struct ScalarStudy {
  double (*f)(double);
  double (*f1)(double);
  double (*f2)(double);
  VectorFunction fn;  // 1 -> 1, generic form of f
};

double example_first(double x);
double example_second(double x);
ScalarStudy example_scalar();

// ---------------------------------------------------------------------------
// Free-flying robot

struct FreeFlyingConstants {
  static constexpr double alpha = 0.2;
  static constexpr double beta = 0.2;
  static constexpr double u_min = 0.0;
  static constexpr double u_max = 1000.0;
  static constexpr double F_max = 1.0;
  static constexpr std::array<double, 6> y0{-10.0, -10.0, 0.0, 0.0, std::numbers::pi / 2.0, 0.0};
  static constexpr std::array<double, 6> yf{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
};

// y = (x, y, vx, vy, theta, omega), u = (u1..u4)
template <class T>
void free_flying_dynamics(std::span<const T> y, std::span<const T> u, std::span<T> dy) {
  using std::cos;
  using std::sin;
  using C = FreeFlyingConstants;
  const T F1 = u[0] - u[1];
  const T F2 = u[2] - u[3];
  dy[0] = y[2];
  dy[1] = y[3];
  dy[2] = (F1 + F2) * cos(y[4]);
  dy[3] = (F1 + F2) * sin(y[4]);
  dy[4] = y[5];
  dy[5] = C::alpha * F1 - C::beta * F2;
}

Ocp free_flying_robot();

// ---------------------------------------------------------------------------
// Minimum time-to-climb

struct ClimbTables {
  CubicSpline rho;      // rho(h), kg/m^3
  CubicSpline sound;    // A(h), m/s
  CubicSpline cl_alpha; // C_L_alpha(M)
  CubicSpline cd0;      // C_D0(M)
  CubicSpline eta;      // eta(M)
  BicubicSpline thrust; // T(h, M), N

  // Smooth analytic placeholder data sampled on fixed grids.
  static ClimbTables synthetic();
  // Replaces the tables whose files are given (empty path keeps the current one).
  struct Files {
    std::string rho, sound, cl_alpha, cd0, eta, thrust;
  };
  static ClimbTables load(const Files& files, const ClimbTables& fallback);
};

struct ClimbConstants {
  static constexpr double Re = 6378145.0;
  static constexpr double mu = 3.986e14;
  static constexpr double g0 = 9.80665;
  static constexpr double S = 49.2386;
  static constexpr double Isp = 1600.0;
  static constexpr double h0 = 0.0;
  static constexpr double v0 = 129.314;
  static constexpr double gamma0 = 0.0;
  static constexpr double m0_default = 19050.0;
  static constexpr double hf = 19994.88;
  static constexpr double vf = 295.092;
  static constexpr double gammaf = 0.0;
};

// y = (h, v, gamma, m), u = (alpha)
template <class T>
void climb_dynamics(const ClimbTables& tab, std::span<const T> y, std::span<const T> u, std::span<T> dy) {
  using std::cos;
  using std::sin;
  using C = ClimbConstants;
  const T& h = y[0];
  const T& v = y[1];
  const T& gam = y[2];
  const T& m = y[3];
  const T& alpha = u[0];
  const T r = h + C::Re;
  const T M = v / tab.sound(h);
  const T rho = tab.rho(h);
  const T q = 0.5 * rho * v * v;
  const T cla = tab.cl_alpha(M);
  const T CL = cla * alpha;
  const T CD = tab.cd0(M) + tab.eta(M) * cla * alpha * alpha;
  const T L = C::S * q * CL;
  const T D = C::S * q * CD;
  const T thrust = tab.thrust(h, M);
  dy[0] = v * sin(gam);
  dy[1] = (thrust * cos(alpha) - D) / m - C::mu * sin(gam) / (r * r);
  dy[2] = (thrust * sin(alpha) + L) / (m * v) + cos(gam) * (v / r - C::mu / (v * r * r));
  dy[3] = -thrust / (C::g0 * C::Isp);
}

Ocp min_time_climb(const ClimbTables& tables = ClimbTables::synthetic(), double m0 = ClimbConstants::m0_default);

// ---------------------------------------------------------------------------
// Space station attitude control

struct StationConstants {
  static constexpr std::array<double, 9> J{2.80701911616e7,  4.822509936e5,  -1.71675094448e7,
                                           4.822509936e5,    9.5144639344e7, 6.02604448e4,
                                           -1.71675094448e7, 6.02604448e4,   7.6594401336e7};
  static constexpr double omega_orb = 0.06511 * std::numbers::pi / 180.0;
  static constexpr double h_max = 10000.0;
  static constexpr std::array<double, 3> omega0{-9.53807e-6, -1.13633e-3, 5.34728e-6};
  static constexpr std::array<double, 3> r0{2.99637e-3, 1.53345e-1, 3.83598e-3};
  static constexpr std::array<double, 3> h0{5000.0, 5000.0, 5000.0};
  static constexpr double t0 = 0.0;
  static constexpr double tf = 1800.0;
  static const std::array<double, 9>& J_inverse();
};

namespace station {

template <class T>
using Vec3 = std::array<T, 3>;

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
Vec3<T> matvec(const std::array<double, 9>& A, const Vec3<T>& x) {
  Vec3<T> y;
  for (int i = 0; i < 3; ++i) y[i] = A[3 * i] * x[0] + A[3 * i + 1] * x[1] + A[3 * i + 2] * x[2];
  return y;
}

// Columns 2 and 3 of C(r) = I + 2/(1 + r.r) (r^x r^x - r^x).
template <class T>
void C_columns(const Vec3<T>& r, Vec3<T>& c2, Vec3<T>& c3) {
  const T rr = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  const T k = 2.0 / (1.0 + rr);
  // (r^x r^x)_ij = r_i r_j - delta_ij |r|^2 ; (r^x)_ij = -eps_ijk r_k
  c2 = {k * (r[0] * r[1] + r[2]), 1.0 + k * (r[1] * r[1] - rr), k * (r[2] * r[1] - r[0])};
  c3 = {k * (r[0] * r[2] - r[1]), k * (r[1] * r[2] + r[0]), 1.0 + k * (r[2] * r[2] - rr)};
}

template <class T>
Vec3<T> omega_ref(const Vec3<T>& r) {
  Vec3<T> c2, c3;
  C_columns(r, c2, c3);
  const double w = StationConstants::omega_orb;
  return {-w * c2[0], -w * c2[1], -w * c2[2]};
}

template <class T>
Vec3<T> tau_gg(const Vec3<T>& r) {
  Vec3<T> c2, c3;
  C_columns(r, c2, c3);
  const double w = StationConstants::omega_orb;
  Vec3<T> t = cross(c3, matvec(StationConstants::J, c3));
  for (auto& v : t) v = 3.0 * w * w * v;
  return t;
}

// J^-1 {tau_gg(r) - w x (J w + h) - u}
template <class T>
Vec3<T> omega_rate(const Vec3<T>& w, const Vec3<T>& r, const Vec3<T>& h, const Vec3<T>& u) {
  const Vec3<T> tg = tau_gg(r);
  Vec3<T> Jw = matvec(StationConstants::J, w);
  for (int i = 0; i < 3; ++i) Jw[i] = Jw[i] + h[i];
  const Vec3<T> g = cross(w, Jw);
  Vec3<T> rhs;
  for (int i = 0; i < 3; ++i) rhs[i] = tg[i] - g[i] - u[i];
  return matvec(StationConstants::J_inverse(), rhs);
}

// 1/2 [r r^T + I + r^x] (w - w0(r))
template <class T>
Vec3<T> r_rate(const Vec3<T>& w, const Vec3<T>& r) {
  const Vec3<T> w0 = omega_ref(r);
  Vec3<T> d;
  for (int i = 0; i < 3; ++i) d[i] = w[i] - w0[i];
  const T rd = r[0] * d[0] + r[1] * d[1] + r[2] * d[2];
  const Vec3<T> rxd = cross(r, d);
  Vec3<T> out;
  for (int i = 0; i < 3; ++i) out[i] = 0.5 * (r[i] * rd + d[i] + rxd[i]);
  return out;
}

}  // namespace station

// y = (w, r, h), u (3)
template <class T>
void station_dynamics(std::span<const T> y, std::span<const T> u, std::span<T> dy) {
  using station::Vec3;
  const Vec3<T> w{y[0], y[1], y[2]};
  const Vec3<T> r{y[3], y[4], y[5]};
  const Vec3<T> h{y[6], y[7], y[8]};
  const Vec3<T> uu{u[0], u[1], u[2]};
  const Vec3<T> wd = station::omega_rate(w, r, h, uu);
  const Vec3<T> rd = station::r_rate(w, r);
  for (int i = 0; i < 3; ++i) {
    dy[i] = wd[i];
    dy[3 + i] = rd[i];
    dy[6 + i] = uu[i];
  }
}

Ocp space_station();

// ---------------------------------------------------------------------------
// Test problems

// y' = u, min int_0^1 u^2 dt, y(0) = 0, y(1) = 1.  Solution y = t, u = 1.
Ocp linear_test_problem();
// y' = u, min 1/2 int_0^1 (y^2 + u^2) dt, y(0) = 1, y(1) = 0.
// Solution y = sinh(1 - t) / sinh(1).
Ocp lq_regulator_problem();

// "freeflying", "climb", "station", "linear", "lq".
Ocp problem_by_name(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace radau
