#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "radau/derivest.hpp"
#include "radau/problems.hpp"
#include "radau/transcription.hpp"

using namespace radau;

namespace {

using Mat = Eigen::MatrixXd;
using M3 = Eigen::Matrix3d;
using V3 = Eigen::Vector3d;

M3 skew(const V3& a) {
  M3 s;
  s << 0, -a(2), a(1), a(2), 0, -a(0), -a(1), a(0), 0;
  return s;
}

M3 inertia() {
  M3 J;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) J(i, j) = StationConstants::J[static_cast<std::size_t>(3 * i + j)];
  }
  return J;
}

// Hand-differentiated Jacobian of the free-flying robot rates over [y, u].
Mat freeflying_jacobian(const std::vector<double>& x) {
  Mat A = Mat::Zero(6, 10);
  const double th = x[4];
  const double F = (x[6] - x[7]) + (x[8] - x[9]);
  A(0, 2) = 1;
  A(1, 3) = 1;
  A(2, 4) = -F * std::sin(th);
  A(3, 4) = F * std::cos(th);
  const double sgn[4] = {1, -1, 1, -1};
  for (int k = 0; k < 4; ++k) {
    A(2, 6 + k) = sgn[k] * std::cos(th);
    A(3, 6 + k) = sgn[k] * std::sin(th);
  }
  A(4, 5) = 1;
  A(5, 6) = 0.2;
  A(5, 7) = -0.2;
  A(5, 8) = -0.2;
  A(5, 9) = 0.2;
  return A;
}

// Column e of C(r) = I + k (R R - R), k = 2 / (1 + r.r), R = r^x, and its
// derivative in r.  With R R e = r (r.e) - e |r|^2 and -R e = e x r.
void C_column(const V3& r, const V3& e, V3& c, M3& dc) {
  const double rr = r.squaredNorm();
  const double k = 2.0 / (1.0 + rr);
  const V3 v = r * r.dot(e) - e * rr + e.cross(r);
  const M3 dv = r.dot(e) * M3::Identity() + r * e.transpose() - 2.0 * e * r.transpose() + skew(e);
  const Eigen::RowVector3d dk = -4.0 * r.transpose() / ((1.0 + rr) * (1.0 + rr));
  c = e + k * v;
  dc = v * dk + k * dv;
}

// Hand-differentiated Jacobian of the station rates over [w, r, h, u].
Mat station_jacobian(const std::vector<double>& x) {
  const V3 w(x[0], x[1], x[2]);
  const V3 r(x[3], x[4], x[5]);
  const V3 h(x[6], x[7], x[8]);
  const M3 J = inertia();
  const M3 Ji = J.inverse();
  const double wo = StationConstants::omega_orb;

  V3 c2, c3;
  M3 dc2, dc3;
  C_column(r, V3::UnitY(), c2, dc2);
  C_column(r, V3::UnitZ(), c3, dc3);

  // tau = 3 wo^2 c3 x (J c3)
  const M3 dtau = 3.0 * wo * wo * (-skew(J * c3) + skew(c3) * J) * dc3;

  Mat A = Mat::Zero(9, 12);
  A.block(0, 0, 3, 3) = -Ji * (skew(w) * J - skew(J * w + h));
  A.block(0, 3, 3, 3) = Ji * dtau;
  A.block(0, 6, 3, 3) = -Ji * skew(w);
  A.block(0, 9, 3, 3) = -Ji;

  const V3 w0 = -wo * c2;
  const M3 dw0 = -wo * dc2;
  const V3 d = w - w0;
  const M3 P = r * r.transpose() + M3::Identity() + skew(r);
  A.block(3, 0, 3, 3) = 0.5 * P;
  A.block(3, 3, 3, 3) = 0.5 * (r.dot(d) * M3::Identity() + r * d.transpose() - skew(d)) - 0.5 * P * dw0;

  A.block(6, 9, 3, 3) = M3::Identity();
  return A;
}

Mat hd_dense(const VectorFunction& f, const std::vector<double>& x) {
  std::vector<Entry> e;
  for (std::size_t r = 0; r < f.n_out(); ++r) {
    for (std::size_t c = 0; c < f.n_in(); ++c) e.push_back({r, c});
  }
  const JacobianPattern pat(f.n_out(), f.n_in(), e);
  const auto J = jacobian(f, x, pat, StepRule::defaults(Method::HyperDual));
  Mat A(f.n_out(), f.n_in());
  for (std::size_t k = 0; k < e.size(); ++k) A(e[k].row, e[k].col) = J.values[k];
  return A;
}

void expect_entrywise_relative(const Mat& want, const Mat& got, double tol) {
  ASSERT_EQ(want.rows(), got.rows());
  ASSERT_EQ(want.cols(), got.cols());
  const double floor = 1e-300;
  for (Eigen::Index i = 0; i < want.rows(); ++i) {
    for (Eigen::Index j = 0; j < want.cols(); ++j) {
      EXPECT_LE(std::abs(want(i, j) - got(i, j)), tol * std::abs(want(i, j)) + floor)
          << "(" << i << ", " << j << ") want " << want(i, j) << " got " << got(i, j);
    }
  }
}

VectorFunction freeflying_rhs() {
  return VectorFunction(10, 6, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    free_flying_dynamics<T>(x.subspan(0, 6), x.subspan(6, 4), y);
  });
}

VectorFunction station_rhs() {
  return VectorFunction(12, 9, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    station_dynamics<T>(x.subspan(0, 9), x.subspan(9, 3), y);
  });
}

}  // namespace

TEST(ScalarStudy, Values) {
  const auto s = example_scalar();
  EXPECT_NEAR(s.f(0.5), 0.1917492, 1e-7);
  EXPECT_NEAR(s.f1(0.5), 0.2742112, 1e-7);
  EXPECT_THROW(s.f(0.0), std::domain_error);
  // Second formula cross-checked against a fine central difference of the first.
  const double h = 1e-5;
  EXPECT_NEAR(s.f2(0.5), (s.f1(0.5 + h) - s.f1(0.5 - h)) / (2 * h), 1e-8);
  EXPECT_NEAR(s.f1(0.9), (s.f(0.9 + h) - s.f(0.9 - h)) / (2 * h), 1e-8);
}

TEST(FreeFlying, DynamicsExamples) {
  std::vector<double> y{0, 0, 0, 0, std::numbers::pi / 2, 0};
  std::vector<double> u{1, 0, 1, 0};
  std::vector<double> dy(6);
  free_flying_dynamics<double>(y, u, dy);
  EXPECT_NEAR(dy[2], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(dy[3], 2.0);
  EXPECT_DOUBLE_EQ(dy[5], 0.0);
}

TEST(FreeFlying, OcpDefinition) {
  const auto ocp = free_flying_robot();
  ASSERT_EQ(ocp.phases.size(), 1u);
  const auto& ph = ocp.phases[0];
  EXPECT_EQ(ph.n_y, 6u);
  EXPECT_EQ(ph.n_u, 4u);
  EXPECT_EQ(ph.n_q, 1u);
  EXPECT_EQ(ph.n_c, 2u);
  const std::vector<double> in{0, 0, 0, 0, 0, 0, 1, 2, 3, 4, 0};
  EXPECT_EQ(ph.integrand(std::span<const double>(in))[0], 10.0);
  const auto c = ph.path(std::span<const double>(in));
  EXPECT_EQ(c[0], -1.0);
  EXPECT_EQ(c[1], -1.0);
  EXPECT_EQ(ph.c_upper, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(ph.y0_lower[4], std::numbers::pi / 2);
  EXPECT_EQ(ph.y0_upper[4], std::numbers::pi / 2);
  EXPECT_EQ(ph.u_lower, std::vector<double>(4, 0.0));
  EXPECT_EQ(ph.u_upper, std::vector<double>(4, 1000.0));
  EXPECT_EQ(ph.tf_lower, 0.1);
  EXPECT_EQ(ph.tf_upper, 100.0);
}

TEST(FreeFlying, AnalyticJacobianOracle) {
  const auto f = freeflying_rhs();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(10);
    for (auto& v : x) v = u(rng);
    expect_entrywise_relative(freeflying_jacobian(x), hd_dense(f, x), 1e-12);
  }
}

TEST(Station, ReferenceAttitude) {
  using station::Vec3;
  const Vec3<double> zero{0, 0, 0};
  Vec3<double> c2, c3;
  station::C_columns(zero, c2, c3);
  EXPECT_EQ(c2, (Vec3<double>{0, 1, 0}));
  EXPECT_EQ(c3, (Vec3<double>{0, 0, 1}));
  const auto w0 = station::omega_ref(zero);
  EXPECT_EQ(w0[1], -StationConstants::omega_orb);
  const auto t = station::tau_gg(zero);
  const double w2 = StationConstants::omega_orb * StationConstants::omega_orb;
  // 3 w^2 e3 x (J e3) = 3 w^2 (-J23, J13, 0)
  EXPECT_DOUBLE_EQ(t[0], -3 * w2 * StationConstants::J[5]);
  EXPECT_DOUBLE_EQ(t[1], 3 * w2 * StationConstants::J[2]);
  EXPECT_EQ(t[2], 0.0);
  const auto rd = station::r_rate(w0, zero);
  for (double v : rd) EXPECT_EQ(v, 0.0);
}

TEST(Station, MomentumRateIsControl) {
  std::vector<double> y(9, 0.0), u{1, 2, 3}, dy(9);
  y[3] = 0.1;
  station_dynamics<double>(y, u, dy);
  EXPECT_EQ(dy[6], 1.0);
  EXPECT_EQ(dy[7], 2.0);
  EXPECT_EQ(dy[8], 3.0);
}

TEST(Station, CMatrixIsRotation) {
  // C(r) is orthogonal for any Rodrigues vector.
  using station::Vec3;
  const Vec3<double> r{0.2, -0.4, 0.7};
  Vec3<double> c2, c3;
  station::C_columns(r, c2, c3);
  const V3 a(c2[0], c2[1], c2[2]);
  const V3 b(c3[0], c3[1], c3[2]);
  EXPECT_NEAR(a.norm(), 1.0, 1e-15);
  EXPECT_NEAR(b.norm(), 1.0, 1e-15);
  EXPECT_NEAR(a.dot(b), 0.0, 1e-15);
}

TEST(Station, InverseInertia) {
  const auto& Ji = StationConstants::J_inverse();
  const M3 J = inertia();
  M3 A;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) A(i, j) = Ji[static_cast<std::size_t>(3 * i + j)];
  }
  EXPECT_TRUE((J * A).isApprox(M3::Identity(), 1e-14));
}

TEST(Station, AnalyticJacobianOracle) {
  const auto f = station_rhs();
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(12);
    for (int k = 0; k < 3; ++k) {
      x[k] = 1e-3 * u(rng);
      x[3 + k] = 0.3 * u(rng);
      x[6 + k] = 5000.0 * u(rng);
      x[9 + k] = 10.0 * u(rng);
    }
    expect_entrywise_relative(station_jacobian(x), hd_dense(f, x), 1e-12);
  }
}

TEST(Station, OcpDefinition) {
  const auto ocp = space_station();
  const auto& ph = ocp.phases[0];
  EXPECT_EQ(ph.n_y, 9u);
  EXPECT_EQ(ph.n_u, 3u);
  EXPECT_EQ(ph.n_c, 1u);
  EXPECT_EQ(ocp.n_b, 6u);
  EXPECT_EQ(ph.c_upper[0], StationConstants::h_max * StationConstants::h_max);
  EXPECT_EQ(ph.tf_lower, 1800.0);
  EXPECT_EQ(ph.tf_upper, 1800.0);
  std::vector<double> in(13, 0.0);
  in[6] = 3000;
  in[7] = 4000;
  in[9] = 2;
  EXPECT_EQ(ph.path(std::span<const double>(in))[0], 25e6);
  EXPECT_EQ(ph.integrand(std::span<const double>(in))[0], 2.0);
  // Events vanish at an equilibrium of the uncontrolled rates.
  std::vector<double> e(ocp.endpoint_size(), 0.0);
  const auto w0 = station::omega_ref(station::Vec3<double>{0, 0, 0});
  for (int k = 0; k < 3; ++k) e[10 + static_cast<std::size_t>(k)] = w0[static_cast<std::size_t>(k)];
  const auto b = ocp.events(std::span<const double>(e));
  for (int k = 3; k < 6; ++k) EXPECT_EQ(b[static_cast<std::size_t>(k)], 0.0);
}

TEST(Climb, AuxiliaryArithmetic) {
  // m' = -T / (g0 Isp): T = 156906.4 N gives -10 kg/s.
  EXPECT_NEAR(-156906.4 / (ClimbConstants::g0 * ClimbConstants::Isp), -10.0, 1e-12);
  // q = rho v^2 / 2
  EXPECT_EQ(0.5 * 1.0 * 2.0 * 2.0, 2.0);
}

TEST(Climb, DynamicsAtZeroThrustAndLift) {
  // With a zero thrust table and alpha = 0 (no lift), gamma' = cos(gamma) (v/r - mu/(v r^2)).
  auto tab = ClimbTables::synthetic();
  std::vector<double> tv(tab.thrust.values().size(), 0.0);
  tab.thrust = BicubicSpline("zero", tab.thrust.x(), tab.thrust.y(), tv);
  const std::vector<double> y{1000.0, 250.0, 0.0, 18000.0};
  const std::vector<double> u{0.0};
  std::vector<double> dy(4);
  climb_dynamics<double>(tab, y, u, dy);
  const double r = 1000.0 + ClimbConstants::Re;
  EXPECT_NEAR(dy[2], 250.0 / r - ClimbConstants::mu / (250.0 * r * r), 1e-15);
  EXPECT_EQ(dy[3], 0.0);
  EXPECT_EQ(dy[0], 0.0);
}

TEST(Climb, MassFlowMatchesThrust) {
  const auto tab = ClimbTables::synthetic();
  const std::vector<double> y{5000.0, 300.0, 0.1, 18000.0};
  const std::vector<double> u{0.05};
  std::vector<double> dy(4);
  climb_dynamics<double>(tab, y, u, dy);
  const double M = 300.0 / tab.sound(5000.0);
  EXPECT_NEAR(dy[3], -tab.thrust(5000.0, M) / (ClimbConstants::g0 * ClimbConstants::Isp), 1e-12);
  EXPECT_NEAR(dy[0], 300.0 * std::sin(0.1), 1e-12);
}

TEST(Climb, OcpDefinition) {
  const auto ocp = min_time_climb();
  const auto& ph = ocp.phases[0];
  EXPECT_EQ(ph.n_y, 4u);
  EXPECT_EQ(ph.n_u, 1u);
  EXPECT_EQ(ph.u_lower[0], -std::numbers::pi / 4);
  EXPECT_EQ(ph.u_upper[0], std::numbers::pi / 4);
  EXPECT_EQ(ph.y0_lower[3], ClimbConstants::m0_default);
  EXPECT_EQ(min_time_climb(ClimbTables::synthetic(), 15000.0).phases[0].y0_lower[3], 15000.0);
  EXPECT_THROW(min_time_climb(ClimbTables::synthetic(), 0.0), std::invalid_argument);
  std::vector<double> e(ocp.endpoint_size(), 0.0);
  e[9] = 321.0;
  EXPECT_EQ(ocp.objective(std::span<const double>(e))[0], 321.0);
}

TEST(Climb, TablesLoadFromFiles) {
  const auto base = ClimbTables::synthetic();
  const std::string path = ::testing::TempDir() + "/rho.csv";
  {
    std::ofstream f(path);
    write_table_1d(f, CubicSpline("rho", {0.0, 10000.0, 20000.0, 30000.0}, {1.0, 0.5, 0.25, 0.125}), "h,rho");
  }
  ClimbTables::Files files;
  files.rho = path;
  const auto t = ClimbTables::load(files, base);
  EXPECT_NEAR(t.rho(10000.0), 0.5, 1e-15);
  EXPECT_EQ(t.sound(1000.0), base.sound(1000.0));
  files.rho = "/nonexistent/rho.csv";
  EXPECT_THROW(ClimbTables::load(files, base), std::runtime_error);
}

TEST(Problems, GenericScalarConsistency) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (const auto& name : problem_names()) {
    const auto ocp = problem_by_name(name);
    const auto& ph = ocp.phases[0];
    std::vector<double> x(ph.n_in(ocp.n_s));
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double lo = k < ph.n_y ? ph.y_lower[k] : (k < ph.n_y + ph.n_u ? ph.u_lower[k - ph.n_y] : 0.0);
      const double hi = k < ph.n_y ? ph.y_upper[k] : (k < ph.n_y + ph.n_u ? ph.u_upper[k - ph.n_y] : 1.0);
      x[k] = std::isfinite(lo) && std::isfinite(hi) ? lo + (hi - lo) * u(rng) : u(rng);
    }
    std::vector<HyperDual> xh(x.begin(), x.end());
    for (const VectorFunction* f : {&ph.dynamics, &ph.path, &ph.integrand}) {
      if (f->empty()) continue;
      const auto yr = (*f)(std::span<const double>(x));
      const auto yh = (*f)(std::span<const HyperDual>(xh));
      for (std::size_t k = 0; k < yr.size(); ++k) EXPECT_EQ(yr[k], yh[k].re) << name;
    }
  }
}

TEST(Problems, Registry) {
  for (const auto& n : problem_names()) {
    EXPECT_NO_THROW(NlpProblem(problem_by_name(n), {Mesh::uniform(1, 3)}, Detector::Exact)) << n;
  }
  EXPECT_THROW(problem_by_name("nosuch"), std::invalid_argument);
}

TEST(Problems, ConstantsManifest) {
  std::ifstream in(RADAU_FIXTURE_DIR "/constants_manifest.txt");
  ASSERT_TRUE(in);
  const double deg = std::numbers::pi / 180.0;
  using FF = FreeFlyingConstants;
  using CC = ClimbConstants;
  using SC = StationConstants;
  const std::map<std::string, double> code{
      {"freeflying.alpha", FF::alpha},        {"freeflying.beta", FF::beta},
      {"freeflying.u_min", FF::u_min},        {"freeflying.u_max", FF::u_max},
      {"freeflying.F_max", FF::F_max},        {"freeflying.x0", FF::y0[0]},
      {"freeflying.y0", FF::y0[1]},           {"freeflying.xf", FF::yf[0]},
      {"freeflying.yf", FF::yf[1]},           {"climb.Re", CC::Re},
      {"climb.mu", CC::mu},                   {"climb.g0", CC::g0},
      {"climb.S", CC::S},                     {"climb.Isp", CC::Isp},
      {"climb.h0", CC::h0},                   {"climb.v0", CC::v0},
      {"climb.gamma0", CC::gamma0},           {"climb.hf", CC::hf},
      {"climb.vf", CC::vf},                   {"climb.gammaf", CC::gammaf},
      {"station.J11", SC::J[0]},              {"station.J12", SC::J[1]},
      {"station.J13", SC::J[2]},              {"station.J22", SC::J[4]},
      {"station.J23", SC::J[5]},              {"station.J33", SC::J[8]},
      {"station.omega_orb_deg", SC::omega_orb / deg},
      {"station.h_max", SC::h_max},           {"station.omega0_1", SC::omega0[0]},
      {"station.omega0_2", SC::omega0[1]},    {"station.omega0_3", SC::omega0[2]},
      {"station.r0_1", SC::r0[0]},            {"station.r0_2", SC::r0[1]},
      {"station.r0_3", SC::r0[2]},            {"station.h0", SC::h0[0]},
      {"station.t0", SC::t0},                 {"station.tf", SC::tf}};
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, text;
    ls >> name >> text;
    const auto it = code.find(name);
    ASSERT_NE(it, code.end()) << name;
    const double v = std::stod(text);
    if (name == "station.omega_orb_deg") {
      EXPECT_NEAR(it->second, v, 1e-15) << name;
    } else {
      EXPECT_EQ(it->second, v) << name;
    }
    ++seen;
  }
  EXPECT_EQ(seen, code.size());
  // Symmetry of J and the equal initial momentum components.
  EXPECT_EQ(SC::J[1], SC::J[3]);
  EXPECT_EQ(SC::J[2], SC::J[6]);
  EXPECT_EQ(SC::J[5], SC::J[7]);
  EXPECT_EQ(SC::h0[1], SC::h0[0]);
  EXPECT_EQ(SC::h0[2], SC::h0[0]);
}
