#include "radau/problems.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <memory>

namespace radau {

namespace {

double den(double x) { return std::sin(x) + x * std::exp(x); }

double checked_den(double x) {
  const double d = den(x);
  if (d == 0.0) throw std::domain_error("example function: sin(x) + x*exp(x) = 0");
  return d;
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

template <class F>
CubicSpline sample(const std::string& name, const std::vector<double>& x, F f) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return CubicSpline(name, x, std::move(y));
}

CubicSpline load_1d(const std::string& path, const std::string& name) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open table file " + path);
  return read_table_1d(is, name);
}

}  // namespace

double example_first(double x) {
  const double d = checked_den(x);
  return x * (2.0 * std::sin(x) - x * std::cos(x) + (x - x * x) * std::exp(x)) / (d * d);
}

double example_second(double x) {
  const double d = checked_den(x);
  const double s = std::sin(x);
  const double c = std::cos(x);
  const double e = std::exp(x);
  const double num = (x * x + 2.0) * s * s + (-4.0 * x * c - 6.0 * x * x * e) * s + 2.0 * x * x * c * c +
                     4.0 * x * x * x * e * c + (x * x * x * x - 2.0 * x * x * x) * e * e;
  return num / (d * d * d);
}

ScalarStudy example_scalar() {
  return ScalarStudy{[](double x) { return example_function(x); }, example_first, example_second,
                     make_scalar_function([](const auto& x) { return example_function(x); })};
}

// ---------------------------------------------------------------------------

Ocp free_flying_robot() {
  using C = FreeFlyingConstants;
  OcpPhase p;
  p.name = "freeflying";
  p.n_y = 6;
  p.n_u = 4;
  p.n_q = 1;
  p.n_c = 2;
  p.dynamics = VectorFunction(11, 6, [](auto in, auto out) {
    free_flying_dynamics(in.subspan(0, 6), in.subspan(6, 4), out);
  });
  p.path = VectorFunction(11, 2, [](auto in, auto out) {
    out[0] = in[6] - in[7];
    out[1] = in[8] - in[9];
  });
  p.integrand = VectorFunction(11, 1, [](auto in, auto out) { out[0] = in[6] + in[7] + in[8] + in[9]; });
  const double pi2 = 2.0 * std::numbers::pi;
  p.y_lower = {-50.0, -50.0, -50.0, -50.0, -pi2, -50.0};
  p.y_upper = {50.0, 50.0, 50.0, 50.0, pi2, 50.0};
  p.y0_lower.assign(C::y0.begin(), C::y0.end());
  p.y0_upper = p.y0_lower;
  p.yf_lower.assign(C::yf.begin(), C::yf.end());
  p.yf_upper = p.yf_lower;
  p.u_lower.assign(4, C::u_min);
  p.u_upper.assign(4, C::u_max);
  p.c_lower.assign(2, -kInf);
  p.c_upper.assign(2, C::F_max);
  p.t0_lower = p.t0_upper = 0.0;
  p.tf_lower = 0.1;
  p.tf_upper = 100.0;
  p.guess_t0 = 0.0;
  p.guess_tf = 12.0;

  Ocp ocp;
  ocp.phases.push_back(std::move(p));
  // endpoint layout: y(t0) 0..5, t0 6, y(tf) 7..12, tf 13, q 14
  ocp.objective = VectorFunction(15, 1, [](auto in, auto out) { out[0] = in[14]; });
  return ocp;
}

// ---------------------------------------------------------------------------

ClimbTables ClimbTables::synthetic() {
  const auto h = grid(-2000.0, 24000.0, 53);
  const auto M = grid(0.0, 4.0, 41);
  ClimbTables t;
  t.rho = sample("rho", h, [](double x) { return 1.225 * std::exp(-x / 7200.0); });
  t.sound = sample("sound", h, [](double x) {
    return x <= 11000.0 ? 340.294 - (340.294 - 295.07) * x / 11000.0 : 295.07;
  });
  t.cl_alpha = sample("cl_alpha", M, [](double m) { return 3.44 + 0.9 * m - 0.45 * m * m; });
  t.cd0 = sample("cd0", M, [](double m) { return 0.013 + 0.01 * m - 0.002 * m * m; });
  t.eta = sample("eta", M, [](double m) { return 0.54 - 0.1 * m + 0.04 * m * m; });
  const auto th = grid(-2000.0, 24000.0, 14);
  const auto tM = grid(0.0, 4.0, 17);
  std::vector<double> v;
  for (double a : th)
    for (double b : tM) v.push_back(1.2e5 * (1.0 + 0.35 * b) * (1.0 - 0.6 * a / 22000.0));
  t.thrust = BicubicSpline("thrust", th, tM, std::move(v));
  return t;
}

ClimbTables ClimbTables::load(const Files& files, const ClimbTables& fallback) {
  ClimbTables t = fallback;
  if (!files.rho.empty()) t.rho = load_1d(files.rho, "rho");
  if (!files.sound.empty()) t.sound = load_1d(files.sound, "sound");
  if (!files.cl_alpha.empty()) t.cl_alpha = load_1d(files.cl_alpha, "cl_alpha");
  if (!files.cd0.empty()) t.cd0 = load_1d(files.cd0, "cd0");
  if (!files.eta.empty()) t.eta = load_1d(files.eta, "eta");
  if (!files.thrust.empty()) {
    std::ifstream is(files.thrust);
    if (!is) throw std::runtime_error("cannot open table file " + files.thrust);
    t.thrust = read_table_2d(is, "thrust");
  }
  return t;
}

Ocp min_time_climb(const ClimbTables& tables, double m0) {
  using C = ClimbConstants;
  if (!(m0 > 0.0)) throw std::invalid_argument("min_time_climb: initial mass must be positive");
  auto tab = std::make_shared<const ClimbTables>(tables);
  OcpPhase p;
  p.name = "climb";
  p.n_y = 4;
  p.n_u = 1;
  p.dynamics = VectorFunction(6, 4, [tab](auto in, auto out) {
    climb_dynamics(*tab, in.subspan(0, 4), in.subspan(4, 1), out);
  });
  const double deg = std::numbers::pi / 180.0;
  p.y_lower = {0.0, 5.0, -40.0 * deg, 22.0};
  p.y_upper = {21031.2, 1000.0, 40.0 * deg, 20410.0};
  p.y0_lower = {C::h0, C::v0, C::gamma0, m0};
  p.y0_upper = p.y0_lower;
  p.yf_lower = {C::hf, C::vf, C::gammaf, 22.0};
  p.yf_upper = {C::hf, C::vf, C::gammaf, 20410.0};
  p.u_lower = {-std::numbers::pi / 4.0};
  p.u_upper = {std::numbers::pi / 4.0};
  p.t0_lower = p.t0_upper = 0.0;
  p.tf_lower = 50.0;
  p.tf_upper = 800.0;
  p.guess_t0 = 0.0;
  p.guess_tf = 300.0;
  p.guess_yf = {C::hf, C::vf, C::gammaf, m0 * 0.9};

  Ocp ocp;
  ocp.phases.push_back(std::move(p));
  // endpoint layout: y(t0) 0..3, t0 4, y(tf) 5..8, tf 9
  ocp.objective = VectorFunction(10, 1, [](auto in, auto out) { out[0] = in[9]; });
  return ocp;
}

// ---------------------------------------------------------------------------

const std::array<double, 9>& StationConstants::J_inverse() {
  static const std::array<double, 9> inv = [] {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = J[3 * i + j];
    const Eigen::Matrix3d mi = m.inverse();
    std::array<double, 9> out{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[3 * i + j] = mi(i, j);
    return out;
  }();
  return inv;
}

Ocp space_station() {
  using C = StationConstants;
  OcpPhase p;
  p.name = "station";
  p.n_y = 9;
  p.n_u = 3;
  p.n_q = 1;
  p.n_c = 1;
  p.dynamics = VectorFunction(13, 9, [](auto in, auto out) {
    station_dynamics(in.subspan(0, 9), in.subspan(9, 3), out);
  });
  p.path = VectorFunction(13, 1, [](auto in, auto out) {
    out[0] = in[6] * in[6] + in[7] * in[7] + in[8] * in[8];
  });
  p.integrand = VectorFunction(13, 1, [](auto in, auto out) {
    out[0] = 0.5 * (in[9] * in[9] + in[10] * in[10] + in[11] * in[11]);
  });
  p.y_lower = {-1e-2, -1e-2, -1e-2, -1.0, -1.0, -1.0, -1.5e4, -1.5e4, -1.5e4};
  for (double v : p.y_lower) p.y_upper.push_back(-v);
  for (auto* a : {&C::omega0, &C::r0, &C::h0}) p.y0_lower.insert(p.y0_lower.end(), a->begin(), a->end());
  p.y0_upper = p.y0_lower;
  p.u_lower.assign(3, -1000.0);
  p.u_upper.assign(3, 1000.0);
  p.c_lower = {-kInf};
  p.c_upper = {C::h_max * C::h_max};
  p.t0_lower = p.t0_upper = C::t0;
  p.tf_lower = p.tf_upper = C::tf;
  p.guess_t0 = C::t0;
  p.guess_tf = C::tf;
  p.guess_yf = p.y0_lower;
  p.y_scale = {1e-3, 1e-3, 1e-3, 0.1, 0.1, 0.1, 1e3, 1e3, 1e3};
  p.u_scale = {10.0, 10.0, 10.0};
  p.q_scale = {1e5};

  Ocp ocp;
  ocp.phases.push_back(std::move(p));
  ocp.n_b = 6;
  ocp.b_lower.assign(6, 0.0);
  ocp.b_upper.assign(6, 0.0);
  // endpoint layout: y(t0) 0..8, t0 9, y(tf) 10..18, tf 19, q 20
  ocp.objective = VectorFunction(21, 1, [](auto in, auto out) { out[0] = in[20]; });
  ocp.events = VectorFunction(21, 6, [](auto in, auto out) {
    using T = std::remove_cvref_t<decltype(out[0])>;
    using station::Vec3;
    const Vec3<T> w{in[10], in[11], in[12]};
    const Vec3<T> r{in[13], in[14], in[15]};
    const Vec3<T> h{in[16], in[17], in[18]};
    const Vec3<T> zero{T(0.0), T(0.0), T(0.0)};
    const Vec3<T> wd = station::omega_rate(w, r, h, zero);
    const Vec3<T> rd = station::r_rate(w, r);
    for (int i = 0; i < 3; ++i) {
      out[i] = wd[i];
      out[3 + i] = rd[i];
    }
  });
  return ocp;
}

// ---------------------------------------------------------------------------

namespace {

Ocp scalar_lq(double y0, double yf, bool regulator) {
  OcpPhase p;
  p.name = regulator ? "lq" : "linear";
  p.n_y = 1;
  p.n_u = 1;
  p.n_q = 1;
  p.dynamics = VectorFunction(3, 1, [](auto in, auto out) { out[0] = in[1]; });
  if (regulator)
    p.integrand = VectorFunction(3, 1, [](auto in, auto out) { out[0] = 0.5 * (in[0] * in[0] + in[1] * in[1]); });
  else
    p.integrand = VectorFunction(3, 1, [](auto in, auto out) { out[0] = in[1] * in[1]; });
  p.y_lower = {-10.0};
  p.y_upper = {10.0};
  p.y0_lower = p.y0_upper = {y0};
  p.yf_lower = p.yf_upper = {yf};
  p.u_lower = {-10.0};
  p.u_upper = {10.0};
  p.t0_lower = p.t0_upper = 0.0;
  p.tf_lower = p.tf_upper = 1.0;
  Ocp ocp;
  ocp.phases.push_back(std::move(p));
  // endpoint layout: y(t0), t0, y(tf), tf, q
  ocp.objective = VectorFunction(5, 1, [](auto in, auto out) { out[0] = in[4]; });
  return ocp;
}

}  // namespace

Ocp linear_test_problem() { return scalar_lq(0.0, 1.0, false); }
Ocp lq_regulator_problem() { return scalar_lq(1.0, 0.0, true); }

Ocp problem_by_name(const std::string& name) {
  if (name == "freeflying") return free_flying_robot();
  if (name == "climb") return min_time_climb();
  if (name == "station") return space_station();
  if (name == "linear") return linear_test_problem();
  if (name == "lq") return lq_regulator_problem();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() { return {"freeflying", "climb", "station", "linear", "lq"}; }

}  // namespace radau
