#pragma once

// Small hand-built optimal control problems for transcription tests.

#include <utility>

#include "radau/transcription.hpp"

namespace radau::testing {

// One state, one control, free endpoints; dynamics and objective supplied.
inline OcpPhase scalar_phase(VectorFunction dynamics, std::size_t n_s = 0) {
  OcpPhase p;
  p.name = "scalar";
  p.n_y = 1;
  p.n_u = 1;
  p.dynamics = std::move(dynamics);
  p.y_lower = p.y0_lower = p.yf_lower = {-10.0};
  p.y_upper = p.y0_upper = p.yf_upper = {10.0};
  p.u_lower = {-10.0};
  p.u_upper = {10.0};
  p.t0_lower = p.t0_upper = 0.0;
  p.tf_lower = p.tf_upper = 2.0;
  (void)n_s;
  return p;
}

inline VectorFunction rate_equals_control(std::size_t n_s = 0) {
  return VectorFunction(3 + n_s, 1, [](auto in, auto out) { out[0] = in[1]; });
}

inline Ocp single_phase(OcpPhase p, std::size_t n_s = 0) {
  Ocp ocp;
  ocp.n_s = n_s;
  ocp.s_lower.assign(n_s, -1.0);
  ocp.s_upper.assign(n_s, 1.0);
  const std::size_t ne = 2 * p.n_y + 2 + p.n_q + n_s;
  const std::size_t yend = p.n_y + 1;
  ocp.phases.push_back(std::move(p));
  ocp.objective = VectorFunction(ne, 1, [yend](auto in, auto out) { out[0] = in[yend]; });
  return ocp;
}

// Two copies of the scalar phase linked by y1(tf) = y2(t0).
inline Ocp two_phase() {
  Ocp ocp;
  auto a = scalar_phase(VectorFunction(3, 1, [](auto in, auto out) { out[0] = in[0] * in[1]; }));
  auto b = a;
  a.name = "first";
  b.name = "second";
  b.t0_lower = b.t0_upper = 2.0;
  b.tf_lower = b.tf_upper = 3.0;
  ocp.phases = {a, b};
  ocp.n_b = 1;
  ocp.b_lower = ocp.b_upper = {0.0};
  // endpoint: [y1(t0), t0, y1(tf), tf, y2(t0), t0, y2(tf), tf]
  ocp.objective = VectorFunction(8, 1, [](auto in, auto out) { out[0] = in[6] * in[6]; });
  ocp.events = VectorFunction(8, 1, [](auto in, auto out) { out[0] = in[2] - in[4]; });
  return ocp;
}

}  // namespace radau::testing
