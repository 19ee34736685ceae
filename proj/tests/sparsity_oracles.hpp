#pragma once

// Benchmark right-hand sides over [y, u] as plain vector functions, plus the
// hand-derived dependency sets of the free-flying robot dynamics.

#include <set>
#include <utility>

#include "radau/functions.hpp"
#include "radau/problems.hpp"

namespace radau::testing {

inline VectorFunction freeflying_rhs() {
  return VectorFunction(10, 6, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    free_flying_dynamics<T>(x.subspan(0, 6), x.subspan(6, 4), y);
  });
}

inline VectorFunction station_rhs() {
  return VectorFunction(12, 9, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    station_dynamics<T>(x.subspan(0, 9), x.subspan(9, 3), y);
  });
}

inline VectorFunction climb_rhs() {
  static const ClimbTables tables = ClimbTables::synthetic();
  return VectorFunction(5, 4, [](auto x, auto y) {
    using T = typename decltype(y)::value_type;
    climb_dynamics<T>(tables, x.subspan(0, 4), x.subspan(4, 1), y);
  });
}

// Inputs: x=0 y=1 vx=2 vy=3 theta=4 omega=5 u1..u4=6..9.
// Rows: xdot=vx, ydot=vy, vxdot=(F1+F2)cos(theta), vydot=(F1+F2)sin(theta),
// thetadot=omega, omegadot=a*F1-b*F2.
inline std::set<std::pair<std::size_t, std::size_t>> freeflying_row_hessian(std::size_t row) {
  if (row == 2 || row == 3) return {{4, 4}, {6, 4}, {7, 4}, {8, 4}, {9, 4}};
  return {};
}

}  // namespace radau::testing
