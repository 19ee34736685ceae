#include "radau/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <type_traits>

namespace radau {

namespace {

// Generic interior point used to probe local-function structure.
const double kProbeTau = std::sqrt(5.0) - 2.0;

void check_size(const std::vector<double>& v, std::size_t n, const std::string& what) {
  if (v.size() != n) {
    throw std::invalid_argument(what + ": expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
}

void check_order(const std::vector<double>& lo, const std::vector<double>& hi, const std::string& what) {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (lo[k] > hi[k]) throw std::invalid_argument(what + ": lower bound exceeds upper bound at " + std::to_string(k));
  }
}

// Rethrows the active exception with a context prefix, keeping domain errors
// recognisable to the sparsity detectors.
[[noreturn]] void rethrow_tagged(const std::string& tag) {
  try {
    throw;
  } catch (const std::domain_error& e) {
    throw std::domain_error(tag + ": " + e.what());
  } catch (const std::exception& e) {
    throw EvaluationError(tag + ": " + e.what());
  }
}

template <class T>
void call_tagged(const VectorFunction& f, const char* kind, std::span<const T> in, std::span<T> out) {
  try {
    f(in, out);
  } catch (...) {
    rethrow_tagged(kind);
  }
}

double clamp_guess(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double default_guess(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  return clamp_guess(0.0, lo, hi);
}

std::string point_tag(std::size_t p, std::size_t i) {
  return "phase " + std::to_string(p) + ", collocation point " + std::to_string(i);
}

void normalize(Ocp& ocp) {
  for (auto& ph : ocp.phases) {
    if (ph.y0_lower.empty()) ph.y0_lower = ph.y_lower;
    if (ph.y0_upper.empty()) ph.y0_upper = ph.y_upper;
    if (ph.yf_lower.empty()) ph.yf_lower = ph.y_lower;
    if (ph.yf_upper.empty()) ph.yf_upper = ph.y_upper;
    if (ph.q_lower.empty()) ph.q_lower.assign(ph.n_q, -kInf);
    if (ph.q_upper.empty()) ph.q_upper.assign(ph.n_q, kInf);
  }
  if (ocp.s_lower.empty()) ocp.s_lower.assign(ocp.n_s, -kInf);
  if (ocp.s_upper.empty()) ocp.s_upper.assign(ocp.n_s, kInf);
}

}  // namespace

void OcpPhase::validate(std::size_t n_s) const {
  const std::string tag = "phase '" + name + "'";
  if (n_y == 0) throw std::invalid_argument(tag + ": at least one state is required");
  if (!dynamics || dynamics.n_in() != n_in(n_s) || dynamics.n_out() != n_y) {
    throw std::invalid_argument(tag + ": dynamics must map " + std::to_string(n_in(n_s)) + " inputs to " +
                                std::to_string(n_y) + " rates");
  }
  if (n_c > 0 && (!path || path.n_in() != n_in(n_s) || path.n_out() != n_c)) {
    throw std::invalid_argument(tag + ": path function has the wrong dimensions");
  }
  if (n_q > 0 && (!integrand || integrand.n_in() != n_in(n_s) || integrand.n_out() != n_q)) {
    throw std::invalid_argument(tag + ": integrand function has the wrong dimensions");
  }
  check_size(y_lower, n_y, tag + " y_lower");
  check_size(y_upper, n_y, tag + " y_upper");
  check_size(y0_lower, n_y, tag + " y0_lower");
  check_size(y0_upper, n_y, tag + " y0_upper");
  check_size(yf_lower, n_y, tag + " yf_lower");
  check_size(yf_upper, n_y, tag + " yf_upper");
  check_size(u_lower, n_u, tag + " u_lower");
  check_size(u_upper, n_u, tag + " u_upper");
  check_size(q_lower, n_q, tag + " q_lower");
  check_size(q_upper, n_q, tag + " q_upper");
  check_size(c_lower, n_c, tag + " c_lower");
  check_size(c_upper, n_c, tag + " c_upper");
  check_order(y_lower, y_upper, tag + " y");
  check_order(y0_lower, y0_upper, tag + " y0");
  check_order(yf_lower, yf_upper, tag + " yf");
  check_order(u_lower, u_upper, tag + " u");
  check_order(q_lower, q_upper, tag + " q");
  check_order(c_lower, c_upper, tag + " c");
  if (t0_lower > t0_upper || tf_lower > tf_upper) throw std::invalid_argument(tag + ": inconsistent time bounds");
  if (!guess_y0.empty()) check_size(guess_y0, n_y, tag + " guess_y0");
  if (!guess_yf.empty()) check_size(guess_yf, n_y, tag + " guess_yf");
  if (!guess_u.empty()) check_size(guess_u, n_u, tag + " guess_u");
  if (!guess_q.empty()) check_size(guess_q, n_q, tag + " guess_q");
  for (const auto* v : {&y_scale, &u_scale, &q_scale}) {
    for (double x : *v) {
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument(tag + ": scales must be positive and finite");
    }
  }
  if (!y_scale.empty()) check_size(y_scale, n_y, tag + " y_scale");
  if (!u_scale.empty()) check_size(u_scale, n_u, tag + " u_scale");
  if (!q_scale.empty()) check_size(q_scale, n_q, tag + " q_scale");
}

std::size_t Ocp::endpoint_size() const {
  std::size_t n = n_s;
  for (const auto& ph : phases) n += 2 * ph.n_y + 2 + ph.n_q;
  return n;
}

void Ocp::validate() const {
  if (phases.empty()) throw std::invalid_argument("ocp: at least one phase is required");
  for (const auto& ph : phases) ph.validate(n_s);
  if (!objective || objective.n_in() != endpoint_size() || objective.n_out() != 1) {
    throw std::invalid_argument("ocp: objective must map the " + std::to_string(endpoint_size()) +
                                "-entry endpoint vector to one value");
  }
  if (n_b > 0 && (!events || events.n_in() != endpoint_size() || events.n_out() != n_b)) {
    throw std::invalid_argument("ocp: event function has the wrong dimensions");
  }
  check_size(b_lower, n_b, "ocp b_lower");
  check_size(b_upper, n_b, "ocp b_upper");
  check_order(b_lower, b_upper, "ocp b");
  check_size(s_lower, n_s, "ocp s_lower");
  check_size(s_upper, n_s, "ocp s_upper");
  check_order(s_lower, s_upper, "ocp s");
  if (!guess_s.empty()) check_size(guess_s, n_s, "ocp guess_s");
}

NlpLayout build_layout(const Ocp& ocp, std::span<const Mesh> meshes) {
  if (ocp.phases.empty()) throw std::invalid_argument("build_layout: at least one phase is required");
  if (meshes.size() != 1 && meshes.size() != ocp.phases.size()) {
    throw std::invalid_argument("build_layout: need one mesh per phase or a single shared mesh");
  }
  NlpLayout L;
  std::size_t z = 0;
  std::size_t g = 0;
  for (std::size_t p = 0; p < ocp.phases.size(); ++p) {
    const auto& ph = ocp.phases[p];
    if (ph.n_y == 0) throw std::invalid_argument("build_layout: phase " + std::to_string(p) + " has no states");
    PhaseLayout pl;
    pl.rules = mesh_assemble(meshes.size() == 1 ? meshes[0] : meshes[p]);
    pl.n = static_cast<std::size_t>(pl.rules.tau.size());
    pl.y = z;
    z += (pl.n + 1) * ph.n_y;
    pl.u = z;
    z += pl.n * ph.n_u;
    pl.t0 = z++;
    pl.tf = z++;
    pl.q = z;
    z += ph.n_q;
    pl.defects = g;
    g += pl.n * ph.n_y;
    pl.paths = g;
    g += pl.n * ph.n_c;
    pl.rho = g;
    g += ph.n_q;
    L.phases.push_back(std::move(pl));
  }
  L.s = z;
  z += ocp.n_s;
  L.n_z = z;
  L.events = g;
  g += ocp.n_b;
  L.n_g = g;
  return L;
}

NlpProblem::NlpProblem(Ocp ocp, std::vector<Mesh> meshes, Detector detector)
    : ocp_(std::move(ocp)), detector_(detector) {
  normalize(ocp_);
  ocp_.validate();
  layout_ = build_layout(ocp_, meshes);

  z_lower_.assign(layout_.n_z, -kInf);
  z_upper_.assign(layout_.n_z, kInf);
  g_lower_.assign(layout_.n_g, 0.0);
  g_upper_.assign(layout_.n_g, 0.0);
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    for (std::size_t k = 0; k < ph.n_y; ++k) {
      for (std::size_t i = 0; i <= pl.n; ++i) {
        double lo = ph.y_lower[k];
        double hi = ph.y_upper[k];
        if (i == 0) {
          lo = std::max(lo, ph.y0_lower[k]);
          hi = std::min(hi, ph.y0_upper[k]);
        }
        if (i == pl.n) {
          lo = std::max(lo, ph.yf_lower[k]);
          hi = std::min(hi, ph.yf_upper[k]);
        }
        if (lo > hi) throw std::invalid_argument("phase '" + ph.name + "': endpoint bounds exclude the state bounds");
        z_lower_[pl.Y(i, k)] = lo;
        z_upper_[pl.Y(i, k)] = hi;
      }
    }
    for (std::size_t k = 0; k < ph.n_u; ++k) {
      for (std::size_t i = 0; i < pl.n; ++i) {
        z_lower_[pl.U(i, k)] = ph.u_lower[k];
        z_upper_[pl.U(i, k)] = ph.u_upper[k];
      }
    }
    z_lower_[pl.t0] = ph.t0_lower;
    z_upper_[pl.t0] = ph.t0_upper;
    z_lower_[pl.tf] = ph.tf_lower;
    z_upper_[pl.tf] = ph.tf_upper;
    for (std::size_t k = 0; k < ph.n_q; ++k) {
      z_lower_[pl.Q(k)] = ph.q_lower[k];
      z_upper_[pl.Q(k)] = ph.q_upper[k];
    }
    for (std::size_t c = 0; c < ph.n_c; ++c) {
      for (std::size_t i = 0; i < pl.n; ++i) {
        g_lower_[pl.path_row(i, c)] = ph.c_lower[c];
        g_upper_[pl.path_row(i, c)] = ph.c_upper[c];
      }
    }
  }
  for (std::size_t k = 0; k < ocp_.n_s; ++k) {
    z_lower_[layout_.s + k] = ocp_.s_lower[k];
    z_upper_[layout_.s + k] = ocp_.s_upper[k];
  }
  for (std::size_t k = 0; k < ocp_.n_b; ++k) {
    g_lower_[layout_.events + k] = ocp_.b_lower[k];
    g_upper_[layout_.events + k] = ocp_.b_upper[k];
  }

  phase_data_.resize(ocp_.phases.size());
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& pl = layout_.phases[p];
    auto& pd = phase_data_[p];
    pd.points.resize(pl.n);
    for (std::size_t i = 0; i < pl.n; ++i) {
      pd.points[i].fn = make_local(ocp_.phases[p], pl.rules.tau[static_cast<Eigen::Index>(i)]);
      pd.points[i].weight = pl.rules.weights[static_cast<Eigen::Index>(i)];
    }
  }
  endpoint_ = make_endpoint();
  detect_patterns();
}

VectorFunction NlpProblem::make_local(const OcpPhase& phase, double tau) const {
  const std::size_t ny = phase.n_y;
  const std::size_t nu = phase.n_u;
  const std::size_t nc = phase.n_c;
  const std::size_t nq = phase.n_q;
  const std::size_t ns = ocp_.n_s;
  VectorFunction dyn = phase.dynamics;
  VectorFunction path = phase.path;
  VectorFunction integ = phase.integrand;
  return VectorFunction(ny + nu + 2 + ns, ny + nc + nq, [=](auto x, auto y) {
    using T = std::remove_const_t<typename decltype(x)::element_type>;
    const T& t0 = x[ny + nu];
    const T& tf = x[ny + nu + 1];
    const T half = (tf - t0) * 0.5;
    std::vector<T> in(ny + nu + 1 + ns);
    for (std::size_t k = 0; k < ny + nu; ++k) in[k] = x[k];
    in[ny + nu] = half * tau + (tf + t0) * 0.5;
    for (std::size_t k = 0; k < ns; ++k) in[ny + nu + 1 + k] = x[ny + nu + 2 + k];
    const std::span<const T> cin(in);

    std::vector<T> out(ny);
    call_tagged(dyn, "dynamics", cin, std::span<T>(out));
    for (std::size_t k = 0; k < ny; ++k) y[k] = -half * out[k];
    if (nc > 0) {
      out.assign(nc, T(0.0));
      call_tagged(path, "path", cin, std::span<T>(out));
      for (std::size_t c = 0; c < nc; ++c) y[ny + c] = out[c];
    }
    if (nq > 0) {
      out.assign(nq, T(0.0));
      call_tagged(integ, "integrand", cin, std::span<T>(out));
      for (std::size_t q = 0; q < nq; ++q) y[ny + nc + q] = -half * out[q];
    }
  });
}

VectorFunction NlpProblem::make_endpoint() const {
  const std::size_t ne = ocp_.endpoint_size();
  const std::size_t nb = ocp_.n_b;
  VectorFunction obj = ocp_.objective;
  VectorFunction ev = ocp_.events;
  return VectorFunction(ne, 1 + nb, [=](auto x, auto y) {
    call_tagged(obj, "objective", x, y.subspan(0, 1));
    if (nb > 0) call_tagged(ev, "events", x, y.subspan(1, nb));
  });
}

void NlpProblem::local_input(std::size_t p, std::size_t i, std::span<const double> z, std::span<double> x) const {
  const auto& ph = ocp_.phases[p];
  const auto& pl = layout_.phases[p];
  std::size_t l = 0;
  for (std::size_t k = 0; k < ph.n_y; ++k) x[l++] = z[pl.Y(i, k)];
  for (std::size_t k = 0; k < ph.n_u; ++k) x[l++] = z[pl.U(i, k)];
  x[l++] = z[pl.t0];
  x[l++] = z[pl.tf];
  for (std::size_t k = 0; k < ocp_.n_s; ++k) x[l++] = z[layout_.s + k];
}

std::size_t NlpProblem::local_to_global(std::size_t p, std::size_t i, std::size_t l) const {
  const auto& ph = ocp_.phases[p];
  const auto& pl = layout_.phases[p];
  if (l < ph.n_y) return pl.Y(i, l);
  l -= ph.n_y;
  if (l < ph.n_u) return pl.U(i, l);
  l -= ph.n_u;
  if (l == 0) return pl.t0;
  if (l == 1) return pl.tf;
  return layout_.s + (l - 2);
}

std::size_t NlpProblem::local_row_to_global(std::size_t p, std::size_t i, std::size_t r, bool& weighted) const {
  const auto& ph = ocp_.phases[p];
  const auto& pl = layout_.phases[p];
  weighted = false;
  if (r < ph.n_y) return pl.defect(i, r);
  r -= ph.n_y;
  if (r < ph.n_c) return pl.path_row(i, r);
  r -= ph.n_c;
  weighted = true;
  return pl.rho + r;
}

std::size_t NlpProblem::endpoint_to_global(std::size_t e) const {
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    const std::size_t block = 2 * ph.n_y + 2 + ph.n_q;
    if (e < block) {
      if (e < ph.n_y) return pl.Y(0, e);
      if (e == ph.n_y) return pl.t0;
      if (e < 2 * ph.n_y + 1) return pl.Y(pl.n, e - ph.n_y - 1);
      if (e == 2 * ph.n_y + 1) return pl.tf;
      return pl.Q(e - 2 * ph.n_y - 2);
    }
    e -= block;
  }
  return layout_.s + e;
}

std::vector<double> NlpProblem::endpoint_vector(std::span<const double> z) const {
  std::vector<double> e(ocp_.endpoint_size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = z[endpoint_to_global(k)];
  return e;
}

void NlpProblem::detect_patterns() {
  std::vector<Entry> jac_entries;
  std::vector<Entry> hess_entries;

  auto detect = [&](const VectorFunction& f, const std::vector<double>& lo, const std::vector<double>& hi,
                    JacobianPattern& jp, HessianPattern& hp, const std::string& what) {
    const auto probes = default_probe_points(lo, hi, 3, ocp_.probe_seed);
    if (detector_ == Detector::NaNOverestimate) {
      jp = detect_first_nan(f, probes);
      hp = overestimate_hessian(jp);
    } else {
      auto ex = detect_exact(f, probes);
      jp = std::move(ex.jacobian);
      hp = std::move(ex.hessian);
      for (auto& w : ex.warnings) warnings_.push_back(what + ": " + w);
    }
  };

  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    auto& pd = phase_data_[p];

    std::vector<double> lo;
    std::vector<double> hi;
    lo.insert(lo.end(), ph.y_lower.begin(), ph.y_lower.end());
    hi.insert(hi.end(), ph.y_upper.begin(), ph.y_upper.end());
    lo.insert(lo.end(), ph.u_lower.begin(), ph.u_lower.end());
    hi.insert(hi.end(), ph.u_upper.begin(), ph.u_upper.end());
    lo.push_back(ph.t0_lower);
    hi.push_back(ph.t0_upper);
    lo.push_back(ph.tf_lower);
    hi.push_back(ph.tf_upper);
    lo.insert(lo.end(), ocp_.s_lower.begin(), ocp_.s_lower.end());
    hi.insert(hi.end(), ocp_.s_upper.begin(), ocp_.s_upper.end());
    detect(make_local(ph, kProbeTau), lo, hi, pd.local_jac, pd.local_hess, "phase '" + ph.name + "'");

    // Differentiation-matrix band and the Q identity.
    for (std::size_t I = 0; I < pl.rules.D.size(); ++I) {
      const auto& D = pl.rules.D[I];
      const std::size_t off = pl.rules.offsets[I];
      for (Eigen::Index a = 0; a < D.rows(); ++a) {
        for (Eigen::Index j = 0; j < D.cols(); ++j) {
          for (std::size_t k = 0; k < ph.n_y; ++k) {
            jac_entries.push_back({pl.defect(off + static_cast<std::size_t>(a), k),
                                   pl.Y(off + static_cast<std::size_t>(j), k)});
          }
        }
      }
    }
    for (std::size_t q = 0; q < ph.n_q; ++q) jac_entries.push_back({pl.rho + q, pl.Q(q)});

    for (std::size_t i = 0; i < pl.n; ++i) {
      bool weighted = false;
      for (const auto& e : pd.local_jac.entries()) {
        jac_entries.push_back({local_row_to_global(p, i, e.row, weighted), local_to_global(p, i, e.col)});
      }
      for (const auto& e : pd.local_hess.entries()) {
        hess_entries.push_back({local_to_global(p, i, e.row), local_to_global(p, i, e.col)});
      }
    }
  }

  {
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& ph : ocp_.phases) {
      lo.insert(lo.end(), ph.y0_lower.begin(), ph.y0_lower.end());
      hi.insert(hi.end(), ph.y0_upper.begin(), ph.y0_upper.end());
      lo.push_back(ph.t0_lower);
      hi.push_back(ph.t0_upper);
      lo.insert(lo.end(), ph.yf_lower.begin(), ph.yf_lower.end());
      hi.insert(hi.end(), ph.yf_upper.begin(), ph.yf_upper.end());
      lo.push_back(ph.tf_lower);
      hi.push_back(ph.tf_upper);
      lo.insert(lo.end(), ph.q_lower.begin(), ph.q_lower.end());
      hi.insert(hi.end(), ph.q_upper.begin(), ph.q_upper.end());
    }
    lo.insert(lo.end(), ocp_.s_lower.begin(), ocp_.s_lower.end());
    hi.insert(hi.end(), ocp_.s_upper.begin(), ocp_.s_upper.end());
    detect(endpoint_, lo, hi, endpoint_jac_, endpoint_hess_, "endpoint");
  }
  for (const auto& e : endpoint_jac_.entries()) {
    if (e.row > 0) jac_entries.push_back({layout_.events + e.row - 1, endpoint_to_global(e.col)});
  }
  for (const auto& e : endpoint_hess_.entries()) {
    hess_entries.push_back({endpoint_to_global(e.row), endpoint_to_global(e.col)});
  }

  jac_pattern_ = JacobianPattern(layout_.n_g, layout_.n_z, std::move(jac_entries));
  hess_pattern_ = HessianPattern(layout_.n_z, std::move(hess_entries));

  // Slot maps and the constant part of the Jacobian.
  jac_constant_.assign(jac_pattern_.nnz(), 0.0);
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    auto& pd = phase_data_[p];
    for (std::size_t I = 0; I < pl.rules.D.size(); ++I) {
      const auto& D = pl.rules.D[I];
      const std::size_t off = pl.rules.offsets[I];
      for (Eigen::Index a = 0; a < D.rows(); ++a) {
        for (Eigen::Index j = 0; j < D.cols(); ++j) {
          for (std::size_t k = 0; k < ph.n_y; ++k) {
            const std::size_t slot = jac_pattern_.find(pl.defect(off + static_cast<std::size_t>(a), k),
                                                       pl.Y(off + static_cast<std::size_t>(j), k));
            jac_constant_[slot] += D(a, j);
          }
        }
      }
    }
    for (std::size_t q = 0; q < ph.n_q; ++q) jac_constant_[jac_pattern_.find(pl.rho + q, pl.Q(q))] += 1.0;

    pd.jac_terms.assign(pl.n, {});
    pd.hess_terms.assign(pl.n, {});
    for (std::size_t i = 0; i < pl.n; ++i) {
      const auto& je = pd.local_jac.entries();
      for (std::size_t k = 0; k < je.size(); ++k) {
        bool weighted = false;
        const std::size_t row = local_row_to_global(p, i, je[k].row, weighted);
        pd.jac_terms[i].push_back({jac_pattern_.find(row, local_to_global(p, i, je[k].col)), k, weighted});
      }
      const auto& he = pd.local_hess.entries();
      for (std::size_t k = 0; k < he.size(); ++k) {
        pd.hess_terms[i].push_back(
            {hess_pattern_.find(local_to_global(p, i, he[k].row), local_to_global(p, i, he[k].col)), k, false});
      }
    }
  }
  const auto& ee = endpoint_jac_.entries();
  for (std::size_t k = 0; k < ee.size(); ++k) {
    if (ee[k].row == 0) {
      endpoint_grad_terms_.push_back({endpoint_to_global(ee[k].col), k, false});
    } else {
      endpoint_jac_terms_.push_back(
          {jac_pattern_.find(layout_.events + ee[k].row - 1, endpoint_to_global(ee[k].col)), k, false});
    }
  }
  const auto& eh = endpoint_hess_.entries();
  for (std::size_t k = 0; k < eh.size(); ++k) {
    endpoint_hess_terms_.push_back(
        {hess_pattern_.find(endpoint_to_global(eh[k].row), endpoint_to_global(eh[k].col)), k, false});
  }
}

std::vector<double> NlpProblem::variable_scales() const {
  std::vector<double> d(layout_.n_z, 1.0);
  if (!bound_scaling_) return d;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double lo = z_lower_[i];
    const double hi = z_upper_[i];
    if (std::isfinite(lo) && std::isfinite(hi) && hi > lo) {
      const double a = std::max(std::abs(lo), std::abs(hi));
      if (a > 0.0) d[i] = a;
    }
  }
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& L = layout_.phases[p];
    for (std::size_t k = 0; k < ph.y_scale.size(); ++k)
      for (std::size_t i = 0; i <= L.n; ++i) d[L.Y(i, k)] = ph.y_scale[k];
    for (std::size_t k = 0; k < ph.u_scale.size(); ++k)
      for (std::size_t i = 0; i < L.n; ++i) d[L.U(i, k)] = ph.u_scale[k];
    for (std::size_t k = 0; k < ph.q_scale.size(); ++k) d[L.Q(k)] = ph.q_scale[k];
  }
  return d;
}

std::vector<double> NlpProblem::initial_guess() const {
  std::vector<double> z(layout_.n_z, 0.0);
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    for (std::size_t k = 0; k < ph.n_y; ++k) {
      const double a = ph.guess_y0.empty() ? default_guess(z_lower_[pl.Y(0, k)], z_upper_[pl.Y(0, k)]) : ph.guess_y0[k];
      const double b =
          ph.guess_yf.empty() ? default_guess(z_lower_[pl.Y(pl.n, k)], z_upper_[pl.Y(pl.n, k)]) : ph.guess_yf[k];
      for (std::size_t i = 0; i <= pl.n; ++i) {
        const double s = 0.5 * (pl.rules.support[static_cast<Eigen::Index>(i)] + 1.0);
        z[pl.Y(i, k)] = a + s * (b - a);
      }
    }
    for (std::size_t k = 0; k < ph.n_u; ++k) {
      const double v = ph.guess_u.empty() ? clamp_guess(0.0, ph.u_lower[k], ph.u_upper[k]) : ph.guess_u[k];
      for (std::size_t i = 0; i < pl.n; ++i) z[pl.U(i, k)] = v;
    }
    z[pl.t0] = std::isfinite(ph.guess_t0) ? ph.guess_t0 : default_guess(ph.t0_lower, ph.t0_upper);
    z[pl.tf] = std::isfinite(ph.guess_tf) ? ph.guess_tf : default_guess(ph.tf_lower, ph.tf_upper);
    for (std::size_t k = 0; k < ph.n_q; ++k) {
      z[pl.Q(k)] = ph.guess_q.empty() ? clamp_guess(0.0, ph.q_lower[k], ph.q_upper[k]) : ph.guess_q[k];
    }
  }
  for (std::size_t k = 0; k < ocp_.n_s; ++k) {
    z[layout_.s + k] = ocp_.guess_s.empty() ? default_guess(ocp_.s_lower[k], ocp_.s_upper[k]) : ocp_.guess_s[k];
  }
  return z;
}

double NlpProblem::objective(std::span<const double> z) const {
  if (z.size() != layout_.n_z) throw std::invalid_argument("objective: decision vector has the wrong length");
  const auto e = endpoint_vector(z);
  std::vector<double> y(1 + ocp_.n_b);
  endpoint_(std::span<const double>(e), std::span<double>(y));
  return y[0];
}

void NlpProblem::constraints(std::span<const double> z, std::span<double> g) const {
  if (z.size() != layout_.n_z || g.size() != layout_.n_g) {
    throw std::invalid_argument("constraints: argument has the wrong length");
  }
  std::fill(g.begin(), g.end(), 0.0);
  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    const auto& pd = phase_data_[p];
    for (std::size_t I = 0; I < pl.rules.D.size(); ++I) {
      const auto& D = pl.rules.D[I];
      const std::size_t off = pl.rules.offsets[I];
      for (Eigen::Index a = 0; a < D.rows(); ++a) {
        for (std::size_t k = 0; k < ph.n_y; ++k) {
          double s = 0.0;
          for (Eigen::Index j = 0; j < D.cols(); ++j) s += D(a, j) * z[pl.Y(off + static_cast<std::size_t>(j), k)];
          g[pl.defect(off + static_cast<std::size_t>(a), k)] = s;
        }
      }
    }
    for (std::size_t q = 0; q < ph.n_q; ++q) g[pl.rho + q] = z[pl.Q(q)];

    std::vector<double> x(pd.points.empty() ? 0 : pd.points[0].fn.n_in());
    std::vector<double> y(pd.points.empty() ? 0 : pd.points[0].fn.n_out());
    for (std::size_t i = 0; i < pl.n; ++i) {
      local_input(p, i, z, x);
      try {
        pd.points[i].fn(std::span<const double>(x), std::span<double>(y));
      } catch (...) {
        rethrow_tagged(point_tag(p, i));
      }
      for (std::size_t k = 0; k < ph.n_y; ++k) g[pl.defect(i, k)] += y[k];
      for (std::size_t c = 0; c < ph.n_c; ++c) g[pl.path_row(i, c)] = y[ph.n_y + c];
      for (std::size_t q = 0; q < ph.n_q; ++q) g[pl.rho + q] += pd.points[i].weight * y[ph.n_y + ph.n_c + q];
    }
  }
  if (ocp_.n_b > 0) {
    const auto e = endpoint_vector(z);
    std::vector<double> y(1 + ocp_.n_b);
    endpoint_(std::span<const double>(e), std::span<double>(y));
    for (std::size_t k = 0; k < ocp_.n_b; ++k) g[layout_.events + k] = y[1 + k];
  }
}

void NlpProblem::objective_gradient(std::span<const double> z, std::span<double> grad, const StepRule& rule) const {
  if (z.size() != layout_.n_z || grad.size() != layout_.n_z) {
    throw std::invalid_argument("objective_gradient: argument has the wrong length");
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto e = endpoint_vector(z);
  // Only the objective row is needed here.
  std::vector<Entry> row0;
  for (const auto& t : endpoint_grad_terms_) row0.push_back(endpoint_jac_.entries()[t.local]);
  const JacobianPattern jp(endpoint_jac_.rows(), endpoint_jac_.cols(), std::move(row0));
  const auto vals = jacobian(endpoint_, e, jp, rule);
  for (std::size_t k = 0; k < endpoint_grad_terms_.size(); ++k) {
    grad[endpoint_grad_terms_[k].slot] += vals.values.empty() ? 0.0 : vals.values[k];
  }
}

void NlpProblem::jacobian_values(std::span<const double> z, std::span<double> values, const StepRule& rule) const {
  if (z.size() != layout_.n_z || values.size() != jac_pattern_.nnz()) {
    throw std::invalid_argument("jacobian_values: argument has the wrong length");
  }
  std::copy(jac_constant_.begin(), jac_constant_.end(), values.begin());

  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& pd = phase_data_[p];
    const std::size_t n = pd.points.size();
    const std::size_t n_in = n == 0 ? 0 : pd.points[0].fn.n_in();
    auto point_jac = [&](std::size_t i) {
      std::vector<double> x(n_in);
      local_input(p, i, z, x);
      try {
        return jacobian(pd.points[i].fn, x, pd.local_jac, rule);
      } catch (...) {
        rethrow_tagged(point_tag(p, i));
      }
    };
    auto scatter = [&](std::size_t i, const JacobianValues& jv) {
      if (jv.values.empty()) return;
      const double w = pd.points[i].weight;
      for (const auto& t : pd.jac_terms[i]) values[t.slot] += (t.weighted ? w : 1.0) * jv.values[t.local];
    };

    if (execution_ == Execution::Parallel) {
      std::vector<JacobianValues> buf(n);
      std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        try {
          buf[i] = point_jac(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }
      for (std::size_t i = 0; i < n; ++i) scatter(i, buf[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) scatter(i, point_jac(i));
    }
  }

  if (!endpoint_jac_terms_.empty()) {
    const auto e = endpoint_vector(z);
    const auto jv = jacobian(endpoint_, e, endpoint_jac_, rule);
    for (const auto& t : endpoint_jac_terms_) values[t.slot] += jv.values[t.local];
  }
}

void NlpProblem::hessian_values(std::span<const double> z, double sigma, std::span<const double> lambda,
                                std::span<double> values, const StepRule& rule) const {
  if (z.size() != layout_.n_z || lambda.size() != layout_.n_g || values.size() != hess_pattern_.nnz()) {
    throw std::invalid_argument("hessian_values: argument has the wrong length");
  }
  std::fill(values.begin(), values.end(), 0.0);

  for (std::size_t p = 0; p < ocp_.phases.size(); ++p) {
    const auto& ph = ocp_.phases[p];
    const auto& pl = layout_.phases[p];
    const auto& pd = phase_data_[p];
    if (pd.local_hess.empty()) continue;
    const std::size_t n = pd.points.size();
    const std::size_t n_in = n == 0 ? 0 : pd.points[0].fn.n_in();
    const std::size_t n_out = n == 0 ? 0 : pd.points[0].fn.n_out();

    auto point_hess = [&](std::size_t i) -> HessianValues {
      std::vector<double> w(n_out);
      bool any = false;
      for (std::size_t k = 0; k < ph.n_y; ++k) w[k] = lambda[pl.defect(i, k)];
      for (std::size_t c = 0; c < ph.n_c; ++c) w[ph.n_y + c] = lambda[pl.path_row(i, c)];
      for (std::size_t q = 0; q < ph.n_q; ++q) w[ph.n_y + ph.n_c + q] = lambda[pl.rho + q] * pd.points[i].weight;
      for (double v : w) any = any || v != 0.0;
      if (!any) return {};
      std::vector<double> x(n_in);
      local_input(p, i, z, x);
      try {
        return hessian_weighted(pd.points[i].fn, w, x, pd.local_hess, rule);
      } catch (...) {
        rethrow_tagged(point_tag(p, i));
      }
    };
    auto scatter = [&](std::size_t i, const HessianValues& hv) {
      if (hv.values.empty()) return;
      for (const auto& t : pd.hess_terms[i]) values[t.slot] += hv.values[t.local];
    };

    if (execution_ == Execution::Parallel) {
      std::vector<HessianValues> buf(n);
      std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        try {
          buf[i] = point_hess(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
      }
      for (std::size_t i = 0; i < n; ++i) scatter(i, buf[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) scatter(i, point_hess(i));
    }
  }

  if (!endpoint_hess_terms_.empty()) {
    std::vector<double> w(1 + ocp_.n_b);
    w[0] = sigma;
    bool any = sigma != 0.0;
    for (std::size_t k = 0; k < ocp_.n_b; ++k) {
      w[1 + k] = lambda[layout_.events + k];
      any = any || w[1 + k] != 0.0;
    }
    if (any) {
      const auto e = endpoint_vector(z);
      const auto hv = hessian_weighted(endpoint_, w, e, endpoint_hess_, rule);
      for (const auto& t : endpoint_hess_terms_) values[t.slot] += hv.values[t.local];
    }
  }
}

std::vector<double> phase_times(const NlpProblem& nlp, std::size_t p, std::span<const double> z) {
  const auto& pl = nlp.layout().phases.at(p);
  const double t0 = z[pl.t0];
  const double tf = z[pl.tf];
  std::vector<double> t(pl.n + 1);
  for (std::size_t i = 0; i <= pl.n; ++i) {
    const double tau = pl.rules.support[static_cast<Eigen::Index>(i)];
    t[i] = 0.5 * (tf - t0) * tau + 0.5 * (tf + t0);
  }
  return t;
}

}  // namespace radau
