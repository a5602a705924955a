#include "ww2d/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>

namespace ww2d {

namespace {

using FieldPair = std::pair<SpectralField, SpectralField>;
using PairRhs = std::function<FieldPair(const SpectralField&, const SpectralField&, double)>;

// Exact propagator of the zero-background block (u_t, v_t) = (-v_alpha, i u):
// per mode, L_k = [[0, -ik], [i, 0]] with L_k^2 = k I.
struct Propagator {
  std::vector<cplx> e11, e12, e21, e22;
};

Propagator make_propagator(const PeriodicGrid& g, double dt) {
  Propagator p;
  p.e11.resize(g.n);
  p.e12.resize(g.n);
  p.e21.resize(g.n);
  p.e22.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    const int k = g.mode_of(i);
    cplx c, s_over;  // exp(dt L) = c I + s_over L
    if (k == 0) {
      c = 1.0;
      s_over = dt;
    } else if (k < 0) {
      double w = std::sqrt(static_cast<double>(-k));
      c = std::cos(w * dt);
      s_over = std::sin(w * dt) / w;
    } else {
      double w = std::sqrt(static_cast<double>(k));
      c = std::cosh(w * dt);
      s_over = std::sinh(w * dt) / w;
    }
    p.e11[i] = c;
    p.e12[i] = s_over * cplx(0.0, -static_cast<double>(k));
    p.e21[i] = s_over * cplx(0.0, 1.0);
    p.e22[i] = c;
  }
  return p;
}

FieldPair apply_propagator(const Propagator& p, const FieldPair& uv) {
  const auto& u = uv.first;
  const auto& v = uv.second;
  std::vector<cplx> a(u.n()), b(u.n());
  for (int i = 0; i < u.n(); ++i) {
    a[i] = p.e11[i] * u.coeffs()[i] + p.e12[i] * v.coeffs()[i];
    b[i] = p.e21[i] * u.coeffs()[i] + p.e22[i] * v.coeffs()[i];
  }
  return {SpectralField::from_coeffs(u.grid(), std::move(a)),
          SpectralField::from_coeffs(u.grid(), std::move(b))};
}

FieldPair linear_part(const FieldPair& uv) {
  return {-1.0 * dalpha(uv.second), cplx(0.0, 1.0) * uv.first};
}

FieldPair axpy(const FieldPair& base, double h, const FieldPair& d) {
  return {base.first + h * d.first, base.second + h * d.second};
}

FieldPair generic_step(const FieldPair& u0, double t, double dt, Scheme scheme,
                       const PairRhs& rhs) {
  if (dt == 0.0) return u0;
  if (scheme == Scheme::rk4) {
    auto k1 = rhs(u0.first, u0.second, t);
    auto u2 = axpy(u0, 0.5 * dt, k1);
    auto k2 = rhs(u2.first, u2.second, t + 0.5 * dt);
    auto u3 = axpy(u0, 0.5 * dt, k2);
    auto k3 = rhs(u3.first, u3.second, t + 0.5 * dt);
    auto u4 = axpy(u0, dt, k3);
    auto k4 = rhs(u4.first, u4.second, t + dt);
    return {u0.first + (dt / 6.0) * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first),
            u0.second + (dt / 6.0) * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second)};
  }
  // Lawson (integrating factor) RK4: exact linear propagator, RK4 on the
  // exponentially conjugated nonlinearity. N == 0 reproduces exp(dt L).
  auto E = make_propagator(*u0.first.grid(), dt);
  auto E2 = make_propagator(*u0.first.grid(), 0.5 * dt);
  auto nonlin = [&](const FieldPair& uv, double tt) {
    auto full = rhs(uv.first, uv.second, tt);
    auto lin = linear_part(uv);
    return FieldPair{full.first - lin.first, full.second - lin.second};
  };
  auto N1 = nonlin(u0, t);
  auto Eu = apply_propagator(E, u0);
  auto E2u = apply_propagator(E2, u0);
  auto U2 = axpy(E2u, 0.5 * dt, apply_propagator(E2, N1));
  auto N2 = nonlin(U2, t + 0.5 * dt);
  auto U3 = axpy(E2u, 0.5 * dt, N2);
  auto N3 = nonlin(U3, t + 0.5 * dt);
  auto U4 = axpy(Eu, dt, apply_propagator(E2, N3));
  auto N4 = nonlin(U4, t + dt);
  auto EN1 = apply_propagator(E, N1);
  auto E2N2 = apply_propagator(E2, N2);
  auto E2N3 = apply_propagator(E2, N3);
  return {Eu.first + (dt / 6.0) * (EN1.first + 2.0 * E2N2.first + 2.0 * E2N3.first + N4.first),
          Eu.second +
              (dt / 6.0) * (EN1.second + 2.0 * E2N2.second + 2.0 * E2N3.second + N4.second)};
}

bool finite(const SpectralField& f) {
  for (const auto& c : f.coeffs())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

double min_one_plus(const SpectralField& Wa) {
  double m = std::abs(1.0 + Wa.values()[0]);
  for (const auto& v : Wa.values()) m = std::min(m, std::abs(1.0 + v));
  return m;
}

void warn_step_size(const SolverConfig& cfg, int n) {
  if (cfg.scheme != Scheme::rk4) return;
  const double hard = 2.8 / std::sqrt(n / 2.0);
  if (cfg.dt > hard)
    throw config_error("dt exceeds the rk4 stability bound 2.8/sqrt(n/2)");
  if (cfg.dt > 1.0 / std::sqrt(static_cast<double>(n)))
    std::cerr << "ww2d: warning: dt > 1/sqrt(n), rk4 dispersion accuracy degrades\n";
}

// Gauge maintenance; returns |mean correction|.
double fix_gauge(FullState& s) {
  cplx mw = s.W.mean(), mq = s.Q.mean();
  double drift = std::abs(mw.real()) + std::abs(mq.imag());
  auto wc = s.W.coeffs();
  auto qc = s.Q.coeffs();
  wc[0] = cplx(0.0, mw.imag());
  qc[0] = cplx(mq.real(), 0.0);
  s.W = SpectralField::from_coeffs(s.W.grid(), std::move(wc));
  s.Q = SpectralField::from_coeffs(s.Q.grid(), std::move(qc));
  return drift;
}

double fix_gauge(DiffState& s) {
  cplx m = s.Wa.mean();
  double drift = std::abs(m);
  auto c = s.Wa.coeffs();
  c[0] = 0.0;
  s.Wa = SpectralField::from_coeffs(s.Wa.grid(), std::move(c));
  return drift;
}

SpectralField maintain(const SpectralField& f, bool do_dealias) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  const int cut = g.dealias_cutoff();
  for (int i = 0; i < f.n(); ++i) {
    int k = g.mode_of(i);
    if (k > 0 || (do_dealias && std::abs(k) > cut)) c[i] = 0.0;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

DiffState diff_view(const FullState& s, double delta_J) { return to_diff(s, delta_J); }
const DiffState& diff_view(const DiffState& s, double) { return s; }

SpectralField wa_of(const FullState& s) { return dalpha(s.W); }
const SpectralField& wa_of(const DiffState& s) { return s.Wa; }

FullState reconstruct_pair(const FullState& s, const DiffState&) { return s; }

FullState reconstruct_pair(const DiffState&, const DiffState& d) {
  // Gauge-fixed reconstruction for the E_full diagnostic: W and Q as the
  // mean-free antiderivatives of Wa and R(1+Wa).
  auto wa_centered = d.Wa - SpectralField::constant(d.Wa.grid(), d.Wa.mean());
  auto W = invert_dalpha(wa_centered);
  auto Qa = multiply(d.R, SpectralField::constant(d.Wa.grid(), 1.0) + d.Wa);
  auto Qa_centered = Qa - SpectralField::constant(d.Wa.grid(), Qa.mean());
  return FullState{W, invert_dalpha(Qa_centered), d.t};
}

template <class StateT>
DiagRow make_row(const StateT& s, double holo_res, const SolverConfig& cfg) {
  DiagRow row;
  row.t = s.t;
  auto d = diff_view(s, cfg.delta_J);
  row.E_full = energy_full(reconstruct_pair(s, d));
  row.E0_lin = energy_lin0(d.Wa, d.R);
  auto cp = control_params(d.Wa, d.R, cfg.delta_J);
  row.A = cp.A;
  row.B = cp.B;
  row.A14 = cp.A14;
  row.Asharp = cp.Asharp;
  row.Hs34_pair = pair_norm(d.Wa, d.R, 0.75, /*homogeneous=*/true);
  row.minJroot = min_one_plus(d.Wa);
  row.holo_residual = holo_res;
  return row;
}

template <class StateT>
FieldPair state_fields(const StateT& s);
template <>
FieldPair state_fields(const FullState& s) { return {s.W, s.Q}; }
template <>
FieldPair state_fields(const DiffState& s) { return {s.Wa, s.R}; }

FullState fields_to_state(const FullState&, FieldPair p, double t) {
  return FullState{std::move(p.first), std::move(p.second), t};
}
DiffState fields_to_state(const DiffState&, FieldPair p, double t) {
  return DiffState{std::move(p.first), std::move(p.second), t};
}

template <class StateT>
PairRhs make_rhs(const SolverConfig& cfg);

template <>
PairRhs make_rhs<FullState>(const SolverConfig& cfg) {
  return [cfg](const SpectralField& W, const SpectralField& Q, double t) -> FieldPair {
    auto r = rhs_full(FullState{W, Q, t}, cfg.dealias, cfg.delta_J);
    return {std::move(r.first_t), std::move(r.second_t)};
  };
}

template <>
PairRhs make_rhs<DiffState>(const SolverConfig& cfg) {
  return [cfg](const SpectralField& Wa, const SpectralField& R, double t) -> FieldPair {
    auto r = rhs_diff(DiffState{Wa, R, t}, cfg.dealias, cfg.delta_J);
    return {std::move(r.first_t), std::move(r.second_t)};
  };
}

template <class StateT>
Trajectory<StateT> run_impl(const StateT& initial, const SolverConfig& cfg) {
  cfg.validate();
  validate(initial);
  warn_step_size(cfg, state_fields(initial).first.n());

  Trajectory<StateT> traj;
  auto rhs = make_rhs<StateT>(cfg);
  StateT state = initial;
  double holo_max = 0.0;
  long records = 0;

  auto record = [&](const StateT& s, bool force_snapshot = false) {
    const bool keep = force_snapshot || (cfg.snapshot_every > 0 &&
                                         records % cfg.snapshot_every == 0);
    if (keep) traj.snapshots.push_back(s);
    traj.diagnostics.push_back(make_row(s, holo_max, cfg));
    holo_max = 0.0;
    ++records;
  };

  {
    auto uv0 = state_fields(state);
    if (!finite(uv0.first) || !finite(uv0.second)) {
      traj.status = {false, BlowupReason::nan, state.t};
      traj.snapshots.push_back(state);
      return traj;
    }
    if (min_one_plus(wa_of(state)) < cfg.delta_J) {
      traj.status = {false, BlowupReason::corner, state.t};
      traj.snapshots.push_back(state);
      return traj;
    }
    auto st0 = detect_blowup(diff_view(state, cfg.delta_J), cfg);
    if (!st0.completed) {
      traj.status = st0;
      traj.snapshots.push_back(state);
      return traj;
    }
  }
  record(state, /*force_snapshot=*/true);

  const long n_steps = std::lround(std::ceil(cfg.t_max / cfg.dt - 1e-12));
  for (long i = 1; i <= n_steps; ++i) {
    double t0 = state.t;
    double dt = std::min(cfg.dt, cfg.t_max - t0);
    if (dt <= 0) break;

    auto uv = generic_step(state_fields(state), t0, dt, cfg.scheme, rhs);
    if (!finite(uv.first) || !finite(uv.second)) {
      traj.status = {false, BlowupReason::nan, t0 + dt};
      break;
    }
    holo_max = std::max({holo_max, holo_residual(uv.first), holo_residual(uv.second)});
    uv.first = maintain(uv.first, cfg.dealias);
    uv.second = maintain(uv.second, cfg.dealias);
    state = fields_to_state(state, std::move(uv), t0 + dt);
    traj.gauge_drift += fix_gauge(state);

    // Cheap per-step guards; the full detector runs at record points.
    if (min_one_plus(wa_of(state)) < cfg.delta_J) {
      traj.status = {false, BlowupReason::corner, state.t};
      traj.snapshots.push_back(state);
      break;
    }
    if (i % cfg.record_every == 0 || i == n_steps) {
      auto st = detect_blowup(diff_view(state, cfg.delta_J), cfg);
      if (!st.completed) {
        traj.status = st;
        record(state, /*force_snapshot=*/true);
        break;
      }
      record(state, /*force_snapshot=*/i == n_steps);
    }
  }
  return traj;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(dt > 0)) throw config_error("SolverConfig: dt must be positive");
  if (!(t_max > 0)) throw config_error("SolverConfig: t_max must be positive");
  if (!(delta_J > 0 && delta_J < 1)) throw config_error("SolverConfig: delta_J must lie in (0,1)");
  if (!(A_max > 0) || !(norm_cap > 0)) throw config_error("SolverConfig: caps must be positive");
  if (record_every < 1) throw config_error("SolverConfig: record_every must be >= 1");
  if (snapshot_every < 0) throw config_error("SolverConfig: snapshot_every must be >= 0");
}

std::string to_string(BlowupReason r) {
  switch (r) {
    case BlowupReason::none: return "none";
    case BlowupReason::corner: return "corner";
    case BlowupReason::control_norm: return "control_norm";
    case BlowupReason::norm_cap: return "norm_cap";
    case BlowupReason::nan: return "nan";
  }
  return "?";
}

FullState step(const FullState& s, double dt, Scheme scheme, const SolverConfig& cfg) {
  auto uv = generic_step(state_fields(s), s.t, dt, scheme, make_rhs<FullState>(cfg));
  return FullState{std::move(uv.first), std::move(uv.second), s.t + dt};
}

DiffState step(const DiffState& s, double dt, Scheme scheme, const SolverConfig& cfg) {
  auto uv = generic_step(state_fields(s), s.t, dt, scheme, make_rhs<DiffState>(cfg));
  return DiffState{std::move(uv.first), std::move(uv.second), s.t + dt};
}

RunStatus detect_blowup(const DiffState& s, const SolverConfig& cfg) {
  if (!finite(s.Wa) || !finite(s.R)) return {false, BlowupReason::nan, s.t};
  if (min_one_plus(s.Wa) < cfg.delta_J) return {false, BlowupReason::corner, s.t};
  auto cp = control_params(s.Wa, s.R, cfg.delta_J);
  if (cp.A > cfg.A_max) return {false, BlowupReason::control_norm, s.t};
  if (pair_norm(s.Wa, s.R, 0.75, true) > cfg.norm_cap)
    return {false, BlowupReason::norm_cap, s.t};
  return {true, BlowupReason::none, s.t};
}

FullTrajectory run_full(const FullState& initial, const SolverConfig& cfg) {
  return run_impl(initial, cfg);
}

DiffTrajectory run_diff(const DiffState& initial, const SolverConfig& cfg) {
  return run_impl(initial, cfg);
}

std::string trajectory_csv(const std::vector<DiagRow>& rows) {
  std::string out = "t,E_full,E0_lin,A,B,A14,Asharp,Hs34_pair,minJroot,holo_residual\n";
  char buf[400];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.E_full,
                  r.E0_lin, r.A, r.B, r.A14, r.Asharp, r.Hs34_pair, r.minJroot, r.holo_residual);
    out += buf;
  }
  return out;
}

namespace {

LinTrajectory solve_lin_impl(const std::vector<DiffState>& bg_snaps, const SpectralField& w0,
                             const SpectralField& r0, const SolverConfig& cfg, LinFlow flow) {
  cfg.validate();
  if (bg_snaps.size() < 2) throw config_error("solve_linearized_along: need >= 2 snapshots");
  for (size_t i = 1; i < bg_snaps.size(); ++i)
    if (bg_snaps[i].t - bg_snaps[i - 1].t > 5.0 * cfg.dt + 1e-12)
      throw config_error("solve_linearized_along: snapshot spacing exceeds 5 dt");
  if (bg_snaps.back().t < cfg.t_max - 1e-12)
    throw config_error("solve_linearized_along: background does not cover the horizon");

  auto bg_at = [&](double t) {
    size_t hi = 1;
    while (hi + 1 < bg_snaps.size() && bg_snaps[hi].t < t) ++hi;
    const auto& s0 = bg_snaps[hi - 1];
    const auto& s1 = bg_snaps[hi];
    double span = s1.t - s0.t;
    double lam = span > 0 ? std::clamp((t - s0.t) / span, 0.0, 1.0) : 0.0;
    DiffState mix{s0.Wa + lam * (s1.Wa - s0.Wa), s0.R + lam * (s1.R - s0.R), t};
    return detail::derived_fields_light(mix, cfg.delta_J);
  };

  PairRhs rhs = [&](const SpectralField& w, const SpectralField& r, double t) -> FieldPair {
    auto bg = bg_at(t);
    auto out = (flow == LinFlow::linearized) ? rhs_linearized(bg, w, r, cfg.dealias)
                                             : rhs_paralin(bg, w, r);
    return {std::move(out.first_t), std::move(out.second_t)};
  };

  LinTrajectory traj;
  LinState state{w0, r0, bg_snaps.front().t};
  auto record = [&](const LinState& s) {
    traj.snapshots.push_back(s);
    auto bg = bg_at(s.t);
    traj.diagnostics.push_back(
        {s.t, energy_paralin0(bg, s.w, s.r), pair_norm(s.w, s.r, 0.0, false)});
  };
  record(state);

  const long n_steps = std::lround(std::ceil(cfg.t_max / cfg.dt - 1e-12));
  for (long i = 1; i <= n_steps; ++i) {
    double dt = std::min(cfg.dt, cfg.t_max - state.t);
    if (dt <= 0) break;
    auto uv = generic_step({state.w, state.r}, state.t, dt, cfg.scheme, rhs);
    uv.first = maintain(uv.first, cfg.dealias);
    uv.second = maintain(uv.second, cfg.dealias);
    state = LinState{std::move(uv.first), std::move(uv.second), state.t + dt};
    if (i % cfg.record_every == 0 || i == n_steps) record(state);
  }
  return traj;
}

}  // namespace

LinTrajectory solve_linearized_along(const DiffTrajectory& traj, const SpectralField& w0,
                                     const SpectralField& r0, const SolverConfig& cfg,
                                     LinFlow flow) {
  if (!traj.status.completed)
    throw config_error("solve_linearized_along: background trajectory did not complete");
  return solve_lin_impl(traj.snapshots, w0, r0, cfg, flow);
}

LinTrajectory solve_linearized_along(const FullTrajectory& traj, const SpectralField& w0,
                                     const SpectralField& r0, const SolverConfig& cfg,
                                     LinFlow flow) {
  if (!traj.status.completed)
    throw config_error("solve_linearized_along: background trajectory did not complete");
  std::vector<DiffState> snaps;
  snaps.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) snaps.push_back(to_diff(s, cfg.delta_J));
  return solve_lin_impl(snaps, w0, r0, cfg, flow);
}

}  // namespace ww2d
