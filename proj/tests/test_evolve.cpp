#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ww2d/evolve.hpp"
#include "ww2d/lab.hpp"

using namespace ww2d;

namespace {

DiffTrajectory zero_traj(const GridPtr& g, double t_max, double spacing) {
  DiffTrajectory traj;
  for (double t = 0.0; t < t_max + spacing; t += spacing)
    traj.snapshots.push_back(
        DiffState{SpectralField::zero(g), SpectralField::zero(g), std::min(t, t_max)});
  traj.status.completed = true;
  return traj;
}

}  // namespace

TEST_SUITE_BEGIN("evolve");

TEST_CASE("config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SolverConfig bad = cfg;
  bad.dt = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.delta_J = 1.5;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.record_every = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("dt = 0 is the identity") {
  auto g = make_grid(64);
  auto s = make_random_state(g, 0.03, 2.0, 2.5, 61, 15.0);
  SolverConfig cfg;
  auto s2 = step(s, 0.0, Scheme::rk4, cfg);
  CHECK(oracle::rel_diff(s2.Wa, s.Wa) == 0.0);
  CHECK(oracle::rel_diff(s2.R, s.R) == 0.0);
  auto s3 = step(s, 0.0, Scheme::lawson4, cfg);
  CHECK(oracle::rel_diff(s3.Wa, s.Wa) == 0.0);
}

TEST_CASE("lawson4 is exact on the pure linear flow") {
  auto g = make_grid(64);
  const int k = 9;
  const double om = 3.0;
  auto w0 = SpectralField::single_mode(g, -k, 0.01);
  auto r0 = SpectralField::single_mode(g, -k, 0.01 / om);
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.t_max = 5.0;
  cfg.scheme = Scheme::lawson4;
  cfg.dealias = false;
  cfg.record_every = 1;
  auto lin = solve_linearized_along(zero_traj(g, cfg.t_max, 0.4), w0, r0, cfg);
  // exact plane wave at every record
  for (const auto& snap : lin.snapshots) {
    cplx phase = std::exp(cplx(0, om * snap.t));
    CHECK(oracle::rel_diff(snap.w, phase * w0) < 1e-12);
    CHECK(oracle::rel_diff(snap.r, phase * r0) < 1e-12);
  }
}

TEST_CASE("rk4 temporal order on the plane wave") {
  auto g = make_grid(64);
  const int k = 16;
  const double om = 4.0;
  auto w0 = SpectralField::single_mode(g, -k, 1.0);
  auto r0 = SpectralField::single_mode(g, -k, 1.0 / om);
  std::vector<double> dts = {4e-3, 2e-3, 1e-3};
  std::vector<double> errs;
  for (double dt : dts) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_max = 1.0;
    cfg.scheme = Scheme::rk4;
    cfg.dealias = false;
    cfg.record_every = 1 << 20;
    auto lin = solve_linearized_along(zero_traj(g, cfg.t_max, 4.9 * dt), w0, r0, cfg);
    cplx phase = std::exp(cplx(0, om * cfg.t_max));
    errs.push_back((lin.snapshots.back().w - phase * w0).coeff_norm());
  }
  auto fit = fit_loglog(dts, errs);
  CHECK(fit.valid);
  CHECK(fit.slope == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("zero data runs to completion") {
  auto g = make_grid(64);
  DiffState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_max = 0.5;
  cfg.record_every = 10;
  auto traj = run_diff(zero, cfg);
  CHECK(traj.status.completed);
  for (const auto& row : traj.diagnostics) {
    CHECK(row.E_full == 0.0);
    CHECK(row.A == 0.0);
  }
  // times strictly increasing
  for (size_t i = 1; i < traj.snapshots.size(); ++i)
    CHECK(traj.snapshots[i].t > traj.snapshots[i - 1].t);
}

TEST_CASE("corner data blows up immediately") {
  auto g = make_grid(64);
  DiffState steep{SpectralField::single_mode(g, -1, 0.7), SpectralField::zero(g), 0.0};
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_max = 1.0;
  auto traj = run_diff(steep, cfg);
  CHECK_FALSE(traj.status.completed);
  CHECK(traj.status.reason == BlowupReason::corner);
  CHECK(traj.status.t_star == 0.0);
}

TEST_CASE("detect_blowup ordering and nan") {
  auto g = make_grid(64);
  SolverConfig cfg;
  auto healthy = make_random_state(g, 0.03, 2.0, 2.5, 62, 15.0);
  CHECK(detect_blowup(healthy, cfg).completed);

  std::vector<cplx> c(g->n, 0.0);
  c[g->idx_of(-1)] = std::numeric_limits<double>::quiet_NaN();
  DiffState bad{SpectralField::from_coeffs(g, c), SpectralField::zero(g), 0.3};
  auto st = detect_blowup(bad, cfg);
  CHECK_FALSE(st.completed);
  CHECK(st.reason == BlowupReason::nan);
  CHECK(st.t_star == 0.3);

  SolverConfig tight = cfg;
  tight.A_max = 1e-6;
  auto st2 = detect_blowup(healthy, tight);
  CHECK(st2.reason == BlowupReason::control_norm);
  tight = cfg;
  tight.norm_cap = 1e-9;
  auto st3 = detect_blowup(healthy, tight);
  CHECK(st3.reason == BlowupReason::norm_cap);
}

TEST_CASE("determinism: identical config gives byte-identical diagnostics") {
  auto g = make_grid(64);
  Profile p;
  p.kind = Profile::Kind::packet;
  p.center = 6;
  p.width = 1.0;
  p.amplitude = 0.03;
  auto s = make_diff_profile(g, p, 3);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.t_max = 0.5;
  cfg.record_every = 10;
  auto t1 = run_diff(s, cfg);
  auto t2 = run_diff(s, cfg);
  CHECK(trajectory_csv(t1.diagnostics) == trajectory_csv(t2.diagnostics));
}

TEST_CASE("time-reversal smoke test") {
  auto g = make_grid(64);
  auto s = make_random_state(g, 0.03, 2.0, 2.5, 63, 15.0);
  SolverConfig cfg;
  cfg.dealias = false;
  auto err_at = [&](double dt) {
    auto fwd = step(s, dt, Scheme::rk4, cfg);
    auto back = step(fwd, -dt, Scheme::rk4, cfg);
    return std::sqrt(std::pow((back.Wa - s.Wa).coeff_norm(), 2) +
                     std::pow((back.R - s.R).coeff_norm(), 2));
  };
  double e1 = err_at(2e-2);
  double e2 = err_at(1e-2);
  // O(dt^5) per step pair
  CHECK(e1 / e2 > 16.0);
  CHECK(e1 / e2 < 80.0);
}

TEST_CASE("holomorphy is maintained along a run") {
  auto g = make_grid(128);
  Profile p;
  p.kind = Profile::Kind::packet;
  p.center = 8;
  p.width = 1.2;
  p.amplitude = 0.04;
  auto s = make_diff_profile(g, p, 4);
  SolverConfig cfg;
  cfg.dt = 5e-3;
  cfg.t_max = 2.0;
  cfg.record_every = 20;
  auto traj = run_diff(s, cfg);
  CHECK(traj.status.completed);
  for (const auto& row : traj.diagnostics) CHECK(row.holo_residual <= 1e-8);
  CHECK(traj.gauge_drift >= 0.0);
  CHECK(std::isfinite(traj.gauge_drift));
}

TEST_CASE("diagnostics CSV layout") {
  std::vector<DiagRow> rows(1);
  rows[0].t = 0.5;
  auto text = trajectory_csv(rows);
  CHECK(text.substr(0, text.find('\n')) ==
        "t,E_full,E0_lin,A,B,A14,Asharp,Hs34_pair,minJroot,holo_residual");
}

TEST_CASE("linearized solve requires adequate snapshot density") {
  auto g = make_grid(64);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_max = 1.0;
  auto w0 = SpectralField::single_mode(g, -4, 0.01);
  auto r0 = SpectralField::single_mode(g, -4, 0.005);
  CHECK_THROWS_AS(solve_linearized_along(zero_traj(g, 1.0, 0.5), w0, r0, cfg), config_error);
  CHECK_NOTHROW(solve_linearized_along(zero_traj(g, 1.0, 0.04), w0, r0, cfg));
}

TEST_CASE("rk4 stability guard") {
  auto g = make_grid(256);
  DiffState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  SolverConfig cfg;
  cfg.dt = 0.5;  // above 2.8/sqrt(128)
  cfg.t_max = 1.0;
  CHECK_THROWS_AS(run_diff(zero, cfg), config_error);
  cfg.scheme = Scheme::lawson4;  // exact linear factor, no dispersion bound
  CHECK_NOTHROW(run_diff(zero, cfg));
}

TEST_SUITE_END();
