#pragma once

// Time integration of the nonlinear and linearized flows: classical RK4 and
// the integrating-factor scheme built on the exact propagator of the
// zero-background linear system (Fourier-block frequencies +-sqrt|k|),
// holomorphy and gauge maintenance, blow-up detection and trajectory
// recording with a fixed diagnostics CSV layout.

#include <cstdint>
#include <string>
#include <vector>

#include "ww2d/linearized.hpp"
#include "ww2d/waterwave.hpp"

namespace ww2d {

enum class Scheme { rk4, lawson4 };

struct SolverConfig {
  double dt = 1e-3;
  double t_max = 1.0;
  Scheme scheme = Scheme::rk4;
  bool dealias = true;
  double delta_J = kDefaultDeltaJ;
  double A_max = 1.0;        // control-norm cap
  double norm_cap = 1e6;     // Hdot 3/4 pair cap
  int record_every = 100;    // steps per diagnostics row
  int snapshot_every = 1;    // records per stored snapshot; 0 = first/last only
  std::uint64_t seed = 0;

  void validate() const;
};

enum class BlowupReason { none, corner, control_norm, norm_cap, nan };

struct RunStatus {
  bool completed = true;
  BlowupReason reason = BlowupReason::none;
  double t_star = 0.0;
};

std::string to_string(BlowupReason r);

struct DiagRow {
  double t = 0, E_full = 0, E0_lin = 0, A = 0, B = 0, A14 = 0, Asharp = 0,
         Hs34_pair = 0, minJroot = 0, holo_residual = 0;
};

template <class StateT>
struct Trajectory {
  std::vector<StateT> snapshots;
  std::vector<DiagRow> diagnostics;
  RunStatus status;
  double gauge_drift = 0.0;  // accumulated |mean corrections|
};

using FullTrajectory = Trajectory<FullState>;
using DiffTrajectory = Trajectory<DiffState>;

/// One explicit step of either scheme; post-step maintenance (projection,
/// optional dealias, gauge re-assertion) is the caller's job in run() so
/// that a bare step stays testable. dt = 0 returns the state unchanged.
FullState step(const FullState& s, double dt, Scheme scheme, const SolverConfig& cfg);
DiffState step(const DiffState& s, double dt, Scheme scheme, const SolverConfig& cfg);

/// Integrate to t_max or blow-up. Deterministic for a fixed config.
FullTrajectory run_full(const FullState& initial, const SolverConfig& cfg);
DiffTrajectory run_diff(const DiffState& initial, const SolverConfig& cfg);

/// First-triggered of corner / control-norm / norm-cap / non-finite.
RunStatus detect_blowup(const DiffState& s, const SolverConfig& cfg);

/// Diagnostics CSV (header: t,E_full,E0_lin,A,B,A14,Asharp,Hs34_pair,minJroot,holo_residual).
std::string trajectory_csv(const std::vector<DiagRow>& rows);

// -- linearized solve along a background --------------------------------------

enum class LinFlow { linearized, paradifferential };

struct LinDiagRow {
  double t = 0, E0para = 0, H0_pair = 0;
};

struct LinTrajectory {
  std::vector<LinState> snapshots;
  std::vector<LinDiagRow> diagnostics;
};

/// Integrates the (paradifferential) linearized flow with the background
/// interpolated linearly in time between trajectory snapshots. Requires the
/// background to be completed over [0, t_max] with snapshot spacing <= 5 dt.
LinTrajectory solve_linearized_along(const DiffTrajectory& traj, const SpectralField& w0,
                                     const SpectralField& r0, const SolverConfig& cfg,
                                     LinFlow flow = LinFlow::linearized);
LinTrajectory solve_linearized_along(const FullTrajectory& traj, const SpectralField& w0,
                                     const SpectralField& r0, const SolverConfig& cfg,
                                     LinFlow flow = LinFlow::linearized);

}  // namespace ww2d
