#pragma once

// Experiment harness: energy conservation, lifespan power-law sweeps with an
// ODE calibration oracle, normal-form cancellation order, finite-difference
// linearization checks, inequality ratio audits across resolutions, and
// solver convergence sweeps. Every experiment is deterministic given its
// spec; sweep points run on a worker pool and are merged in grid order.

#include <cstdint>
#include <string>
#include <vector>

#include "ww2d/evolve.hpp"

namespace ww2d {

struct Profile {
  enum class Kind { single_mode, packet, random_field };
  Kind kind = Kind::single_mode;
  int k = 1;               // single-mode wavenumber (the holomorphic mode -k)
  double center = 12.0;    // packet center frequency
  double width = 1.5;      // packet gaussian width (modes)
  double amplitude = 0.01; // raw coefficient size (single_mode) or target A
  double slope = 2.0;      // random-field spectrum slope for Wa; R uses slope + 0.5
};

struct ExperimentSpec {
  enum class Kind { energy_drift, lifespan, nf_order, fd_check, ratio_suite, convergence };
  Kind kind = Kind::energy_drift;
  Profile profile;
  std::vector<double> eps_grid;
  std::vector<double> h_grid;
  std::vector<int> n_grid;
  SolverConfig solver;
  int n = 256;
  std::uint64_t seed = 1;
  bool calibration_oracle = false;  // lifespan: scalar ODE x' = x^2 pipeline check
  bool linear_vector_field = false; // lifespan: drop the nonlinearity (control)
  double t_horizon = 1.0;           // fd_check / convergence horizon
  int ensemble = 12;                // ratio_suite ensemble size
  double cap_factor = 12.0;         // lifespan cap t_max = cap_factor / eps^2
  double target_A = 0.05;           // ratio_suite ensemble amplitude
  std::string out_dir;              // empty = no artifacts
  int workers = 0;                  // 0 = hardware concurrency

  void validate() const;
};

struct SweepResult {
  enum class Status { pass, fail, inconclusive };
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  bool fit_valid = false;
  double exponent = 0, intercept = 0, residual = 0;
  bool fit2_valid = false;
  double exponent2 = 0, residual2 = 0;
  Status status = Status::inconclusive;
  std::string note;
  std::vector<std::pair<std::string, std::string>> extra_files;  // name -> content
};

// -- profile / ensemble builders ------------------------------------------------
DiffState make_diff_profile(const GridPtr& g, const Profile& p, std::uint64_t seed);
FullState make_full_profile(const GridPtr& g, const Profile& p, std::uint64_t seed);
/// Random holomorphic pair with |k|^{-slope} gaussian coefficients (optional
/// exponential taper exp(-|k|/decay_scale)), rescaled so control A hits target_A.
DiffState make_random_state(const GridPtr& g, double target_A, double slope_W, double slope_R,
                            std::uint64_t seed, double decay_scale = 0.0);

// -- experiments -----------------------------------------------------------------
SweepResult energy_drift_experiment(const ExperimentSpec& spec);
SweepResult lifespan_sweep(const ExperimentSpec& spec);
SweepResult cancellation_order_experiment(const ExperimentSpec& spec);
SweepResult fd_linearization_check(const ExperimentSpec& spec);
SweepResult estimate_ratio_suite(const ExperimentSpec& spec);
SweepResult convergence_experiment(const ExperimentSpec& spec);

/// Dispatch on spec.kind; writes artifacts under spec.out_dir when set
/// (spec.json echo, points.csv, fit.json, trajectories/*.csv).
SweepResult run_experiment(const ExperimentSpec& spec);

// -- fitting and serialization -----------------------------------------------------
struct LogLogFit {
  double slope = 0, intercept = 0, residual = 0;
  bool valid = false;  // requires >= 3 valid points
};
/// Unweighted least squares in log-log space.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

std::string sweep_csv(const SweepResult& r);
std::string fit_json(const ExperimentSpec& spec, const SweepResult& r);
std::string spec_json(const ExperimentSpec& spec);       // fully-resolved echo
ExperimentSpec spec_from_json(const std::string& text);  // CLI config format
void write_artifacts(const ExperimentSpec& spec, const SweepResult& r);

const char* to_string(ExperimentSpec::Kind k);
const char* to_string(SweepResult::Status s);

}  // namespace ww2d
