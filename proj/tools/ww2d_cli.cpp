// ww2d command line: run simulations and experiments from JSON configs and
// emit CSV/JSON artifacts.
//
// Exit codes: 0 success (pass or inconclusive), 1 usage/config error,
// 2 experiment criteria violated.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ww2d/lab.hpp"

namespace fs = std::filesystem;
using namespace ww2d;

namespace {

struct GlobalOpts {
  bool quiet = false;
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw config_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// nlohmann reports byte offsets; translate to line/column for the message.
[[noreturn]] void rethrow_parse_error(const std::string& text, const nlohmann::json::parse_error& e) {
  size_t byte = e.byte > 0 ? e.byte - 1 : 0;
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  throw config_error("malformed JSON at line " + std::to_string(line) + ", column " +
                     std::to_string(col));
}

ExperimentSpec load_spec(const GlobalOpts& g, ExperimentSpec::Kind expected) {
  std::string text = read_file(g.config_path);
  ExperimentSpec spec;
  try {
    spec = spec_from_json(text);
  } catch (const nlohmann::json::parse_error& e) {
    rethrow_parse_error(text, e);
  }
  spec.kind = expected;
  if (g.seed_set) spec.seed = g.seed;
  spec.out_dir = g.out_dir;
  return spec;
}

void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw config_error("cannot write " + p.string());
  os << content;
}

int exit_code_for(SweepResult::Status s) {
  return s == SweepResult::Status::fail ? 2 : 0;
}

int cmd_experiment(const GlobalOpts& g, ExperimentSpec::Kind kind) {
  auto spec = load_spec(g, kind);
  auto result = run_experiment(spec);
  if (!g.quiet) {
    std::printf("%s: %s", to_string(kind), to_string(result.status));
    if (!result.note.empty()) std::printf(" (%s)", result.note.c_str());
    std::printf("\n");
  }
  return exit_code_for(result.status);
}

int cmd_simulate(const GlobalOpts& g) {
  std::string text = read_file(g.config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    rethrow_parse_error(text, e);
  }
  ExperimentSpec spec;
  try {
    spec = spec_from_json(text);
  } catch (const config_error& e) {
    // simulate configs need no experiment block; everything else applies
    if (std::string(e.what()).find("experiment.kind") == std::string::npos) throw;
    auto j2 = j;
    j2["experiment"] = {{"kind", "energy_drift"}};
    spec = spec_from_json(j2.dump());
  }
  if (g.seed_set) spec.seed = g.seed;
  std::string system = j.value("system", std::string("full"));

  auto grid = make_grid(spec.n);
  fs::path out(g.out_dir.empty() ? "." : g.out_dir);
  write_text(out / "spec.json", spec_json(spec));

  bool completed = false;
  if (system == "full") {
    auto s0 = make_full_profile(grid, spec.profile, spec.seed);
    auto traj = run_full(s0, spec.solver);
    write_text(out / "diagnostics.csv", trajectory_csv(traj.diagnostics));
    write_text(out / "snapshot_initial.json", snapshot_json(traj.snapshots.front()));
    write_text(out / "snapshot_final.json", snapshot_json(traj.snapshots.back()));
    completed = traj.status.completed;
    if (!g.quiet)
      std::printf("simulate(full): %s at t=%.6g, %zu snapshots\n",
                  completed ? "completed" : to_string(traj.status.reason).c_str(),
                  traj.snapshots.back().t, traj.snapshots.size());
  } else if (system == "diff") {
    auto s0 = make_diff_profile(grid, spec.profile, spec.seed);
    auto traj = run_diff(s0, spec.solver);
    write_text(out / "diagnostics.csv", trajectory_csv(traj.diagnostics));
    write_text(out / "snapshot_initial.json", snapshot_json(traj.snapshots.front()));
    write_text(out / "snapshot_final.json", snapshot_json(traj.snapshots.back()));
    completed = traj.status.completed;
    if (!g.quiet)
      std::printf("simulate(diff): %s at t=%.6g, %zu snapshots\n",
                  completed ? "completed" : to_string(traj.status.reason).c_str(),
                  traj.snapshots.back().t, traj.snapshots.size());
  } else {
    throw config_error("config: system must be \"full\" or \"diff\"");
  }
  return 0;
}

int cmd_norms(const GlobalOpts& g) {
  auto spec = load_spec(g, ExperimentSpec::Kind::energy_drift);
  auto grid = make_grid(spec.n);
  auto s = make_diff_profile(grid, spec.profile, spec.seed);
  auto cp = control_params(s.Wa, s.R, spec.solver.delta_J);
  nlohmann::json j;
  j["A"] = cp.A;
  j["B"] = cp.B;
  j["A14"] = cp.A14;
  j["Asharp"] = cp.Asharp;
  for (double sidx : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    char key[32];
    std::snprintf(key, sizeof(key), "H_pair_%.2f", sidx);
    j[key] = pair_norm(s.Wa, s.R, sidx, false);
    std::snprintf(key, sizeof(key), "Hdot_pair_%.2f", sidx);
    j[key] = pair_norm(s.Wa, s.R, sidx, true);
  }
  fs::path out(g.out_dir.empty() ? "." : g.out_dir);
  write_text(out / "spec.json", spec_json(spec));
  write_text(out / "norms.json", j.dump(2));
  if (!g.quiet)
    std::printf("norms: A=%.6g B=%.6g A14=%.6g Asharp=%.6g\n", cp.A, cp.B, cp.A14, cp.Asharp);
  return 0;
}

// ---------------------------------------------------------------------------
// identity-suite: every machine-checkable algebraic identity, one CSV row each
// ---------------------------------------------------------------------------

struct IdentityRows {
  std::string csv = "name,value,tolerance,pass\n";
  bool all_pass = true;
  void add(const std::string& name, double value, double tol) {
    bool ok = value <= tol;
    all_pass = all_pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%d\n", name.c_str(), value, tol, ok ? 1 : 0);
    csv += buf;
  }
};

SpectralField random_holo(const GridPtr& g, std::mt19937_64& rng, double amp, double slope,
                          bool with_mean = false) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> c(g->n, 0.0);
  for (int m = 1; m <= g->dealias_cutoff(); ++m)
    c[g->idx_of(-m)] = amp * std::pow(m, -slope) * cplx(gauss(rng), gauss(rng));
  if (with_mean) c[0] = amp * cplx(gauss(rng), gauss(rng));
  return SpectralField::from_coeffs(g, std::move(c));
}

SpectralField random_complex(const GridPtr& g, std::mt19937_64& rng, double amp) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> v(g->n);
  for (auto& x : v) x = amp * cplx(gauss(rng), gauss(rng));
  return SpectralField::from_values(g, std::move(v));
}

double rel_diff(const SpectralField& a, const SpectralField& b) {
  double scale = std::max({a.coeff_norm(), b.coeff_norm(), 1e-300});
  return (a - b).coeff_norm() / scale;
}

// Relative coefficient difference restricted to the dealias window.
double rel_diff_dealiased(const SpectralField& a, const SpectralField& b) {
  return rel_diff(dealias(a), dealias(b));
}

int cmd_identity_suite(const GlobalOpts& g) {
  auto spec = load_spec(g, ExperimentSpec::Kind::energy_drift);
  auto grid = make_grid(spec.n);
  std::mt19937_64 rng(spec.seed + 7);
  IdentityRows rows;

  // spectral identities
  {
    auto f = random_complex(grid, rng, 1.0);
    auto f0 = f - SpectralField::constant(grid, f.mean());
    rows.add("hilbert_involution", rel_diff(hilbert(hilbert(f0)), -1.0 * f0), 1e-12);
    rows.add("P_idempotent", rel_diff(project_P(project_P(f0)), project_P(f0)), 1e-15);
    rows.add("P_plus_Pbar", rel_diff(project_P(f) + project_Pbar(f), f), 1e-15);
    auto rt = SpectralField::from_values(grid, f.values());
    rows.add("transform_round_trip", rel_diff(rt, f), 1e-13);
    double parseval = std::abs(l2_norm(f) - std::sqrt(2 * M_PI) * f.coeff_norm()) /
                      std::max(l2_norm(f), 1e-300);
    rows.add("parseval", parseval, 1e-12);
  }
  // paraproduct reconstruction + homogeneity
  for (int trial = 0; trial < 3; ++trial) {
    auto f = random_complex(grid, rng, 0.7);
    auto h = random_complex(grid, rng, 0.9);
    auto rebuilt = para_low_high(f, h) + para_low_high(h, f) + para_balanced(f, h);
    rows.add("para_reconstruction_" + std::to_string(trial),
             rel_diff(rebuilt, multiply(f, h)), 1e-12);
  }
  {
    auto f = random_complex(grid, rng, 1.0);
    double n1 = norm(f, NormSpec::bmo());
    double n2 = norm(3.0 * f, NormSpec::bmo());
    rows.add("bmo_homogeneity", std::abs(n2 - 3.0 * n1) / std::max(n2, 1e-300), 1e-12);
    rows.add("bmo_vs_linf", std::max(0.0, n1 / (2.0 * max_abs(f)) - 1.0), 0.0);
  }
  // water wave identities on a small random ensemble
  for (int trial = 0; trial < 5; ++trial) {
    auto s = make_random_state(grid, 0.04, 2.0, 2.5, spec.seed + 100 + trial, 20.0);
    auto df = derived_fields(s);
    auto one_plus = SpectralField::constant(grid, 1.0) + df.Wa;
    auto lhs = para_low_high(one_plus, df.Y);
    auto rhs = para_low_high(SpectralField::constant(grid, 1.0) - df.Y, df.Wa) -
               para_balanced(df.Y, df.Wa);
    std::string suffix = "_" + std::to_string(trial);
    rows.add("YtoW_identity" + suffix, rel_diff(lhs, rhs), 1e-10);
    rows.add("M_two_representations" + suffix, rel_diff(dealias(df.M), dealias(df.M_alt)), 1e-10);
    auto forms = rhs_diff_forms(s);
    rows.add("diff_Yform_Yt" + suffix, rel_diff_dealiased(forms.Yt_chain, forms.Yt_yform), 1e-9);
    rows.add("diff_Yform_Rt" + suffix, rel_diff_dealiased(forms.Rt, forms.Rt_yform), 1e-9);
    auto tc = taylor_check(df);
    rows.add("taylor_a_real" + suffix, tc.is_real ? 0.0 : 1.0, 0.5);
    rows.add("taylor_sign" + suffix, tc.min_one_plus_a > 0 ? 0.0 : 1.0, 0.5);

    // full-system forms and the derivative consistency between the flows
    auto W = invert_dalpha(s.Wa);
    auto Qa = multiply(s.R, one_plus);
    auto Q = invert_dalpha(Qa - SpectralField::constant(grid, Qa.mean()));
    FullState fs{W, Q, 0.0};
    auto f2 = rhs_full_forms(fs);
    rows.add("full_forms_W" + suffix, rel_diff_dealiased(f2.Wt, f2.Wt_b), 1e-10);
    rows.add("full_forms_Q" + suffix, rel_diff_dealiased(f2.Qt, f2.Qt_b), 1e-10);
    auto diff_rhs = rhs_diff_forms(to_diff(fs));
    rows.add("cross_flow_consistency" + suffix,
             rel_diff_dealiased(dalpha(f2.Wt), diff_rhs.Wat), 1e-9);
  }
  // zero-background reductions
  {
    auto w = random_holo(grid, rng, 0.5, 1.5);
    auto r = random_holo(grid, rng, 0.5, 2.0);
    DiffState zero{SpectralField::zero(grid), SpectralField::zero(grid), 0.0};
    auto bg = derived_fields(zero);
    auto lin = rhs_linearized(bg, w, r, false);
    rows.add("lin_zero_bg_w", rel_diff(lin.first_t, -1.0 * dalpha(r)), 1e-12);
    rows.add("lin_zero_bg_r", rel_diff(lin.second_t, cplx(0.0, 1.0) * w), 1e-12);
    auto par = rhs_paralin(bg, w, r);
    rows.add("paralin_zero_bg_w", rel_diff(par.first_t, -1.0 * dalpha(r)), 1e-12);
    rows.add("paralin_zero_bg_r", rel_diff(par.second_t, cplx(0.0, 1.0) * w), 1e-12);
    double e_para = energy_paralin0(bg, w, r);
    double h0 = pair_norm(w, r, 0.0, false);
    rows.add("paralin_energy_zero_bg", std::abs(e_para - h0 * h0) / std::max(h0 * h0, 1e-300),
             1e-12);
  }
  // diagonalization round trip
  {
    auto w = random_holo(grid, rng, 0.5, 1.5);
    auto q = random_holo(grid, rng, 0.5, 2.0);
    auto Rbg = random_holo(grid, rng, 0.05, 2.5);
    auto [dw, dr] = diagonalize(w, q, Rbg);
    auto [uw, uq] = undiagonalize(dw, dr, Rbg);
    rows.add("diagonalize_round_trip", rel_diff(uq, project_P(q)), 1e-12);
  }

  fs::path out(g.out_dir.empty() ? "." : g.out_dir);
  write_text(out / "spec.json", spec_json(spec));
  write_text(out / "identities.csv", rows.csv);
  if (!g.quiet)
    std::printf("identity-suite: %s\n", rows.all_pass ? "all rows pass" : "FAILURES present");
  return rows.all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ww2d: pseudo-spectral lab for 2D deep-water gravity waves in conformal coordinates"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_flag("--quiet", g.quiet, "suppress progress output");
  app.add_option("--seed", g.seed, "override config seed")->each([&](const std::string&) {
    g.seed_set = true;
  });

  struct Cmd {
    CLI::App* sub;
    std::function<int(const GlobalOpts&)> fn;
  };
  std::vector<Cmd> cmds;
  auto add_cmd = [&](const char* name, const char* desc,
                     std::function<int(const GlobalOpts&)> fn) {
    auto* sub = app.add_subcommand(name, desc);
    sub->fallthrough();  // global flags may follow the subcommand
    sub->add_option("--config", g.config_path, "JSON config path")->required();
    sub->add_option("--out", g.out_dir, "output directory");
    cmds.push_back({sub, std::move(fn)});
  };

  add_cmd("simulate", "integrate the full or differentiated system", cmd_simulate);
  add_cmd("lifespan", "doubling-time sweep over amplitudes",
          [](const GlobalOpts& go) { return cmd_experiment(go, ExperimentSpec::Kind::lifespan); });
  add_cmd("nf-order", "normal-form cancellation order sweep",
          [](const GlobalOpts& go) { return cmd_experiment(go, ExperimentSpec::Kind::nf_order); });
  add_cmd("lin-check", "finite-difference linearization consistency",
          [](const GlobalOpts& go) { return cmd_experiment(go, ExperimentSpec::Kind::fd_check); });
  add_cmd("ratios", "inequality ratio audit across resolutions",
          [](const GlobalOpts& go) { return cmd_experiment(go, ExperimentSpec::Kind::ratio_suite); });
  add_cmd("norms", "control parameters and pair norms of the profile", cmd_norms);
  add_cmd("identity-suite", "algebraic identity checks across all modules", cmd_identity_suite);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    for (auto& c : cmds)
      if (c.sub->parsed()) return c.fn(g);
    return 1;
  } catch (const config_error& e) {
    std::fprintf(stderr, "ww2d: config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ww2d: error: %s\n", e.what());
    return 1;
  }
}
