#include "ww2d/waterwave.hpp"

#include <cmath>
#include <numbers>

#include "json.hpp"

namespace ww2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_gate(double min_one_plus, double delta_J, const char* who) {
  if (min_one_plus < delta_J)
    throw degenerate_surface_error(std::string(who) + ": min |1 + W_alpha| = " +
                                   std::to_string(min_one_plus) + " below delta_J = " +
                                   std::to_string(delta_J));
}

double min_abs(const SpectralField& f) {
  double m = std::abs(f.values()[0]);
  for (const auto& v : f.values()) m = std::min(m, std::abs(v));
  return m;
}

double max_imag_abs(const SpectralField& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v.imag()));
  return m;
}

// P with the mean kept, fused with the 2/3 filter (single rebuild).
SpectralField project_and_filter(const SpectralField& f, bool dealias_output) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  const int cut = g.dealias_cutoff();
  for (int i = 0; i < f.n(); ++i) {
    int k = g.mode_of(i);
    if (k > 0 || (dealias_output && std::abs(k) > cut)) c[i] = 0.0;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

// W_for_X == nullptr skips X (and the antiderivative it needs); the solver
// hot path (light = true) also skips F, J, M_alt and keeps a, b, M as the
// raw complex fields (imaginary parts are rounding noise, recorded in the
// *_imag_max residuals; the stepper reads .real()).
DerivedFields derive_common(SpectralField Wa, SpectralField R, const SpectralField* W_for_X,
                            double delta_J, bool light = false) {
  DerivedFields d;
  const auto& g = Wa.grid();
  const int n = Wa.n();

  std::vector<cplx> one_plus(n), yv(n);
  for (int i = 0; i < n; ++i) {
    cplx op = 1.0 + Wa.values()[i];
    one_plus[i] = op;
    yv[i] = Wa.values()[i] / op;
  }
  d.one_plus_Wa = SpectralField::from_values(g, std::move(one_plus));
  d.min_one_plus_Wa = min_abs(d.one_plus_Wa);
  check_gate(d.min_one_plus_Wa, delta_J, "derived_fields");
  d.Y = SpectralField::from_values(g, std::move(yv));
  if (!light) {
    std::vector<cplx> jv(n);
    for (int i = 0; i < n; ++i) jv[i] = std::norm(d.one_plus_Wa.values()[i]);
    d.Jfield = SpectralField::from_values(g, std::move(jv));
  }
  d.Ra = dalpha(R);

  // F = P[(1 - conj Y) R - (1 - Y) conj R]
  if (!light) {
    std::vector<cplx> fv(n);
    for (int i = 0; i < n; ++i) {
      cplx y = d.Y.values()[i];
      cplx r = R.values()[i];
      fv[i] = (1.0 - std::conj(y)) * r - (1.0 - y) * std::conj(r);
    }
    d.F = project_P(SpectralField::from_values(g, std::move(fv)));
  }

  // b = P[(1 - conj Y) R] + Pbar[(1 - Y) conj R], both projections taken as
  // written so the realness residual is a genuine check.
  std::vector<cplx> u(n), ubar(n);
  for (int i = 0; i < n; ++i) {
    cplx y = d.Y.values()[i];
    cplx r = R.values()[i];
    u[i] = (1.0 - std::conj(y)) * r;
    ubar[i] = (1.0 - y) * std::conj(r);
  }
  auto b_raw = project_P(SpectralField::from_values(g, std::move(u))) +
               project_Pbar(SpectralField::from_values(g, std::move(ubar)));
  d.b_imag_max = max_imag_abs(b_raw);
  d.b = light ? std::move(b_raw) : real_part(b_raw);

  // a = i (Pbar[conj R R_alpha] - P[R conj R_alpha])
  std::vector<cplx> av1(n), av2(n);
  for (int i = 0; i < n; ++i) {
    av1[i] = std::conj(R.values()[i]) * d.Ra.values()[i];
    av2[i] = R.values()[i] * std::conj(d.Ra.values()[i]);
  }
  auto a_raw = cplx(0.0, 1.0) * (project_Pbar(SpectralField::from_values(g, std::move(av1))) -
                                 project_P(SpectralField::from_values(g, std::move(av2))));
  d.a_imag_max = max_imag_abs(a_raw);
  d.a = light ? std::move(a_raw) : real_part(a_raw);

  // M in both shapes of (M-rep); the derivative in the second is expanded by
  // the Leibniz rule on the grid so the two agree to rounding error.
  auto Ya = dalpha(d.Y);
  std::vector<cplx> m1(n), m1bar(n);
  for (int i = 0; i < n; ++i) {
    cplx r = R.values()[i], ra = d.Ra.values()[i];
    cplx y = d.Y.values()[i], ya = Ya.values()[i];
    m1[i] = r * std::conj(ya) - std::conj(ra) * y;     // P slot
    m1bar[i] = std::conj(r) * ya - ra * std::conj(y);  // Pbar slot
  }
  auto M_raw = project_Pbar(SpectralField::from_values(g, std::move(m1bar))) +
               project_P(SpectralField::from_values(g, std::move(m1)));
  d.M_imag_max = max_imag_abs(M_raw);
  d.M = light ? std::move(M_raw) : real_part(M_raw);
  if (!light) {
    // Second shape of the same function: d/dalpha(2 Re P[R conj Y]) with the
    // derivative expanded by the Leibniz rule on the grid, minus the diagonal.
    std::vector<cplx> m2(n), diag(n);
    for (int i = 0; i < n; ++i) {
      cplx r = R.values()[i], ra = d.Ra.values()[i];
      cplx y = d.Y.values()[i], ya = Ya.values()[i];
      m2[i] = ra * std::conj(y) + r * std::conj(ya);
      diag[i] = 2.0 * (ra * std::conj(y)).real();
    }
    auto M2_proj = project_P(SpectralField::from_values(g, std::move(m2)));
    std::vector<cplx> m2v(n);
    for (int i = 0; i < n; ++i) m2v[i] = 2.0 * M2_proj.values()[i].real() - diag[i].real();
    d.M_alt = SpectralField::from_values(g, std::move(m2v));
  }

  // X = T_{1-Y} W
  if (W_for_X != nullptr) {
    auto one_minus_Y = SpectralField::constant(g, 1.0) - d.Y;
    d.X = para_low_high(one_minus_Y, *W_for_X);
  }

  d.Wa = std::move(Wa);
  d.R = std::move(R);
  return d;
}

}  // namespace

void validate(const FullState& s, double tau_holo) {
  HoloField hw(s.W, tau_holo);
  HoloField hq(s.Q, tau_holo);
  double scale_w = 1.0 + s.W.coeff_norm();
  double scale_q = 1.0 + s.Q.coeff_norm();
  if (std::abs(s.W.mean().real()) > 1e-10 * scale_w)
    throw mean_mode_error("FullState: mean of W must be purely imaginary");
  if (std::abs(s.Q.mean().imag()) > 1e-10 * scale_q)
    throw mean_mode_error("FullState: mean of Q must be real");
}

void validate(const DiffState& s, double tau_holo) {
  HoloField hw(s.Wa, tau_holo);
  HoloField hr(s.R, tau_holo);
  if (std::abs(s.Wa.mean()) > 1e-12 * (1.0 + s.Wa.coeff_norm()))
    throw mean_mode_error("DiffState: Wa must be mean-free");
}

DiffState to_diff(const FullState& s, double delta_J) {
  auto Wa = dalpha(s.W);
  const int n = Wa.n();
  std::vector<cplx> rv(n);
  auto Qa = dalpha(s.Q);
  for (int i = 0; i < n; ++i) {
    cplx op = 1.0 + Wa.values()[i];
    if (std::abs(op) < delta_J) throw degenerate_surface_error("to_diff: corner proximity");
    rv[i] = Qa.values()[i] / op;
  }
  return DiffState{Wa, SpectralField::from_values(Wa.grid(), std::move(rv)), s.t};
}

DerivedFields derived_fields(const FullState& s, double delta_J) {
  auto diff = to_diff(s, delta_J);
  return derive_common(diff.Wa, diff.R, &s.W, delta_J);
}

DerivedFields derived_fields(const DiffState& s, double delta_J, double w_mean_imag) {
  auto centered = s.Wa - SpectralField::constant(s.Wa.grid(), s.Wa.mean());
  auto W = invert_dalpha(centered);
  if (w_mean_imag != 0.0)
    W = W + SpectralField::constant(W.grid(), cplx(0.0, w_mean_imag));
  return derive_common(s.Wa, s.R, &W, delta_J);
}

namespace detail {
DerivedFields derived_fields_light(const DiffState& s, double delta_J) {
  return derive_common(s.Wa, s.R, nullptr, delta_J, /*light=*/true);
}
}  // namespace detail

RhsPair rhs_full(const FullState& s, bool dealias_output, double delta_J) {
  auto diff = to_diff(s, delta_J);
  auto d = derive_common(diff.Wa, diff.R, nullptr, delta_J);
  const auto& g = s.W.grid();
  const int n = s.W.n();
  auto Qa = dalpha(s.Q);
  std::vector<cplx> wt(n), qt(n), quad(n);
  for (int i = 0; i < n; ++i) {
    wt[i] = -d.F.values()[i] * d.one_plus_Wa.values()[i];
    quad[i] = std::norm(Qa.values()[i]) / d.Jfield.values()[i].real();
  }
  auto Pquad = project_P(SpectralField::from_values(g, std::move(quad)));
  for (int i = 0; i < n; ++i)
    qt[i] = -d.F.values()[i] * Qa.values()[i] + cplx(0.0, 1.0) * s.W.values()[i] -
            Pquad.values()[i];
  auto Wt = SpectralField::from_values(g, std::move(wt));
  auto Qt = SpectralField::from_values(g, std::move(qt));
  RhsPair out;
  out.holo_res_first = holo_residual(Wt);
  out.holo_res_second = holo_residual(Qt);
  out.first_t = project_and_filter(Wt, dealias_output);
  out.second_t = project_and_filter(Qt, dealias_output);
  return out;
}

FullRhsForms rhs_full_forms(const FullState& s, double delta_J) {
  auto diff = to_diff(s, delta_J);
  auto d = derive_common(diff.Wa, diff.R, nullptr, delta_J);
  const auto& g = s.W.grid();
  const int n = s.W.n();
  auto Qa = dalpha(s.Q);
  auto Wa = d.Wa;

  std::vector<cplx> wt(n), qt(n), quad(n);
  for (int i = 0; i < n; ++i) {
    cplx f = d.F.values()[i];
    wt[i] = -f * d.one_plus_Wa.values()[i];
    quad[i] = std::norm(Qa.values()[i]) / d.Jfield.values()[i].real();
  }
  auto quad_f = SpectralField::from_values(g, std::move(quad));
  auto Pquad = project_P(quad_f);
  for (int i = 0; i < n; ++i) {
    qt[i] = -d.F.values()[i] * Qa.values()[i] + cplx(0.0, 1.0) * s.W.values()[i] -
            Pquad.values()[i];
  }

  FullRhsForms out;
  out.Wt = SpectralField::from_values(g, std::move(wt));
  out.Qt = SpectralField::from_values(g, std::move(qt));

  // Material-derivative form: D_t W + b = conj R, D_t Q - iW = Pbar[|Q_alpha|^2/J].
  auto Pbar_quad = project_Pbar(quad_f);
  std::vector<cplx> wtb(n), qtb(n);
  for (int i = 0; i < n; ++i) {
    cplx b = d.b.values()[i];
    wtb[i] = std::conj(d.R.values()[i]) - b - b * Wa.values()[i];
    qtb[i] = -b * Qa.values()[i] + cplx(0.0, 1.0) * s.W.values()[i] + Pbar_quad.values()[i];
  }
  out.Wt_b = SpectralField::from_values(g, std::move(wtb));
  out.Qt_b = SpectralField::from_values(g, std::move(qtb));
  return out;
}

RhsPair rhs_diff(const DiffState& s, bool dealias_output, double delta_J) {
  auto d = derive_common(s.Wa, s.R, nullptr, delta_J, /*light=*/true);
  const auto& g = s.Wa.grid();
  const int n = s.Wa.n();
  auto Waa = dalpha(s.Wa);
  std::vector<cplx> wat(n), rt(n);
  for (int i = 0; i < n; ++i) {
    cplx y = d.Y.values()[i];
    cplx op = d.one_plus_Wa.values()[i];
    double b = d.b.values()[i].real();
    wat[i] = -b * Waa.values()[i] - op * d.Ra.values()[i] * (1.0 - std::conj(y)) +
             op * d.M.values()[i].real();
    rt[i] = -b * d.Ra.values()[i] +
            cplx(0.0, 1.0) * (s.Wa.values()[i] - d.a.values()[i].real()) * (1.0 - y);
  }
  auto Wat = SpectralField::from_values(g, std::move(wat));
  auto Rt = SpectralField::from_values(g, std::move(rt));
  RhsPair out;
  out.holo_res_first = holo_residual(Wat);
  out.holo_res_second = holo_residual(Rt);
  out.first_t = project_and_filter(Wat, dealias_output);
  out.second_t = project_and_filter(Rt, dealias_output);
  return out;
}

DiffRhsForms rhs_diff_forms(const DiffState& s, double delta_J) {
  auto d = derive_common(s.Wa, s.R, nullptr, delta_J, /*light=*/true);
  const auto& g = s.Wa.grid();
  const int n = s.Wa.n();
  auto Waa = dalpha(s.Wa);

  DiffRhsForms out;
  std::vector<cplx> wat(n), rt(n), ytc(n), yty(n), rty(n);
  for (int i = 0; i < n; ++i) {
    cplx y = d.Y.values()[i];
    cplx op = d.one_plus_Wa.values()[i];
    double b = d.b.values()[i].real();
    double a = d.a.values()[i].real();
    double m = d.M.values()[i].real();
    cplx one_minus_y = 1.0 - y;
    cplx waa = Waa.values()[i];
    cplx ra = d.Ra.values()[i];

    wat[i] = -b * waa - op * ra * std::conj(one_minus_y) + op * m;
    rt[i] = -b * ra + cplx(0.0, 1.0) * (s.Wa.values()[i] - a) * one_minus_y;
    ytc[i] = wat[i] * one_minus_y * one_minus_y;
    // Y_alpha evaluated by the chain rule (1-Y)^2 Wa_alpha keeps the two
    // system forms consistent on the grid.
    cplx ya = one_minus_y * one_minus_y * waa;
    yty[i] = -b * ya - std::norm(one_minus_y) * ra + one_minus_y * m;
    rty[i] = -b * ra + cplx(0.0, 1.0) * (1.0 + a) * y - cplx(0.0, a);
  }
  out.Wat = SpectralField::from_values(g, std::move(wat));
  out.Rt = SpectralField::from_values(g, std::move(rt));
  out.Yt_chain = SpectralField::from_values(g, std::move(ytc));
  out.Yt_yform = SpectralField::from_values(g, std::move(yty));
  out.Rt_yform = SpectralField::from_values(g, std::move(rty));
  return out;
}

// Exact invariant of the flow, in geometric form: the potential part is
// purely cubic, 2 (Im W)^2 (1 + Re W_alpha), and the kinetic part purely
// quadratic, Im(Q conj(Q_alpha)) (the Dirichlet integral is conformally
// invariant). For mean-free W this equals the complex-variable combination
// int |W|^2 + Im(Q conj(Q_alpha)) - Re(conj(W)^2 W_alpha); written
// geometrically it stays exact for every zero-mode gauge.
double energy_full(const FullState& s) {
  auto Wa = dalpha(s.W);
  auto Qa = dalpha(s.Q);
  double sum = 0.0;
  const int n = s.W.n();
  for (int i = 0; i < n; ++i) {
    double v = s.W.values()[i].imag();
    double kinetic = (s.Q.values()[i] * std::conj(Qa.values()[i])).imag();
    sum += 2.0 * v * v * (1.0 + Wa.values()[i].real()) + kinetic;
  }
  return sum * (kTwoPi / n);
}

// Conserved energy of the zero-background linear flow; for holomorphic
// (w, r) it equals the squared L2 x Hdot^{1/2} pair norm exactly, which is
// also the zero-background value of the paradifferential energy.
double energy_lin0(const SpectralField& w, const SpectralField& r) {
  auto ra = dalpha(r);
  double sum = 0.0;
  const int n = w.n();
  for (int i = 0; i < n; ++i)
    sum += std::norm(w.values()[i]) + (r.values()[i] * std::conj(ra.values()[i])).imag();
  return sum * (kTwoPi / n);
}

std::pair<SpectralField, SpectralField> diagonalize(const SpectralField& w,
                                                    const SpectralField& q,
                                                    const SpectralField& R_bg) {
  return {w, project_P(q - multiply(R_bg, w))};
}

std::pair<SpectralField, SpectralField> undiagonalize(const SpectralField& w,
                                                      const SpectralField& r,
                                                      const SpectralField& R_bg) {
  return {w, project_P(r + multiply(R_bg, w))};
}

std::pair<SpectralField, SpectralField> normal_form_full(const FullState& s) {
  auto ReW = real_part(s.W);
  auto Wnf = s.W - 2.0 * project_P(multiply(ReW, dalpha(s.W)));
  auto Qnf = s.Q - 2.0 * project_P(multiply(ReW, dalpha(s.Q)));
  return {Wnf, Qnf};
}

DiffNormalForm normal_form_diff(const DiffState& s, double delta_J) {
  auto d = derived_fields(s, delta_J);
  auto X2 = 2.0 * real_part(d.X);
  auto one_minus_Ybar = SpectralField::constant(s.Wa.grid(), 1.0) - conj(d.Y);

  DiffNormalForm nf;
  nf.dWa = -1.0 * dalpha(para_balanced(s.Wa, X2, /*project=*/true));
  nf.dR = -1.0 * para_balanced(d.Ra, X2, true) -
          para_balanced(para_low_high(one_minus_Ybar, conj(s.Wa)), s.R, true);
  nf.Wa_nf = s.Wa + nf.dWa;
  nf.R_nf = s.R + nf.dR;

  auto cp = control_params(s.Wa, s.R, delta_J);
  double base = pair_norm(s.Wa, s.R, 0.75, /*homogeneous=*/true);
  double corr = pair_norm(nf.dWa, nf.dR, 0.75, true);
  nf.ratio_hdot34 = (cp.A > 0 && base > 0) ? corr / (cp.A * base) : 0.0;
  return nf;
}

TaylorCheck taylor_check(const DerivedFields& df) {
  TaylorCheck tc;
  tc.is_real = df.a_imag_max <= 1e-11 * (1.0 + max_abs(df.a));
  double mn = 1.0 + df.a.values()[0].real();
  for (const auto& v : df.a.values()) mn = std::min(mn, 1.0 + v.real());
  tc.min_one_plus_a = mn;
  return tc;
}

namespace {

nlohmann::json coeffs_json(const SpectralField& f) {
  const auto& g = *f.grid();
  nlohmann::json arr = nlohmann::json::array();
  for (int k = -g.n / 2; k < g.n / 2; ++k) {
    cplx c = f.coeff(k);
    arr.push_back({c.real(), c.imag()});
  }
  return arr;
}

SpectralField coeffs_from_json(const GridPtr& g, const nlohmann::json& arr) {
  if (static_cast<int>(arr.size()) != g->n)
    throw config_error("snapshot: coefficient array length does not match n");
  std::vector<cplx> c(g->n);
  for (int k = -g->n / 2; k < g->n / 2; ++k) {
    const auto& p = arr[k + g->n / 2];
    c[g->idx_of(k)] = cplx(p[0].get<double>(), p[1].get<double>());
  }
  return SpectralField::from_coeffs(g, std::move(c));
}

}  // namespace

std::string snapshot_json(const FullState& s) {
  nlohmann::json j;
  j["n"] = s.W.n();
  j["t"] = s.t;
  j["W_coeffs"] = coeffs_json(s.W);
  j["Q_coeffs"] = coeffs_json(s.Q);
  return j.dump();
}

std::string snapshot_json(const DiffState& s) {
  nlohmann::json j;
  j["n"] = s.Wa.n();
  j["t"] = s.t;
  j["Wa_coeffs"] = coeffs_json(s.Wa);
  j["R_coeffs"] = coeffs_json(s.R);
  return j.dump();
}

FullState full_state_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  auto g = make_grid(j.at("n").get<int>());
  return FullState{coeffs_from_json(g, j.at("W_coeffs")), coeffs_from_json(g, j.at("Q_coeffs")),
                   j.at("t").get<double>()};
}

DiffState diff_state_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  auto g = make_grid(j.at("n").get<int>());
  return DiffState{coeffs_from_json(g, j.at("Wa_coeffs")), coeffs_from_json(g, j.at("R_coeffs")),
                   j.at("t").get<double>()};
}

}  // namespace ww2d
