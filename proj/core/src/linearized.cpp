#include "ww2d/linearized.hpp"

#include <cmath>
#include <numbers>

namespace ww2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SpectralField maybe_dealias(const SpectralField& f, bool flag) {
  return flag ? dealias(f) : f;
}

}  // namespace

LinSources lin_sources(const DerivedFields& bg, const SpectralField& w, const SpectralField& r,
                       bool dealias_output) {
  const auto& g = w.grid();
  const int n = w.n();
  auto wa = dalpha(w);
  auto ra = dalpha(r);

  std::vector<cplx> mv(n), nv(n);
  for (int i = 0; i < n; ++i) {
    cplx lin_num = ra.values()[i] + bg.Ra.values()[i] * w.values()[i];  // r_a + R_a w
    cplx op = bg.one_plus_Wa.values()[i];
    cplx rbar = std::conj(bg.R.values()[i]);
    mv[i] = lin_num / std::norm(op) + rbar * wa.values()[i] / (op * op);
    nv[i] = rbar * lin_num / op;
  }
  LinSources out;
  out.m = SpectralField::from_values(g, std::move(mv));
  out.n = SpectralField::from_values(g, std::move(nv));

  auto Pm_bar = project_P(conj(out.m));
  auto Pbar_m = project_Pbar(out.m);
  std::vector<cplx> g0(n);
  for (int i = 0; i < n; ++i)
    g0[i] = bg.one_plus_Wa.values()[i] * (Pm_bar.values()[i] + Pbar_m.values()[i]);
  out.G0 = maybe_dealias(SpectralField::from_values(g, std::move(g0)), dealias_output);
  out.K0 = maybe_dealias(project_Pbar(out.n) - project_P(conj(out.n)), dealias_output);
  out.m = maybe_dealias(out.m, dealias_output);
  out.n = maybe_dealias(out.n, dealias_output);
  return out;
}

RhsPair rhs_linearized(const DerivedFields& bg, const SpectralField& w, const SpectralField& r,
                       bool dealias_output) {
  const auto& g = w.grid();
  const int n = w.n();
  auto src = lin_sources(bg, w, r, /*dealias_output=*/false);
  auto wa = dalpha(w);
  auto ra = dalpha(r);

  std::vector<cplx> tw(n), tr(n);
  for (int i = 0; i < n; ++i) {
    double b = bg.b.values()[i].real();
    cplx ymb = 1.0 - std::conj(bg.Y.values()[i]);  // 1/(1+conj Wa)
    cplx ym = 1.0 - bg.Y.values()[i];
    double a = bg.a.values()[i].real();
    tw[i] = -(b * wa.values()[i]) - ymb * ra.values()[i] - ymb * bg.Ra.values()[i] * w.values()[i];
    tr[i] = -(b * ra.values()[i]) + cplx(0.0, 1.0) * (1.0 + a) * ym * w.values()[i];
  }
  auto wt = project_P(SpectralField::from_values(g, std::move(tw))) + project_P(src.G0);
  auto rt = project_P(SpectralField::from_values(g, std::move(tr))) + project_P(src.K0);

  RhsPair out;
  out.first_t = maybe_dealias(wt, dealias_output);
  out.second_t = maybe_dealias(rt, dealias_output);
  out.holo_res_first = holo_residual(out.first_t);
  out.holo_res_second = holo_residual(out.second_t);
  return out;
}

RhsPair rhs_paralin(const DerivedFields& bg, const SpectralField& w, const SpectralField& r) {
  const auto& g = w.grid();
  auto one = SpectralField::constant(g, 1.0);
  auto Ybar = conj(bg.Y);
  auto one_minus_Ybar = one - Ybar;
  auto one_minus_Y = one - bg.Y;
  auto coeff_w = multiply(one_minus_Ybar, bg.Ra);

  auto wt = -1.0 * para_low_high(bg.b, dalpha(w)) - para_low_high(one_minus_Ybar, dalpha(r)) -
            para_low_high(coeff_w, w);
  // Symmetrized quantization on the real symbol 1 + a: Tsym_{1+a} = I + Tsym_a.
  auto taw = w + para_sym(bg.a, w);
  auto rt = -1.0 * para_low_high(bg.b, dalpha(r)) +
            cplx(0.0, 1.0) * para_low_high(one_minus_Y, taw);

  RhsPair out;
  out.holo_res_first = holo_residual(wt);
  out.holo_res_second = holo_residual(rt);
  out.first_t = std::move(wt);
  out.second_t = std::move(rt);
  return out;
}

double energy_paralin0(const DerivedFields& bg, const SpectralField& w, const SpectralField& r) {
  auto taw = w + para_sym(bg.a, w);
  auto ra = dalpha(r);
  double sum = 0.0;
  const int n = w.n();
  for (int i = 0; i < n; ++i) {
    sum += (taw.values()[i] * std::conj(w.values()[i])).real() +
           (r.values()[i] * std::conj(ra.values()[i])).imag();
  }
  return sum * (kTwoPi / n);
}

std::pair<SpectralField, SpectralField> weighted_vars(const DerivedFields& bg,
                                                      const SpectralField& w,
                                                      const SpectralField& r, double s) {
  if (s < 0) throw config_error("weighted_vars: s must be non-negative");
  const int n = w.n();
  std::vector<cplx> phi(n);
  for (int i = 0; i < n; ++i)
    phi[i] = std::pow(std::norm(bg.one_plus_Wa.values()[i]), -s);
  auto Phi = SpectralField::from_values(w.grid(), std::move(phi));
  return {para_low_high(Phi, abs_deriv(w, s)), para_low_high(Phi, abs_deriv(r, s))};
}

std::pair<SpectralField, SpectralField> lift_to_diff(const DerivedFields& bg,
                                                     const SpectralField& w,
                                                     const SpectralField& r) {
  const int n = w.n();
  auto ra = dalpha(r);
  std::vector<cplx> rh(n);
  for (int i = 0; i < n; ++i) {
    rh[i] = (ra.values()[i] + bg.Ra.values()[i] * w.values()[i]) *
            (1.0 - bg.Y.values()[i]);  // (1 - Y) = 1/(1 + Wa)
  }
  return {dalpha(w), SpectralField::from_values(w.grid(), std::move(rh))};
}

std::pair<SpectralField, SpectralField> map_diff_to_lin(const DerivedFields& bg,
                                                        const SpectralField& what,
                                                        const SpectralField& rhat) {
  auto w = invert_dalpha(what);
  auto integrand = rhat + para_low_high(bg.Wa, rhat) - para_low_high(bg.Ra, w);
  double scale = 1.0 + integrand.coeff_norm();
  if (std::abs(integrand.mean()) > 1e-10 * scale)
    throw mean_mode_error("map_diff_to_lin: integrand of r has a non-negligible mean");
  auto centered = integrand - SpectralField::constant(what.grid(), integrand.mean());
  return {w, invert_dalpha(centered)};
}

std::pair<SpectralField, SpectralField> nf_correction_lin(const DerivedFields& bg,
                                                          const SpectralField& w,
                                                          const SpectralField& r) {
  if (bg.X.empty())
    throw config_error("nf_correction_lin: background was built without X");
  auto Xbar = conj(bg.X);
  auto wa = dalpha(w);
  auto ra = dalpha(r);
  auto w1 = -1.0 * dalpha(para_low_high(w, bg.X) + para_balanced(w, bg.X, true)) -
            para_balanced(wa, Xbar, true);
  auto r1 = -1.0 * (para_low_high(ra, bg.X) + para_balanced(ra, bg.X, true)) -
            para_balanced(ra, Xbar, true);
  return {w1, r1};
}

}  // namespace ww2d
