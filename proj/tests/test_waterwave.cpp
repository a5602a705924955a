#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ww2d/lab.hpp"
#include "ww2d/waterwave.hpp"

using namespace ww2d;

namespace {

// scale for comparing the two M shapes: the bilinear factors entering the
// identity (the derivative factors set the rounding floor)
double m_scale(const DerivedFields& d) {
  return (max_abs(d.R) + max_abs(d.Ra)) * (max_abs(d.Y) + max_abs(dalpha(d.Y))) + 1e-300;
}

DiffState small_random_state(int n, double A, std::uint64_t seed) {
  return make_random_state(make_grid(n), A, 2.0, 2.5, seed, 20.0);
}

FullState full_from_diff(const DiffState& d) {
  auto g = d.Wa.grid();
  auto W = invert_dalpha(d.Wa);
  auto Qa = multiply(d.R, SpectralField::constant(g, 1.0) + d.Wa);
  auto Q = invert_dalpha(Qa - SpectralField::constant(g, Qa.mean()));
  return FullState{W, Q, d.t};
}

}  // namespace

TEST_SUITE_BEGIN("waterwave");

TEST_CASE("state validation") {
  auto g = make_grid(64);
  FullState ok{SpectralField::single_mode(g, -2, 0.01), SpectralField::single_mode(g, -2, 0.01),
               0.0};
  CHECK_NOTHROW(validate(ok));

  FullState bad_spec{SpectralField::single_mode(g, 2, 0.01), ok.Q, 0.0};
  CHECK_THROWS_AS(validate(bad_spec), holomorphy_error);

  FullState bad_mean{ok.W + SpectralField::constant(g, cplx(0.3, 0.0)), ok.Q, 0.0};
  CHECK_THROWS_AS(validate(bad_mean), mean_mode_error);

  DiffState bad_wa_mean{SpectralField::constant(g, cplx(0.1, 0.0)), ok.Q, 0.0};
  CHECK_THROWS_AS(validate(bad_wa_mean), mean_mode_error);
}

TEST_CASE("derived fields of the zero state") {
  auto g = make_grid(64);
  DiffState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  auto d = derived_fields(zero);
  CHECK(max_abs(d.Jfield - SpectralField::constant(g, 1.0)) < 1e-15);
  CHECK(d.Y.coeff_norm() == 0.0);
  CHECK(d.F.coeff_norm() == 0.0);
  CHECK(d.b.coeff_norm() == 0.0);
  CHECK(d.a.coeff_norm() == 0.0);
  CHECK(d.M.coeff_norm() == 0.0);
  CHECK(d.X.coeff_norm() == 0.0);
  CHECK(d.min_one_plus_Wa == doctest::Approx(1.0));
}

TEST_CASE("derived fields at Wa = 0, R = eps e^{-i alpha}") {
  auto g = make_grid(128);
  double eps = 0.05;
  DiffState s{SpectralField::zero(g), SpectralField::single_mode(g, -1, eps), 0.0};
  auto d = derived_fields(s);
  // a is the constant eps^2 under the half-at-zero P convention
  CHECK(max_abs(d.a - SpectralField::constant(g, eps * eps)) < 1e-14);
  // b = 2 eps cos(alpha)
  std::vector<cplx> bv(g->n);
  for (int j = 0; j < g->n; ++j) bv[j] = 2 * eps * std::cos(g->nodes[j]);
  CHECK(oracle::rel_diff(d.b, SpectralField::from_values(g, bv)) < 1e-13);
  auto tc = taylor_check(d);
  CHECK(tc.is_real);
  CHECK(tc.min_one_plus_a == doctest::Approx(1.0 + eps * eps).epsilon(1e-12));
}

TEST_CASE("corner gate") {
  auto g = make_grid(64);
  DiffState steep{SpectralField::single_mode(g, -1, 0.7), SpectralField::zero(g), 0.0};
  CHECK_THROWS_AS(derived_fields(steep), degenerate_surface_error);
}

TEST_CASE("the two representations of M agree") {
  // compared on the dealias window: the self-conjugate Nyquist slot is a
  // periodic-grid degeneracy where the two groupings pick up the product
  // tail, far outside the resolved band
  for (int trial = 0; trial < 8; ++trial) {
    auto s = small_random_state(256, 0.05, 500 + trial);
    auto d = derived_fields(s);
    CHECK(max_abs(dealias(d.M - d.M_alt)) <= 1e-10 * m_scale(d));
  }
}

TEST_CASE("paradifferential identity relating W, X, Y") {
  for (int trial = 0; trial < 8; ++trial) {
    auto s = small_random_state(256, 0.05, 900 + trial);
    auto d = derived_fields(s);
    auto g = s.Wa.grid();
    auto one = SpectralField::constant(g, 1.0);
    auto lhs = para_low_high(one + d.Wa, d.Y);
    auto rhs = para_low_high(one - d.Y, d.Wa) - para_balanced(d.Y, d.Wa);
    double scale = std::max(lhs.coeff_norm(), d.Wa.coeff_norm());
    CHECK((lhs - rhs).coeff_norm() <= 1e-10 * scale);
  }
}

TEST_CASE("rhs_full: zero state and linear-part scaling") {
  auto g = make_grid(128);
  FullState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  auto r0 = rhs_full(zero, false);
  CHECK(r0.first_t.coeff_norm() == 0.0);
  CHECK(r0.second_t.coeff_norm() == 0.0);

  // distance to the linear part (-Q_alpha, iW) decays quadratically in eps
  std::vector<double> epss = {1e-3, 2e-3, 4e-3, 8e-3};
  std::vector<double> dist;
  for (double eps : epss) {
    Profile p;
    p.kind = Profile::Kind::single_mode;
    p.k = 2;
    p.amplitude = eps;
    auto s = make_full_profile(g, p, 1);
    auto r = rhs_full(s, false);
    auto lin_w = -1.0 * dalpha(s.Q);
    auto lin_q = cplx(0, 1) * s.W;
    dist.push_back(std::sqrt(std::pow((r.first_t - lin_w).coeff_norm(), 2) +
                             std::pow((r.second_t - lin_q).coeff_norm(), 2)));
  }
  auto fit = fit_loglog(epss, dist);
  CHECK(fit.valid);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("rhs holomorphy residuals stay small") {
  for (int trial = 0; trial < 4; ++trial) {
    auto s = small_random_state(256, 0.04, 300 + trial);
    auto r = rhs_diff(s);
    CHECK(r.holo_res_first < 1e-9);
    CHECK(r.holo_res_second < 1e-9);
    auto fs = full_from_diff(s);
    auto rf = rhs_full(fs);
    CHECK(rf.holo_res_first < 1e-9);
    CHECK(rf.holo_res_second < 1e-9);
  }
}

TEST_CASE("rhs_diff: zero state, algebraic forms, R_t closed form") {
  auto g = make_grid(128);
  DiffState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  auto r0 = rhs_diff(zero, false);
  CHECK(r0.first_t.coeff_norm() == 0.0);
  CHECK(r0.second_t.coeff_norm() == 0.0);

  // At Wa = 0 the non-transport part of R_t is i(Wa - a)/(1 + Wa) = -i eps^2
  double eps = 0.04;
  DiffState s{SpectralField::zero(g), SpectralField::single_mode(g, -1, eps), 0.0};
  auto d = derived_fields(s);
  auto forms = rhs_diff_forms(s);
  std::vector<cplx> transport(g->n);
  for (int i = 0; i < g->n; ++i)
    transport[i] = -d.b.values()[i].real() * d.Ra.values()[i];
  auto nontransport = forms.Rt - SpectralField::from_values(g, transport);
  CHECK(max_abs(nontransport - SpectralField::constant(g, cplx(0, -eps * eps))) < 1e-13);
}

TEST_CASE("cross-form agreement on a small-A ensemble") {
  for (int trial = 0; trial < 5; ++trial) {
    auto s = small_random_state(256, 0.05, 40 + trial);
    auto forms = rhs_diff_forms(s);
    double sc = std::max(forms.Yt_chain.coeff_norm(), 1e-300);
    CHECK(dealias(forms.Yt_chain - forms.Yt_yform).coeff_norm() <= 1e-9 * sc);
    double sr = std::max(forms.Rt.coeff_norm(), 1e-300);
    CHECK(dealias(forms.Rt - forms.Rt_yform).coeff_norm() <= 1e-9 * sr);

    auto fs = full_from_diff(s);
    auto f = rhs_full_forms(fs);
    double sw = std::max(f.Wt.coeff_norm(), 1e-300);
    CHECK(dealias(f.Wt - f.Wt_b).coeff_norm() <= 1e-10 * sw);
    double sq = std::max(f.Qt.coeff_norm(), 1e-300);
    CHECK(dealias(f.Qt - f.Qt_b).coeff_norm() <= 1e-10 * sq);

    // differentiation consistency between the flows
    auto dforms = rhs_diff_forms(to_diff(fs));
    auto lhs = dealias(dalpha(f.Wt));
    CHECK((lhs - dealias(dforms.Wat)).coeff_norm() <= 1e-9 * std::max(lhs.coeff_norm(), 1e-300));
  }
}

TEST_CASE("energies") {
  auto g = make_grid(128);
  FullState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  CHECK(energy_full(zero) == 0.0);

  // Single-mode closed forms by quadrature: the position term carries the
  // conserved weight (2 pi delta^2; the cubic part integrates to zero).
  double delta = 0.07, mu = 0.05;
  FullState sw{SpectralField::single_mode(g, -1, delta), SpectralField::zero(g), 0.0};
  CHECK(energy_full(sw) == doctest::Approx(2 * M_PI * delta * delta).epsilon(1e-12));
  FullState sq{SpectralField::zero(g), SpectralField::single_mode(g, -1, mu), 0.0};
  CHECK(energy_full(sq) == doctest::Approx(2 * M_PI * mu * mu).epsilon(1e-12));

  CHECK(energy_lin0(SpectralField::zero(g), SpectralField::zero(g)) == 0.0);
  CHECK(energy_lin0(SpectralField::single_mode(g, -1, delta), SpectralField::zero(g)) ==
        doctest::Approx(2 * M_PI * delta * delta).epsilon(1e-12));
  CHECK(energy_lin0(SpectralField::zero(g), SpectralField::single_mode(g, -1, mu)) ==
        doctest::Approx(2 * M_PI * mu * mu).epsilon(1e-12));
  // energy_lin0 is exactly the squared H_0 pair norm for holomorphic input
  std::mt19937_64 erng(321);
  auto wr = oracle::random_field(g, erng, 0.4, 1.5, true, true);
  auto rr = oracle::random_field(g, erng, 0.4, 2.0, true, true);
  double h0 = pair_norm(wr, rr, 0.0, false);
  CHECK(energy_lin0(wr, rr) == doctest::Approx(h0 * h0).epsilon(1e-12));
}

TEST_CASE("energy is invariant under translation") {
  auto s = small_random_state(256, 0.05, 77);
  auto fs = full_from_diff(s);
  double e0 = energy_full(fs);
  // translate by a phase shift in coefficient space
  auto g = fs.W.grid();
  double h = 0.37;
  auto shift = [&](const SpectralField& f) {
    std::vector<cplx> c(f.coeffs());
    for (int i = 0; i < g->n; ++i) {
      double phase = g->mode_of(i) * h;
      c[i] *= cplx(std::cos(phase), std::sin(phase));
    }
    return SpectralField::from_coeffs(g, std::move(c));
  };
  FullState ts{shift(fs.W), shift(fs.Q), 0.0};
  CHECK(std::abs(energy_full(ts) - e0) <= 1e-12 * std::max(1.0, std::abs(e0)));
}

TEST_CASE("diagonalization") {
  auto g = make_grid(128);
  std::mt19937_64 rng(31);
  auto w = oracle::random_field(g, rng, 0.5, 1.5, true, true);
  auto q = oracle::random_field(g, rng, 0.5, 2.0, true, true);

  // zero background: identity on the q slot
  auto [w0, r0] = diagonalize(w, q, SpectralField::zero(g));
  CHECK(oracle::rel_diff(r0, q) < 1e-13);

  // A(W_alpha, Q_alpha) = (Wa, R): Q_alpha - R W_alpha = R
  auto s = small_random_state(128, 0.05, 32);
  auto fs = full_from_diff(s);
  auto Wa = dalpha(fs.W);
  auto Qa = dalpha(fs.Q);
  auto d = to_diff(fs);
  auto resid = Qa - multiply(d.R, Wa) - d.R;
  CHECK(resid.coeff_norm() <= 1e-10 * std::max(1.0, Qa.coeff_norm()));

  // random round trip
  auto Rbg = oracle::random_field(g, rng, 0.05, 2.0, true, true);
  auto [dw, dr] = diagonalize(w, q, Rbg);
  auto [uw, uq] = undiagonalize(dw, dr, Rbg);
  CHECK(oracle::rel_diff(uq, project_P(q)) < 1e-12);
}

TEST_CASE("normal form of the (W,Q) system") {
  auto g = make_grid(128);
  FullState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  auto [wz, qz] = normal_form_full(zero);
  CHECK(wz.coeff_norm() == 0.0);
  CHECK(qz.coeff_norm() == 0.0);

  // correction magnitude is quadratic in the data size; the Re W W_alpha
  // product is checked against the convolution oracle
  double c1 = 0, c2 = 0;
  for (double eps : {1e-3, 2e-3}) {
    FullState s{SpectralField::single_mode(g, -3, eps), SpectralField::zero(g), 0.0};
    auto [wn, qn] = normal_form_full(s);
    auto corr = wn - s.W;
    auto expect = -2.0 * project_P(oracle::para_low_high(real_part(s.W), dalpha(s.W)) +
                                   oracle::para_low_high(dalpha(s.W), real_part(s.W)) +
                                   oracle::para_balanced(real_part(s.W), dalpha(s.W), false));
    CHECK(oracle::rel_diff(corr, expect) < 1e-12);
    (eps == 1e-3 ? c1 : c2) = corr.coeff_norm();
  }
  CHECK(c2 / c1 == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("normal form of the differentiated system") {
  auto g = make_grid(256);
  DiffState zero{SpectralField::zero(g), SpectralField::zero(g), 0.0};
  auto nf0 = normal_form_diff(zero);
  CHECK(nf0.dWa.coeff_norm() == 0.0);
  CHECK(nf0.dR.coeff_norm() == 0.0);

  // single mode with R = 0: the R correction vanishes and the Wa correction
  // is the balanced self-interaction with X, cross-checked by the oracle
  double eps = 0.01;
  DiffState s{SpectralField::single_mode(g, -8, eps), SpectralField::zero(g), 0.0};
  auto nf = normal_form_diff(s);
  CHECK(nf.dR.coeff_norm() == 0.0);
  auto d = derived_fields(s);
  auto X2 = 2.0 * real_part(d.X);
  auto expect = -1.0 * dalpha(oracle::para_balanced(s.Wa, X2, true));
  CHECK(oracle::rel_diff(nf.dWa, expect) < 1e-12);
  CHECK(nf.dWa.coeff_norm() > 0.0);

  // bounded correction ratio across resolutions on a random small ensemble
  for (int n : {256, 512, 1024}) {
    double worst = 0;
    for (int trial = 0; trial < 3; ++trial) {
      auto st = make_random_state(make_grid(n), 0.04, 2.0, 2.5, 60 + trial, 20.0);
      worst = std::max(worst, normal_form_diff(st).ratio_hdot34);
    }
    CHECK(worst < 10.0);
  }
}

TEST_CASE("Taylor sign on a random ensemble") {
  for (int trial = 0; trial < 10; ++trial) {
    auto s = small_random_state(128, 0.08, 800 + trial);
    auto d = derived_fields(s);
    auto tc = taylor_check(d);
    CHECK(tc.is_real);
    CHECK(tc.min_one_plus_a > 0.0);
  }
}

TEST_CASE("snapshot JSON round trip is bit-stable") {
  auto s = small_random_state(64, 0.05, 5);
  s.t = 1.375;
  auto text = snapshot_json(s);
  auto back = diff_state_from_json(text);
  CHECK(back.t == s.t);
  for (int i = 0; i < s.Wa.n(); ++i) {
    CHECK(back.Wa.coeffs()[i] == s.Wa.coeffs()[i]);
    CHECK(back.R.coeffs()[i] == s.R.coeffs()[i]);
  }
  auto fs = full_from_diff(s);
  auto text2 = snapshot_json(fs);
  auto back2 = full_state_from_json(text2);
  for (int i = 0; i < fs.W.n(); ++i) {
    CHECK(back2.W.coeffs()[i] == fs.W.coeffs()[i]);
    CHECK(back2.Q.coeffs()[i] == fs.Q.coeffs()[i]);
  }
}

TEST_SUITE_END();
