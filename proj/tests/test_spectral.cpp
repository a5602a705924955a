#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ww2d/spectral.hpp"

using namespace ww2d;

TEST_SUITE_BEGIN("spectral");

TEST_CASE("make_grid modes and nodes") {
  auto g = make_grid(8);
  CHECK(g->n == 8);
  CHECK(g->mode_of(0) == 0);
  CHECK(g->mode_of(3) == 3);
  CHECK(g->mode_of(4) == -4);
  CHECK(g->mode_of(7) == -1);
  CHECK(g->idx_of(-4) == 4);
  auto g2 = make_grid(256);
  CHECK(g2->nodes.size() == 256);
  CHECK(g2->nodes[0] == 0.0);
  CHECK(g2->nodes[255] == doctest::Approx(2 * M_PI * 255 / 256));
  CHECK_THROWS_AS(make_grid(6), config_error);
  CHECK_THROWS_AS(make_grid(4), config_error);
  CHECK_THROWS_AS(make_grid(100), config_error);
}

TEST_CASE("transform basics") {
  auto g = make_grid(64);
  auto one = SpectralField::constant(g, 1.0);
  CHECK(std::abs(one.coeff(0) - 1.0) < 1e-15);
  for (int k = 1; k < 32; ++k) CHECK(std::abs(one.coeff(k)) < 1e-15);

  std::vector<cplx> v(g->n);
  for (int j = 0; j < g->n; ++j) v[j] = std::exp(cplx(0, -g->nodes[j]));
  auto em = SpectralField::from_values(g, v);
  CHECK(std::abs(em.coeff(-1) - 1.0) < 1e-14);
  CHECK(std::abs(em.coeff(1)) < 1e-14);

  CHECK_THROWS_AS(transform(*g, std::vector<cplx>(5)), config_error);
}

TEST_CASE("round trip against the O(n^2) oracle") {
  auto g = make_grid(128);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  std::vector<cplx> v(g->n);
  for (auto& x : v) x = cplx(gauss(rng), gauss(rng));
  auto f = SpectralField::from_values(g, v);
  // forward transform matches the slow sum
  auto slow = oracle::naive_dft(v);
  double diff = 0, scale = 0;
  for (int i = 0; i < g->n; ++i) {
    diff += std::norm(f.coeffs()[i] - slow[i]);
    scale += std::norm(slow[i]);
  }
  CHECK(std::sqrt(diff / scale) < 1e-13);
  // and the inverse reproduces the values
  auto back = SpectralField::from_coeffs(g, f.coeffs());
  double vd = 0, vs = 0;
  for (int i = 0; i < g->n; ++i) {
    vd += std::norm(back.values()[i] - v[i]);
    vs += std::norm(v[i]);
  }
  CHECK(std::sqrt(vd / vs) < 1e-13);
}

TEST_CASE("multipliers") {
  auto g = make_grid(64);
  auto em = SpectralField::single_mode(g, -1);
  CHECK(oracle::rel_diff(dalpha(em), cplx(0, -1) * em) < 1e-15);

  auto e4 = SpectralField::single_mode(g, -4);
  CHECK(oracle::rel_diff(abs_deriv(e4, 0.5), 2.0 * e4) < 1e-15);

  auto one = SpectralField::constant(g, 3.0);
  CHECK(abs_deriv(one, 0.5).coeff_norm() == 0.0);

  CHECK_THROWS_AS(abs_deriv(one, -0.5), mean_mode_error);
  CHECK_NOTHROW(abs_deriv(em, -0.5));
}

TEST_CASE("hilbert transform identities") {
  auto g = make_grid(64);
  std::vector<cplx> cv(g->n), sv(g->n);
  for (int j = 0; j < g->n; ++j) {
    cv[j] = std::cos(g->nodes[j]);
    sv[j] = std::sin(g->nodes[j]);
  }
  auto c = SpectralField::from_values(g, cv);
  auto s = SpectralField::from_values(g, sv);
  CHECK(oracle::rel_diff(hilbert(c), s) < 1e-14);
  CHECK(oracle::rel_diff(hilbert(s), -1.0 * c) < 1e-14);
  CHECK(hilbert(SpectralField::constant(g, 1.0)).coeff_norm() == 0.0);

  std::mt19937_64 rng(5);
  auto f = oracle::random_field(g, rng, 1.0, 0.0, false, /*mean_free=*/true);
  CHECK(oracle::rel_diff(hilbert(hilbert(f)), -1.0 * f) < 1e-12);
}

TEST_CASE("projections P and Pbar") {
  auto g = make_grid(64);
  CHECK(project_P(SpectralField::single_mode(g, 1)).coeff_norm() == 0.0);
  auto em = SpectralField::single_mode(g, -1);
  CHECK(oracle::rel_diff(project_P(em), em) == 0.0);
  CHECK(std::abs(project_P(SpectralField::constant(g, 1.0)).mean() - 0.5) < 1e-15);

  std::mt19937_64 rng(6);
  auto f = oracle::random_field(g, rng, 1.0);
  // the half-at-zero convention makes P idempotent away from the mean
  auto f0 = f - SpectralField::constant(g, f.mean());
  auto Pf = project_P(f0);
  CHECK(oracle::rel_diff(project_P(Pf), Pf) < 1e-15);
  // P + Pbar = I, exact per coefficient
  auto sum = project_P(f) + project_Pbar(f);
  for (int i = 0; i < g->n; ++i) CHECK(std::abs(sum.coeffs()[i] - f.coeffs()[i]) <= 1e-15);
  CHECK_NOTHROW(HoloField{Pf});  // P output satisfies the holomorphy invariant
}

TEST_CASE("holo_residual") {
  auto g = make_grid(64);
  CHECK(holo_residual(SpectralField::single_mode(g, -2)) == 0.0);
  CHECK(holo_residual(SpectralField::single_mode(g, 3)) == 1.0);
  auto mix = SpectralField::single_mode(g, -1) + SpectralField::single_mode(g, 1, 0.1);
  CHECK(holo_residual(mix) == doctest::Approx(0.1 / std::sqrt(1.01)).epsilon(1e-12));
  CHECK(holo_residual(SpectralField::zero(g)) == 0.0);
  CHECK_THROWS_AS(HoloField{mix}, holomorphy_error);
}

TEST_CASE("invert_dalpha") {
  auto g = make_grid(64);
  auto em = SpectralField::single_mode(g, -1);
  CHECK(oracle::rel_diff(invert_dalpha(em), cplx(0, 1) * em) < 1e-15);

  std::mt19937_64 rng(7);
  auto f = oracle::random_field(g, rng, 1.0);
  auto centered = f - SpectralField::constant(g, f.mean());
  auto back = invert_dalpha(dalpha(f));
  CHECK(oracle::rel_diff(back, centered) < 1e-13);
  CHECK(std::abs(invert_dalpha(dalpha(f)).mean()) < 1e-15);
  CHECK_THROWS_AS(invert_dalpha(SpectralField::constant(g, 2.0)), mean_mode_error);
}

TEST_CASE("dealias") {
  auto g = make_grid(64);  // cutoff 21
  auto keep = SpectralField::single_mode(g, -20);
  CHECK(oracle::rel_diff(dealias(keep), keep) == 0.0);
  CHECK(dealias(SpectralField::single_mode(g, 31)).coeff_norm() == 0.0);
  CHECK(dealias(SpectralField::single_mode(g, -22)).coeff_norm() == 0.0);

  std::mt19937_64 rng(8);
  auto f = oracle::random_field(make_grid(128), rng, 1.0);
  CHECK(oracle::rel_diff(dealias(dealias(f)), dealias(f)) == 0.0);
}

TEST_CASE("Parseval under the 1/n-forward normalization") {
  auto g = make_grid(256);
  std::mt19937_64 rng(9);
  auto f = oracle::random_field(g, rng, 1.3);
  CHECK(l2_norm(f) ==
        doctest::Approx(std::sqrt(2 * M_PI) * f.coeff_norm()).epsilon(1e-12));
  auto em = SpectralField::single_mode(g, -1);
  CHECK(l2_norm(em) == doctest::Approx(std::sqrt(2 * M_PI)).epsilon(1e-13));
}

TEST_SUITE_END();
