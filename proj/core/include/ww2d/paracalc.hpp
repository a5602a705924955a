#pragma once

// Dyadic Littlewood-Paley analysis on the periodic grid: band projectors,
// paraproducts, square functions, the norm estimators built on them, the
// scalar control parameters, para-Leibniz error functionals and frequency
// envelopes.
//
// The partition uses raised-cosine bumps in log2|k|: band 0 covers
// |k| <= 2 (with psi = 1 for |k| <= 1) and holds the mean; band j is
// supported in 2^{j-1} <= |k| <= 2^{j+1} with psi_j(2^j) = 1; the top band
// J = log2(n/2) - 1 absorbs everything up to n/2. The bumps sum to one at
// every mode.
//
// Low-high separation: T_f g sums f_{<l} g_l over bands l, where the low
// cutoff f_{<l} keeps bands j < l - 4 together with the mean of f. The
// mean counts as "below" every band, so T_c g = c g for constants; the
// balanced part Pi(f,g) sums band pairs within distance 4 (means excluded,
// with the mean-times-mean product subtracted so that
// fg = T_f g + T_g f + Pi(f,g) holds exactly).

#include <vector>

#include "ww2d/spectral.hpp"

namespace ww2d {

/// Frequency separation offset in the low-high paraproduct (f_{<k-4} g_k).
inline constexpr int kParaSeparation = 4;

struct DyadicPartition {
  GridPtr grid;
  int J;  // highest band index; bands run 0..J
  std::vector<std::vector<double>> psi;  // [J+1][n] band weights per storage index
  std::vector<std::vector<double>> low;  // [J+1][n] weights of P_{<l}

  /// Partition for a grid, built once per size and cached (thread-safe).
  static const DyadicPartition& of(const GridPtr& g);
};

int lp_band_count(const PeriodicGrid& g);  // J + 1

/// P_j f: coefficient-wise multiplication by psi_j. 0 <= j <= J.
SpectralField lp_project(const SpectralField& f, int j);
/// P_{<k} f: bands j < k - 4 plus the mean of f.
SpectralField lp_below(const SpectralField& f, int k);

/// T_f g, the low-high paraproduct.
SpectralField para_low_high(const SpectralField& f, const SpectralField& g);
/// Adjoint T_f^* g (with respect to the L^2 pairing).
SpectralField para_low_high_adjoint(const SpectralField& f, const SpectralField& g);
/// Symmetrized quantization (T_f + T_f^*)/2; self-adjoint for real f.
SpectralField para_sym(const SpectralField& f, const SpectralField& g);

/// Pi(f,g), the balanced part; with project=true composes with P.
SpectralField para_balanced(const SpectralField& f, const SpectralField& g, bool project = false);

/// Restricted diagonal sum over bands j >= k of P_j f * P_j g.
SpectralField pi_geq(const SpectralField& f, const SpectralField& g, int k);

/// S(f)(alpha) = (sum_j |P_j f(alpha)|^2)^{1/2}; real non-negative field.
SpectralField square_function(const SpectralField& f);
/// Restricted version summing bands j > k.
SpectralField square_function_above(const SpectralField& f, int k);

// -- norms -------------------------------------------------------------------
struct NormSpec {
  enum class Kind { L2, Linf, Hdot, H, BMO, BMOs, BesovInf2 };
  Kind kind = Kind::L2;
  double s = 0.0;

  static NormSpec l2() { return {Kind::L2, 0.0}; }
  static NormSpec linf() { return {Kind::Linf, 0.0}; }
  static NormSpec hdot(double s) { return {Kind::Hdot, s}; }
  static NormSpec h(double s) { return {Kind::H, s}; }
  static NormSpec bmo() { return {Kind::BMO, 0.0}; }
  static NormSpec bmos(double s) { return {Kind::BMOs, s}; }
  static NormSpec besov_inf2(double s) { return {Kind::BesovInf2, s}; }
};

/// Deterministic norm estimator. Hdot ignores the mean; BMO is the dyadic
/// square-function analogue of (the square root of) sup_Q mean_Q |S_{>k}f|^2
/// over grid-aligned intervals of length 2pi 2^{-k}, 0 <= k <= J;
/// BesovInf2(s) = (sum_j (2^{js} ||P_j f||_inf)^2)^{1/2} with the mean
/// dropped from band 0 (homogeneous convention).
double norm(const SpectralField& f, const NormSpec& spec);

/// ||op^s (Wa, R)||_{L2 x Hdot^{1/2}} with op = |D| (homogeneous) or <D>.
double pair_norm(const SpectralField& Wa, const SpectralField& R, double s, bool homogeneous);

// -- control parameters --------------------------------------------------------
struct ControlParams {
  double A = 0;       // ||Wa||_inf + ||Y||_inf + |||D|^1/2 R||_{Linf cap B0_inf2}
  double B = 0;       // |||D|^1/2 Wa||_BMO + ||R_alpha||_BMO
  double A14 = 0;     // ||Wa||_{B^1/4_inf2} + ||R||_{B^3/4_inf2}
  double Asharp = 0;  // ||Wa||_{Hdot^1/2} + ||R_alpha||_{L2}
};

/// Scalars of the (A-def)/(B-def)/(A14-def)/(Asharp-def) family. Requires
/// min |1 + Wa| >= delta_J so that Y = Wa/(1+Wa) exists.
ControlParams control_params(const SpectralField& Wa, const SpectralField& R,
                             double delta_J = 0.5);

// -- para-Leibniz error functionals --------------------------------------------
struct ParaLeibnizErrors {
  SpectralField unbalanced;           // E^p_L
  SpectralField unbalanced_full;      // E^p_L variant with T_{D_t u} -> full D_t u
  SpectralField balanced;             // E^pi_L
  SpectralField balanced_full;        // E^pi_L variant with full D_t u
};

/// Leibniz-rule errors of the para-material derivative T_{D_t} = d/dt + T_b d/dalpha
/// over T_u v and Pi(u, v), with the time derivatives u_t, v_t supplied.
ParaLeibnizErrors para_leibniz_errors(const SpectralField& b, const SpectralField& u,
                                      const SpectralField& v, const SpectralField& u_t,
                                      const SpectralField& v_t);

/// Minimal H_s frequency envelope c_k = max_j 2^{-delta |j-k|} ||P_j (Wa,R)||_{H_s}.
/// Slowly varying and majorizes the dyadic pair norms by construction.
std::vector<double> frequency_envelope(const SpectralField& Wa, const SpectralField& R,
                                       double s, double delta);

}  // namespace ww2d
