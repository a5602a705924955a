#pragma once

// Linearized flow around a background state, its paradifferential
// truncation, the paradifferential energy, weighted variables, the maps
// between the two linearized flows, and the first linearized normal-form
// correction.
//
// Backgrounds enter as DerivedFields (computed once, shared read-only).
// Paraproduct coefficients use the plain quantization except for the real
// symbol 1 + a, where the symmetrized (T + T*)/2 form keeps the energy
// pairing real.

#include <utility>

#include "ww2d/waterwave.hpp"

namespace ww2d {

struct LinState {
  SpectralField w, r;
  double t = 0.0;
};

struct LinSources {
  SpectralField m, n;    // coefficient fields of the linearized F and n-term
  SpectralField G0, K0;  // right-hand sides; holomorphic after P
};

/// m = (r_a + R_a w)/J + conj(R) w_a/(1+Wa)^2, n = conj(R)(r_a + R_a w)/(1+Wa),
/// G0 = (1+Wa)(P conj m + Pbar m), K0 = Pbar n - P conj n.
LinSources lin_sources(const DerivedFields& bg, const SpectralField& w, const SpectralField& r,
                       bool dealias_output = true);

/// Projected linearized system; at zero background exactly (-r_alpha, i w).
RhsPair rhs_linearized(const DerivedFields& bg, const SpectralField& w, const SpectralField& r,
                       bool dealias_output = true);

/// Paradifferential flow: solves
///   T_Dt w + T_{1-conj Y} d_alpha r + T_{(1-conj Y) R_alpha} w = 0,
///   T_Dt r - i T_{1-Y} Tsym_{1+a} w = 0
/// for (w_t, r_t).
RhsPair rhs_paralin(const DerivedFields& bg, const SpectralField& w, const SpectralField& r);

/// E^{0,para} = int Re(Tsym_{1+a} w conj w) + Im(r conj r_alpha) dalpha.
/// At zero background this is exactly the squared L2 x Hdot^{1/2} pair norm.
double energy_paralin0(const DerivedFields& bg, const SpectralField& w, const SpectralField& r);

/// Leading weighted conjugation (T_Phi |D|^s w, T_Phi |D|^s r), Phi = J^{-s}.
std::pair<SpectralField, SpectralField> weighted_vars(const DerivedFields& bg,
                                                      const SpectralField& w,
                                                      const SpectralField& r, double s);

/// (w, r) -> (w_alpha, (r_alpha + R_alpha w)/(1+Wa)), the linearized analogue
/// of the differentiation map.
std::pair<SpectralField, SpectralField> lift_to_diff(const DerivedFields& bg,
                                                     const SpectralField& w,
                                                     const SpectralField& r);

/// Inverse at leading paradifferential order:
/// w = dalpha^{-1} what, r = dalpha^{-1}(T_{1+Wa} rhat - T_{R_alpha} dalpha^{-1} what).
std::pair<SpectralField, SpectralField> map_diff_to_lin(const DerivedFields& bg,
                                                        const SpectralField& what,
                                                        const SpectralField& rhat);

/// First linearized normal-form correction (X from the background):
///   w1 = -d_alpha(T_w X + Pi(w, X)) - Pi(w_alpha, conj X),
///   r1 = -(T_{r_alpha} X + Pi(r_alpha, X)) - Pi(r_alpha, conj X),
/// with Pi carrying the projection P.
std::pair<SpectralField, SpectralField> nf_correction_lin(const DerivedFields& bg,
                                                          const SpectralField& w,
                                                          const SpectralField& r);

}  // namespace ww2d
