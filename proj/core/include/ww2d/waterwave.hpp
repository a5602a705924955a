#pragma once

// State types for the gravity wave system in holomorphic coordinates,
// the derived coefficient fields (R, Y, J, F, b, a, M, X), the right-hand
// sides of the nonlinear systems in both algebraic forms, the conserved
// energies, the diagonalization map and the two normal-form transformations.
//
// All rational coefficient fields are evaluated point-wise on the
// collocation grid with no interior filtering, so the algebraic identities
// relating the two system forms (and the two representations of M) hold to
// rounding error. Dealiasing is applied to right-hand-side outputs and to
// the evolving state, under the solver flag.

#include <string>
#include <utility>

#include "ww2d/paracalc.hpp"
#include "ww2d/spectral.hpp"

namespace ww2d {

inline constexpr double kDefaultDeltaJ = 0.5;

/// (W, Q) with W = Z - alpha. Mean of W is purely imaginary, mean of Q real
/// (periodic gauge); both holomorphic within tau_holo.
struct FullState {
  SpectralField W, Q;
  double t = 0.0;
};

/// Diagonal differentiated variables (Wa, R) = (W_alpha, Q_alpha/(1+W_alpha)).
struct DiffState {
  SpectralField Wa, R;
  double t = 0.0;
};

/// Throws holomorphy_error / mean_mode_error when the gauge or spectrum
/// invariants fail.
void validate(const FullState& s, double tau_holo = kHoloTol);
void validate(const DiffState& s, double tau_holo = kHoloTol);

/// (W, Q) -> (W_alpha, Q_alpha / (1 + W_alpha)).
DiffState to_diff(const FullState& s, double delta_J = kDefaultDeltaJ);

struct DerivedFields {
  SpectralField Wa, R;           // the differentiated pair the rest derives from
  SpectralField Ra;              // R_alpha
  SpectralField one_plus_Wa;     // 1 + Wa
  SpectralField Y;               // Wa / (1 + Wa)
  SpectralField Jfield;          // |1 + Wa|^2 (real)
  SpectralField F;               // P[(1-conj Y) R - (1-Y) conj R]
  SpectralField b;               // advection velocity (real)
  SpectralField a;               // Taylor remainder (real); 1 + a is the Taylor coefficient
  SpectralField M;               // projected representation
  SpectralField M_alt;           // derivative representation (Leibniz-expanded)
  SpectralField X;               // T_{1-Y} W
  double min_one_plus_Wa = 0.0;  // min_j |1 + Wa|
  double a_imag_max = 0.0;       // realness residuals of a, b, M as computed
  double b_imag_max = 0.0;
  double M_imag_max = 0.0;
};

/// Derived fields from a full state. Throws degenerate_surface_error when
/// min |1 + W_alpha| < delta_J.
DerivedFields derived_fields(const FullState& s, double delta_J = kDefaultDeltaJ);
/// Same from a diff state; W is recovered as the mean-free antiderivative of
/// Wa plus i*w_mean_imag (enters only through X).
DerivedFields derived_fields(const DiffState& s, double delta_J = kDefaultDeltaJ,
                             double w_mean_imag = 0.0);

namespace detail {
/// Solver-loop variant: skips X and F.
DerivedFields derived_fields_light(const DiffState& s, double delta_J);
}  // namespace detail

// -- right-hand sides ----------------------------------------------------------

struct RhsPair {
  SpectralField first_t, second_t;  // P-projected (and dealiased if requested)
  double holo_res_first = 0.0;      // positive-mode residuals before projection
  double holo_res_second = 0.0;
};

/// (W_t, Q_t) of the position-velocity system. Primary algebraic form.
RhsPair rhs_full(const FullState& s, bool dealias_output = true,
                 double delta_J = kDefaultDeltaJ);
/// (Wa_t, R_t) of the differentiated diagonal system.
RhsPair rhs_diff(const DiffState& s, bool dealias_output = true,
                 double delta_J = kDefaultDeltaJ);

/// Both algebraic forms, unprojected, for the cross-form agreement checks.
struct FullRhsForms {
  SpectralField Wt, Qt;      // -F(1+W_alpha) form
  SpectralField Wt_b, Qt_b;  // material-derivative form (D_t W + b = conj R, ...)
};
FullRhsForms rhs_full_forms(const FullState& s, double delta_J = kDefaultDeltaJ);

struct DiffRhsForms {
  SpectralField Wat, Rt;        // diagonal system, unprojected
  SpectralField Yt_chain;       // Wat * (1-Y)^2, the chain-rule Y_t
  SpectralField Yt_yform;       // -b Y_alpha - |1-Y|^2 R_alpha + (1-Y) M
  SpectralField Rt_yform;       // -b R_alpha + i(1+a) Y - i a
};
DiffRhsForms rhs_diff_forms(const DiffState& s, double delta_J = kDefaultDeltaJ);

// -- energies --------------------------------------------------------------------

/// Conserved energy of the nonlinear (W, Q) flow (quadratic plus cubic part).
double energy_full(const FullState& s);
/// Conserved energy of the zero-background linear system.
double energy_lin0(const SpectralField& w, const SpectralField& r);

// -- diagonalization ---------------------------------------------------------------

/// (w, q) -> (w, q - R_bg w), point-wise then P-projected.
std::pair<SpectralField, SpectralField> diagonalize(const SpectralField& w,
                                                    const SpectralField& q,
                                                    const SpectralField& R_bg);
std::pair<SpectralField, SpectralField> undiagonalize(const SpectralField& w,
                                                      const SpectralField& r,
                                                      const SpectralField& R_bg);

// -- normal forms ------------------------------------------------------------------

/// Quadratic-eliminating transformation of the undifferentiated system:
/// (W, Q) -> (W - 2P(Re W W_alpha), Q - 2P(Re W Q_alpha)).
std::pair<SpectralField, SpectralField> normal_form_full(const FullState& s);

struct DiffNormalForm {
  SpectralField Wa_nf, R_nf;  // state plus correction
  SpectralField dWa, dR;      // the corrections themselves
  double ratio_hdot34 = 0.0;  // ||(dWa,dR)||_{Hdot 3/4 pair} / (A ||(Wa,R)||_...)
};

/// Paradifferential normal form of the differentiated system,
/// dWa = -d/dalpha Pi(Wa, 2 Re X), dR = -Pi(R_alpha, 2 Re X) - Pi(T_{1-conj Y} conj Wa, R),
/// with Pi carrying the projection P.
DiffNormalForm normal_form_diff(const DiffState& s, double delta_J = kDefaultDeltaJ);

// -- Taylor sign -------------------------------------------------------------------

struct TaylorCheck {
  bool is_real = false;
  double min_one_plus_a = 0.0;
};
TaylorCheck taylor_check(const DerivedFields& df);

// -- snapshot files ----------------------------------------------------------------
// JSON schema: {"n": int, "t": double, "W_coeffs": [[re, im], ...], "Q_coeffs": ...}
// or {"n", "t", "Wa_coeffs", "R_coeffs"}; coefficient arrays run over modes
// -n/2 .. n/2-1 in increasing order. Round-trips bit-stably.

std::string snapshot_json(const FullState& s);
std::string snapshot_json(const DiffState& s);
FullState full_state_from_json(const std::string& text);
DiffState diff_state_from_json(const std::string& text);

}  // namespace ww2d
