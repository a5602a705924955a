#pragma once

// Periodic pseudo-spectral layer: grid, transforms, Fourier multipliers,
// Hilbert transform, the projections P / Pbar onto non-positive /
// non-negative modes, dealiasing and the antiderivative.
//
// Conventions, fixed once for the whole project:
//  * grid of n (power of two) nodes alpha_j = 2 pi j / n on [0, 2pi),
//    mode set {-n/2, ..., n/2 - 1};
//  * forward transform is c_k = (1/n) sum_j f(alpha_j) e^{-i k alpha_j},
//    so a single mode e^{i k alpha} has c_k = 1;
//  * sgn(0) = 0 in the Hilbert symbol, hence P = (I - iH)/2 keeps
//    negative modes, halves the mean and kills positive modes; P(1) = 1/2;
//  * |D|^s zeroes the mean for s > 0 and refuses a mean for s < 0;
//  * dealiasing zeroes |k| > n/3.

#include <complex>
#include <memory>
#include <vector>

#include "ww2d/errors.hpp"

namespace ww2d {

using cplx = std::complex<double>;

struct PeriodicGrid;
using GridPtr = std::shared_ptr<const PeriodicGrid>;

struct PeriodicGrid {
  int n;                       // point count, power of two, >= 8
  std::vector<double> nodes;   // alpha_j = 2 pi j / n

  // storage index <-> integer mode (FFT layout: 0..n/2-1, -n/2..-1)
  int mode_of(int idx) const { return idx < n / 2 ? idx : idx - n; }
  int idx_of(int mode) const { return mode >= 0 ? mode : mode + n; }
  int dealias_cutoff() const { return n / 3; }  // keep |k| <= n/3
};

/// Build a grid; rejects n < 8 or n not a power of two.
GridPtr make_grid(int n);

/// Immutable periodic field; coefficients and point values are kept in
/// sync at construction so reads are race-free.
class SpectralField {
 public:
  SpectralField() = default;
  static SpectralField from_values(GridPtr g, std::vector<cplx> values);
  static SpectralField from_coeffs(GridPtr g, std::vector<cplx> coeffs);
  static SpectralField zero(GridPtr g);
  static SpectralField constant(GridPtr g, cplx value);
  /// c_k = 1 at the given mode, all other coefficients zero.
  static SpectralField single_mode(GridPtr g, int mode, cplx amplitude = 1.0);

  const GridPtr& grid() const { return grid_; }
  int n() const { return grid_->n; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  const std::vector<cplx>& values() const { return values_; }
  cplx coeff(int mode) const { return coeffs_[grid_->idx_of(mode)]; }
  cplx mean() const { return coeffs_[0]; }
  bool empty() const { return coeffs_.empty(); }

  /// l2 norm of the coefficient vector (not the L2(dalpha) norm).
  double coeff_norm() const;

 private:
  GridPtr grid_;
  std::vector<cplx> coeffs_;
  std::vector<cplx> values_;
};

// -- raw transforms (exposed mostly for tests and benchmarks) --------------
std::vector<cplx> transform(const PeriodicGrid& g, const std::vector<cplx>& values);
std::vector<cplx> inverse_transform(const PeriodicGrid& g, const std::vector<cplx>& coeffs);

// -- algebra ----------------------------------------------------------------
SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(cplx s, const SpectralField& f);
SpectralField operator*(double s, const SpectralField& f);
SpectralField conj(const SpectralField& f);
SpectralField real_part(const SpectralField& f);

/// Point-wise product on the collocation grid; optional 2/3-rule dealias.
SpectralField multiply(const SpectralField& a, const SpectralField& b, bool dealias_after = false);
/// Point-wise quotient; caller guarantees the denominator is bounded away
/// from zero (the waterwave module gates this with delta_J).
SpectralField divide(const SpectralField& a, const SpectralField& b);

// -- multipliers -------------------------------------------------------------
struct MultiplierSymbol {
  std::vector<cplx> weight;  // one weight per storage index
  std::string name;
};

MultiplierSymbol deriv_symbol(const PeriodicGrid& g);            // i k
MultiplierSymbol abs_d_symbol(const PeriodicGrid& g, double s);  // |k|^s, 0 at k=0 (s>0)
MultiplierSymbol bessel_symbol(const PeriodicGrid& g, double s); // (1+k^2)^{s/2}

SpectralField apply_multiplier(const SpectralField& f, const MultiplierSymbol& m);
SpectralField dalpha(const SpectralField& f);
/// |D|^s f. For s > 0 the mean is dropped; for s < 0 a non-negligible mean
/// (relative to the coefficient norm) raises mean_mode_error.
SpectralField abs_deriv(const SpectralField& f, double s);
SpectralField bessel_deriv(const SpectralField& f, double s);  // <D>^s f

// -- Hilbert transform and projections ---------------------------------------
SpectralField hilbert(const SpectralField& f);
/// P = (I - iH)/2: keeps k < 0, halves k = 0, zeroes k > 0.
SpectralField project_P(const SpectralField& f);
/// Pbar = I - P.
SpectralField project_Pbar(const SpectralField& f);
/// Kills positive modes but leaves the mean untouched; used where the zero
/// mode is evolved from the unprojected equations (gauge handled separately).
SpectralField project_keep_mean(const SpectralField& f);

/// Relative l2 mass of the positive modes; 0 for the zero field.
double holo_residual(const SpectralField& f);

/// Default relative tolerance on positive-mode mass for holomorphic fields.
inline constexpr double kHoloTol = 1e-10;

/// A field whose spectrum lives in k <= 0 within tau_holo.
struct HoloField {
  SpectralField f;
  HoloField() = default;
  /// Validates the holomorphy invariant; throws holomorphy_error.
  explicit HoloField(SpectralField field, double tau_holo = kHoloTol);
};

/// Antiderivative: mean-free g with dalpha(g) = f. Requires
/// |mean(f)| <= 1e-12 * ||f||_2 (zero field exempt); throws mean_mode_error.
SpectralField invert_dalpha(const SpectralField& f);

/// 2/3-rule: zero all coefficients with |k| > n/3. Idempotent.
SpectralField dealias(const SpectralField& f);

// -- small helpers used throughout ------------------------------------------
/// Trapezoid quadrature of a point-value field over [0, 2pi).
cplx integrate(const SpectralField& f);
double max_abs(const SpectralField& f);   // max_j |f(alpha_j)|
double l2_norm(const SpectralField& f);   // sqrt(int |f|^2 dalpha)

}  // namespace ww2d
