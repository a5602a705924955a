#include "ww2d/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace ww2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One FFTW plan pair per grid size. Plan creation is not thread-safe, so
// the cache is guarded; execution via fftw_execute_dft on caller buffers is.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> buf(n);
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    PlanPair pp;
    pp.fwd = fftw_plan_dft_1d(n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    pp.bwd = fftw_plan_dft_1d(n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_[n] = pp;
    return pp;
  }

 private:
  std::mutex mu_;
  std::unordered_map<int, PlanPair> plans_;
};

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

GridPtr make_grid(int n) {
  if (n < 8 || !is_pow2(n))
    throw config_error("make_grid: n must be a power of two with n >= 8, got " + std::to_string(n));
  auto g = std::make_shared<PeriodicGrid>();
  g->n = n;
  g->nodes.resize(n);
  for (int j = 0; j < n; ++j) g->nodes[j] = kTwoPi * j / n;
  return g;
}

std::vector<cplx> transform(const PeriodicGrid& g, const std::vector<cplx>& values) {
  if (static_cast<int>(values.size()) != g.n)
    throw config_error("transform: length mismatch");
  std::vector<cplx> out = values;
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(PlanCache::instance().get(g.n).fwd, p, p);
  const double inv_n = 1.0 / g.n;
  for (auto& c : out) c *= inv_n;
  return out;
}

std::vector<cplx> inverse_transform(const PeriodicGrid& g, const std::vector<cplx>& coeffs) {
  if (static_cast<int>(coeffs.size()) != g.n)
    throw config_error("inverse_transform: length mismatch");
  std::vector<cplx> out = coeffs;
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(PlanCache::instance().get(g.n).bwd, p, p);
  return out;
}

SpectralField SpectralField::from_values(GridPtr g, std::vector<cplx> values) {
  SpectralField f;
  f.coeffs_ = transform(*g, values);
  f.values_ = std::move(values);
  f.grid_ = std::move(g);
  return f;
}

SpectralField SpectralField::from_coeffs(GridPtr g, std::vector<cplx> coeffs) {
  SpectralField f;
  f.values_ = inverse_transform(*g, coeffs);
  f.coeffs_ = std::move(coeffs);
  f.grid_ = std::move(g);
  return f;
}

SpectralField SpectralField::zero(GridPtr g) {
  SpectralField f;
  f.coeffs_.assign(g->n, 0.0);
  f.values_.assign(g->n, 0.0);
  f.grid_ = std::move(g);
  return f;
}

SpectralField SpectralField::constant(GridPtr g, cplx value) {
  SpectralField f;
  f.coeffs_.assign(g->n, 0.0);
  f.coeffs_[0] = value;
  f.values_.assign(g->n, value);
  f.grid_ = std::move(g);
  return f;
}

SpectralField SpectralField::single_mode(GridPtr g, int mode, cplx amplitude) {
  std::vector<cplx> c(g->n, 0.0);
  c[g->idx_of(mode)] = amplitude;
  return from_coeffs(std::move(g), std::move(c));
}

double SpectralField::coeff_norm() const {
  double s = 0;
  for (const auto& c : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  std::vector<cplx> c(a.coeffs());
  for (int i = 0; i < a.n(); ++i) c[i] += b.coeffs()[i];
  return SpectralField::from_coeffs(a.grid(), std::move(c));
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  std::vector<cplx> c(a.coeffs());
  for (int i = 0; i < a.n(); ++i) c[i] -= b.coeffs()[i];
  return SpectralField::from_coeffs(a.grid(), std::move(c));
}

SpectralField operator*(cplx s, const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  for (auto& x : c) x *= s;
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField operator*(double s, const SpectralField& f) { return cplx(s, 0.0) * f; }

SpectralField conj(const SpectralField& f) {
  std::vector<cplx> v(f.values());
  for (auto& x : v) x = std::conj(x);
  return SpectralField::from_values(f.grid(), std::move(v));
}

SpectralField real_part(const SpectralField& f) {
  std::vector<cplx> v(f.values());
  for (auto& x : v) x = x.real();
  return SpectralField::from_values(f.grid(), std::move(v));
}

SpectralField multiply(const SpectralField& a, const SpectralField& b, bool dealias_after) {
  std::vector<cplx> v(a.values());
  for (int i = 0; i < a.n(); ++i) v[i] *= b.values()[i];
  auto out = SpectralField::from_values(a.grid(), std::move(v));
  return dealias_after ? dealias(out) : out;
}

SpectralField divide(const SpectralField& a, const SpectralField& b) {
  std::vector<cplx> v(a.values());
  for (int i = 0; i < a.n(); ++i) v[i] /= b.values()[i];
  return SpectralField::from_values(a.grid(), std::move(v));
}

MultiplierSymbol deriv_symbol(const PeriodicGrid& g) {
  MultiplierSymbol m{std::vector<cplx>(g.n), "d/dalpha"};
  for (int i = 0; i < g.n; ++i) m.weight[i] = cplx(0.0, g.mode_of(i));
  return m;
}

MultiplierSymbol abs_d_symbol(const PeriodicGrid& g, double s) {
  MultiplierSymbol m{std::vector<cplx>(g.n), "|D|^s"};
  for (int i = 0; i < g.n; ++i) {
    int k = g.mode_of(i);
    m.weight[i] = (k == 0) ? (s > 0 ? 0.0 : (s == 0 ? 1.0 : 0.0))
                           : std::pow(std::abs(static_cast<double>(k)), s);
  }
  return m;
}

MultiplierSymbol bessel_symbol(const PeriodicGrid& g, double s) {
  MultiplierSymbol m{std::vector<cplx>(g.n), "<D>^s"};
  for (int i = 0; i < g.n; ++i) {
    double k = g.mode_of(i);
    m.weight[i] = std::pow(1.0 + k * k, 0.5 * s);
  }
  return m;
}

SpectralField apply_multiplier(const SpectralField& f, const MultiplierSymbol& m) {
  std::vector<cplx> c(f.coeffs());
  for (int i = 0; i < f.n(); ++i) c[i] *= m.weight[i];
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField dalpha(const SpectralField& f) {
  return apply_multiplier(f, deriv_symbol(*f.grid()));
}

SpectralField abs_deriv(const SpectralField& f, double s) {
  if (s < 0) {
    double norm = f.coeff_norm();
    if (norm > 0 && std::abs(f.mean()) > 1e-12 * norm)
      throw mean_mode_error("abs_deriv: |D|^s with s < 0 applied to a field with nonzero mean");
  }
  return apply_multiplier(f, abs_d_symbol(*f.grid(), s));
}

SpectralField bessel_deriv(const SpectralField& f, double s) {
  return apply_multiplier(f, bessel_symbol(*f.grid(), s));
}

SpectralField hilbert(const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  for (int i = 0; i < f.n(); ++i) {
    int k = g.mode_of(i);
    if (k > 0)
      c[i] *= cplx(0.0, -1.0);
    else if (k < 0)
      c[i] *= cplx(0.0, 1.0);
    else
      c[i] = 0.0;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField project_P(const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  for (int i = 0; i < f.n(); ++i) {
    int k = g.mode_of(i);
    if (k > 0)
      c[i] = 0.0;
    else if (k == 0)
      c[i] *= 0.5;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField project_Pbar(const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  for (int i = 0; i < f.n(); ++i) {
    int k = g.mode_of(i);
    if (k < 0)
      c[i] = 0.0;
    else if (k == 0)
      c[i] *= 0.5;
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField project_keep_mean(const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  for (int i = 0; i < f.n(); ++i)
    if (g.mode_of(i) > 0) c[i] = 0.0;
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

double holo_residual(const SpectralField& f) {
  const auto& g = *f.grid();
  double pos = 0, all = 0;
  for (int i = 0; i < f.n(); ++i) {
    double m = std::norm(f.coeffs()[i]);
    all += m;
    if (g.mode_of(i) > 0) pos += m;
  }
  if (all == 0) return 0.0;
  return std::sqrt(pos / all);
}

HoloField::HoloField(SpectralField field, double tau_holo) : f(std::move(field)) {
  double r = holo_residual(f);
  if (r > tau_holo)
    throw holomorphy_error("holomorphy violated: positive-mode residual " + std::to_string(r));
}

SpectralField invert_dalpha(const SpectralField& f) {
  double norm = f.coeff_norm();
  if (norm > 0 && std::abs(f.mean()) > 1e-12 * norm)
    throw mean_mode_error("invert_dalpha: input has a nonzero mean");
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  c[0] = 0.0;
  for (int i = 1; i < f.n(); ++i) {
    int k = g.mode_of(i);
    c[i] /= cplx(0.0, k);
  }
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

SpectralField dealias(const SpectralField& f) {
  std::vector<cplx> c(f.coeffs());
  const auto& g = *f.grid();
  const int cut = g.dealias_cutoff();
  for (int i = 0; i < f.n(); ++i)
    if (std::abs(g.mode_of(i)) > cut) c[i] = 0.0;
  return SpectralField::from_coeffs(f.grid(), std::move(c));
}

cplx integrate(const SpectralField& f) {
  cplx s = 0;
  for (const auto& v : f.values()) s += v;
  return s * (kTwoPi / f.n());
}

double max_abs(const SpectralField& f) {
  double m = 0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double l2_norm(const SpectralField& f) {
  double s = 0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s * (kTwoPi / f.n()));
}

}  // namespace ww2d
