#include "ww2d/paracalc.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace ww2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double bump(double x) {  // cos^2 profile on [-1, 1]
  if (std::abs(x) >= 1.0) return 0.0;
  double c = std::cos(0.5 * std::numbers::pi * x);
  return c * c;
}

DyadicPartition build_partition(const GridPtr& g) {
  DyadicPartition part;
  part.grid = g;
  const int n = g->n;
  part.J = static_cast<int>(std::lround(std::log2(n / 2))) - 1;
  const int bands = part.J + 1;
  part.psi.assign(bands, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    int k = g->mode_of(i);
    if (k == 0) {
      part.psi[0][i] = 1.0;
      continue;
    }
    double x = std::log2(std::abs(static_cast<double>(k)));
    for (int j = 0; j < bands; ++j) {
      double w;
      if (j == 0)
        w = x <= 0.0 ? 1.0 : bump(x);
      else if (j == part.J)
        w = x >= part.J ? 1.0 : bump(x - part.J);
      else
        w = bump(x - j);
      part.psi[j][i] = w;
    }
  }
  // P_{<l}: bands j <= l - 5 plus the mean, which sits below every band.
  part.low.assign(bands, std::vector<double>(n, 0.0));
  for (int l = 0; l < bands; ++l) {
    for (int i = 0; i < n; ++i) {
      int k = g->mode_of(i);
      if (k == 0) {
        part.low[l][i] = 1.0;
        continue;
      }
      double w = 0.0;
      for (int j = 0; j <= l - 1 - kParaSeparation; ++j) w += part.psi[j][i];
      part.low[l][i] = w;
    }
  }
  return part;
}

class PartitionCache {
 public:
  static PartitionCache& instance() {
    static PartitionCache c;
    return c;
  }
  const DyadicPartition& get(const GridPtr& g) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = parts_.find(g->n);
    if (it == parts_.end()) it = parts_.emplace(g->n, build_partition(g)).first;
    return it->second;
  }

 private:
  std::mutex mu_;
  std::unordered_map<int, DyadicPartition> parts_;
};

std::vector<cplx> weighted_coeffs(const SpectralField& f, const std::vector<double>& w) {
  std::vector<cplx> c(f.coeffs());
  for (size_t i = 0; i < c.size(); ++i) c[i] *= w[i];
  return c;
}

// Band values with the mean stripped from band 0 (the "ring" content).
std::vector<cplx> band_ring_values(const DyadicPartition& part, const SpectralField& f, int j) {
  auto c = weighted_coeffs(f, part.psi[j]);
  if (j == 0) c[0] = 0.0;
  return inverse_transform(*part.grid, c);
}

void check_band(const DyadicPartition& part, int j, const char* who) {
  if (j < 0 || j > part.J)
    throw config_error(std::string(who) + ": band index " + std::to_string(j) +
                       " outside 0.." + std::to_string(part.J));
}

}  // namespace

const DyadicPartition& DyadicPartition::of(const GridPtr& g) {
  return PartitionCache::instance().get(g);
}

int lp_band_count(const PeriodicGrid& g) {
  return static_cast<int>(std::lround(std::log2(g.n / 2)));
}

SpectralField lp_project(const SpectralField& f, int j) {
  const auto& part = DyadicPartition::of(f.grid());
  check_band(part, j, "lp_project");
  return SpectralField::from_coeffs(f.grid(), weighted_coeffs(f, part.psi[j]));
}

SpectralField lp_below(const SpectralField& f, int k) {
  const auto& part = DyadicPartition::of(f.grid());
  check_band(part, k, "lp_below");
  return SpectralField::from_coeffs(f.grid(), weighted_coeffs(f, part.low[k]));
}

SpectralField para_low_high(const SpectralField& f, const SpectralField& g) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  std::vector<cplx> acc(n, 0.0);
  for (int l = 0; l <= part.J; ++l) {
    auto lowv = inverse_transform(*part.grid, weighted_coeffs(f, part.low[l]));
    auto bandv = inverse_transform(*part.grid, weighted_coeffs(g, part.psi[l]));
    for (int i = 0; i < n; ++i) acc[i] += lowv[i] * bandv[i];
  }
  return SpectralField::from_values(f.grid(), std::move(acc));
}

SpectralField para_low_high_adjoint(const SpectralField& f, const SpectralField& g) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  std::vector<cplx> acc(n, 0.0);
  for (int l = 0; l <= part.J; ++l) {
    auto lowv = inverse_transform(*part.grid, weighted_coeffs(f, part.low[l]));
    std::vector<cplx> prod(n);
    for (int i = 0; i < n; ++i) prod[i] = std::conj(lowv[i]) * g.values()[i];
    auto pc = transform(*part.grid, prod);
    for (int i = 0; i < n; ++i) acc[i] += part.psi[l][i] * pc[i];
  }
  return SpectralField::from_coeffs(f.grid(), std::move(acc));
}

SpectralField para_sym(const SpectralField& f, const SpectralField& g) {
  return 0.5 * (para_low_high(f, g) + para_low_high_adjoint(f, g));
}

SpectralField para_balanced(const SpectralField& f, const SpectralField& g, bool project) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  const int bands = part.J + 1;
  std::vector<std::vector<cplx>> gb(bands);
  for (int l = 0; l < bands; ++l) gb[l] = band_ring_values(part, g, l);
  std::vector<cplx> acc(n, 0.0);
  std::vector<cplx> window(n);
  for (int j = 0; j < bands; ++j) {
    std::fill(window.begin(), window.end(), cplx(0.0));
    for (int l = std::max(0, j - kParaSeparation); l <= std::min(part.J, j + kParaSeparation); ++l)
      for (int i = 0; i < n; ++i) window[i] += gb[l][i];
    auto fb = band_ring_values(part, f, j);
    for (int i = 0; i < n; ++i) acc[i] += fb[i] * window[i];
  }
  // mean x mean balances the double-counting in T_f g + T_g f.
  cplx mm = f.mean() * g.mean();
  for (int i = 0; i < n; ++i) acc[i] -= mm;
  auto out = SpectralField::from_values(f.grid(), std::move(acc));
  return project ? project_P(out) : out;
}

SpectralField pi_geq(const SpectralField& f, const SpectralField& g, int k) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  std::vector<cplx> acc(n, 0.0);
  for (int j = std::max(0, k); j <= part.J; ++j) {
    auto fb = inverse_transform(*part.grid, weighted_coeffs(f, part.psi[j]));
    auto gb = inverse_transform(*part.grid, weighted_coeffs(g, part.psi[j]));
    for (int i = 0; i < n; ++i) acc[i] += fb[i] * gb[i];
  }
  return SpectralField::from_values(f.grid(), std::move(acc));
}

SpectralField square_function_above(const SpectralField& f, int k) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  std::vector<double> sum(n, 0.0);
  for (int j = std::max(0, k + 1); j <= part.J; ++j) {
    auto fb = inverse_transform(*part.grid, weighted_coeffs(f, part.psi[j]));
    for (int i = 0; i < n; ++i) sum[i] += std::norm(fb[i]);
  }
  std::vector<cplx> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::sqrt(sum[i]);
  return SpectralField::from_values(f.grid(), std::move(v));
}

SpectralField square_function(const SpectralField& f) { return square_function_above(f, -1); }

namespace {

double bmo_norm(const SpectralField& f) {
  const auto& part = DyadicPartition::of(f.grid());
  const int n = f.n();
  double best = 0.0;
  for (int k = 0; k <= part.J; ++k) {
    auto s = square_function_above(f, k);
    const int cells = 1 << k;          // dyadic intervals at scale 2^{-k} 2pi
    const int per = n / cells;         // >= 4 grid cells by construction
    for (int q = 0; q < cells; ++q) {
      double m = 0.0;
      for (int i = q * per; i < (q + 1) * per; ++i) m += std::norm(s.values()[i]);
      best = std::max(best, m / per);
    }
  }
  return std::sqrt(best);
}

double besov_inf2(const SpectralField& f, double s) {
  const auto& part = DyadicPartition::of(f.grid());
  double sum = 0.0;
  for (int j = 0; j <= part.J; ++j) {
    auto bv = band_ring_values(part, f, j);
    double mx = 0.0;
    for (const auto& v : bv) mx = std::max(mx, std::abs(v));
    double w = std::exp2(j * s) * mx;
    sum += w * w;
  }
  return std::sqrt(sum);
}

void check_admissible(const SpectralField& f, double s) {
  double lim = std::log2(f.n() / 3.0);
  if (std::abs(s) > lim)
    throw config_error("norm: exponent s = " + std::to_string(s) +
                       " not admissible at n = " + std::to_string(f.n()));
}

}  // namespace

double norm(const SpectralField& f, const NormSpec& spec) {
  using K = NormSpec::Kind;
  switch (spec.kind) {
    case K::L2:
      return l2_norm(f);
    case K::Linf:
      return max_abs(f);
    case K::Hdot: {
      check_admissible(f, spec.s);
      const auto& g = *f.grid();
      double sum = 0.0;
      for (int i = 1; i < f.n(); ++i) {
        double k = std::abs(static_cast<double>(g.mode_of(i)));
        if (k > 0) sum += std::pow(k, 2.0 * spec.s) * std::norm(f.coeffs()[i]);
      }
      return std::sqrt(kTwoPi * sum);
    }
    case K::H: {
      check_admissible(f, spec.s);
      const auto& g = *f.grid();
      double sum = 0.0;
      for (int i = 0; i < f.n(); ++i) {
        double k = g.mode_of(i);
        sum += std::pow(1.0 + k * k, spec.s) * std::norm(f.coeffs()[i]);
      }
      return std::sqrt(kTwoPi * sum);
    }
    case K::BMO:
      return bmo_norm(f);
    case K::BMOs:
      check_admissible(f, spec.s);
      return bmo_norm(abs_deriv(f, spec.s));
    case K::BesovInf2:
      check_admissible(f, spec.s);
      return besov_inf2(f, spec.s);
  }
  return 0.0;
}

double pair_norm(const SpectralField& Wa, const SpectralField& R, double s, bool homogeneous) {
  const auto& g = *Wa.grid();
  double sum = 0.0;
  for (int i = 0; i < Wa.n(); ++i) {
    double k = std::abs(static_cast<double>(g.mode_of(i)));
    double w;
    if (homogeneous)
      w = (k == 0) ? (s == 0.0 ? 1.0 : 0.0) : std::pow(k, s);
    else
      w = std::pow(1.0 + k * k, 0.5 * s);
    sum += w * w * (std::norm(Wa.coeffs()[i]) + k * std::norm(R.coeffs()[i]));
  }
  return std::sqrt(kTwoPi * sum);
}

ControlParams control_params(const SpectralField& Wa, const SpectralField& R, double delta_J) {
  const int n = Wa.n();
  std::vector<cplx> yv(n);
  for (int i = 0; i < n; ++i) {
    cplx one_plus = 1.0 + Wa.values()[i];
    if (std::abs(one_plus) < delta_J)
      throw degenerate_surface_error("control_params: |1 + Wa| fell below delta_J");
    yv[i] = Wa.values()[i] / one_plus;
  }
  auto Y = SpectralField::from_values(Wa.grid(), std::move(yv));
  auto Rhalf = abs_deriv(R, 0.5);
  auto Ra = dalpha(R);

  ControlParams cp;
  cp.A = max_abs(Wa) + max_abs(Y) +
         std::max(max_abs(Rhalf), norm(Rhalf, NormSpec::besov_inf2(0.0)));
  cp.B = norm(abs_deriv(Wa, 0.5), NormSpec::bmo()) + norm(Ra, NormSpec::bmo());
  cp.A14 = norm(Wa, NormSpec::besov_inf2(0.25)) + norm(R, NormSpec::besov_inf2(0.75));
  cp.Asharp = norm(Wa, NormSpec::hdot(0.5)) + l2_norm(Ra);
  return cp;
}

ParaLeibnizErrors para_leibniz_errors(const SpectralField& b, const SpectralField& u,
                                      const SpectralField& v, const SpectralField& u_t,
                                      const SpectralField& v_t) {
  auto tdt = [&](const SpectralField& h, const SpectralField& h_t) {
    return h_t + para_low_high(b, dalpha(h));
  };
  auto Tuv = para_low_high(u, v);
  auto dTuv_dt = para_low_high(u_t, v) + para_low_high(u, v_t);  // exact bilinearity
  auto Dt_u_full = u_t + multiply(b, dalpha(u));

  ParaLeibnizErrors e;
  e.unbalanced = tdt(Tuv, dTuv_dt) - para_low_high(tdt(u, u_t), v) - para_low_high(u, tdt(v, v_t));
  e.unbalanced_full = tdt(Tuv, dTuv_dt) - para_low_high(Dt_u_full, v) - para_low_high(u, tdt(v, v_t));

  auto Piuv = para_balanced(u, v);
  auto dPiuv_dt = para_balanced(u_t, v) + para_balanced(u, v_t);
  e.balanced = tdt(Piuv, dPiuv_dt) - para_balanced(tdt(u, u_t), v) - para_balanced(u, tdt(v, v_t));
  e.balanced_full = tdt(Piuv, dPiuv_dt) - para_balanced(Dt_u_full, v) - para_balanced(u, tdt(v, v_t));
  return e;
}

std::vector<double> frequency_envelope(const SpectralField& Wa, const SpectralField& R,
                                       double s, double delta) {
  if (!(delta > 0.0 && delta <= 0.25))
    throw config_error("frequency_envelope: delta must lie in (0, 1/4]");
  const auto& part = DyadicPartition::of(Wa.grid());
  const int bands = part.J + 1;
  std::vector<double> h(bands);
  for (int j = 0; j < bands; ++j)
    h[j] = pair_norm(lp_project(Wa, j), lp_project(R, j), s, /*homogeneous=*/false);
  std::vector<double> c(bands, 0.0);
  for (int k = 0; k < bands; ++k)
    for (int j = 0; j < bands; ++j)
      c[k] = std::max(c[k], std::exp2(-delta * std::abs(j - k)) * h[j]);
  return c;
}

}  // namespace ww2d
