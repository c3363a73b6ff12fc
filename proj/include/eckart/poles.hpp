#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eckart/errors.hpp"
#include "eckart/potential.hpp"
#include "eckart/special_fn.hpp"
#include "eckart/transmission.hpp"

namespace eckart {

enum class PoleKind { I, II };
enum class PoleClass { bound, resonance, threshold };

// T(k) ~ residue/(k - position) + residue2/(k - position)^2 near the pole
struct Pole {
  Complex position;
  Complex residue;
  Complex residue2{};
  int order = 1;
  PoleKind kind = PoleKind::I;
  PoleClass cls = PoleClass::resonance;
  int n = 0;
  LogComplex log_residue{};
};

struct PoleOptions {
  double merge_tol = 1e-8;
  double threshold_tol = 1e-12;
};

struct BoundStateCount {
  int bound = 0;
  bool threshold = false;  // a zero-energy level sits at k = 0 (integer s)
};

namespace detail {

inline PoleClass classify(Complex k, double alpha, const PoleOptions& opt) {
  if (std::abs(k) < opt.threshold_tol * alpha) return PoleClass::threshold;
  if (k.imag() > 0.0) return PoleClass::bound;
  return PoleClass::resonance;
}

// i alpha (-1)^n / n! Gamma(2 sigma + 1 - n) / (Gamma(sigma - n) Gamma(sigma + 1 - n)); sigma = -1 - s gives family II
inline LogComplex ln_simple_residue(Complex sigma, int n, double alpha) {
  Complex a = sigma - static_cast<double>(n);
  if (nonpositive_integer(a) || nonpositive_integer(a + 1.0)) return LogComplex::zero();
  Complex l = std::log(alpha) - std::lgamma(n + 1.0) + lgamma_complex(2.0 * sigma + 1.0 - static_cast<double>(n)) -
              lgamma_complex(a) - lgamma_complex(a + 1.0);
  l += Complex{0.0, pi * (0.5 + (n % 2))};
  return LogComplex::from_log(l);
}

// s = M exactly: Res(k^I_n) = (-1)^n i alpha (2M-n)! / (n! (M-n)! (M-n-1)!)
inline Complex integer_s_residue(int m, int n, double alpha) {
  double l = std::lgamma(2.0 * m - n + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0) - std::lgamma(m - n + 0.0);
  double v = alpha * std::exp(l);
  return {0.0, n % 2 == 0 ? v : -v};
}

struct DoublePole {
  Complex r1;  // coefficient of 1/(k - k_b)
  Complex r2;  // coefficient of 1/(k - k_b)^2
};

// s = M + 1/2, k^I_a with a >= 2M + 2 (b = a - 2M - 2): Laurent coefficients from the two numerator Gamma poles
inline DoublePole double_pole(int m, int a, double alpha) {
  int b = a - 2 * m - 2;
  double zb = m + 0.5 - a;
  double lg_den = std::lgamma(zb) + std::lgamma(zb + 1.0);
  double sign_den = 1.0;
  // Gamma(zb) Gamma(zb + 1) sign for negative half-integers
  if (zb < 0.0) {
    long fl = static_cast<long>(std::floor(zb));
    if (fl % 2 != 0) sign_den = -sign_den;
    if (zb + 1.0 < 0.0) {
      long fl1 = static_cast<long>(std::floor(zb + 1.0));
      if (fl1 % 2 != 0) sign_den = -sign_den;
    }
  }
  double c2 = sign_den * std::exp(-lg_den - std::lgamma(a + 1.0) - std::lgamma(b + 1.0));
  double h = harmonic(a) + harmonic(b) - 2.0 * euler_gamma;
  double psi = digamma(Complex{zb, 0.0}).real() + digamma(Complex{zb + 1.0, 0.0}).real();
  double c1 = c2 * (h - psi);
  return {Complex{0.0, alpha * c1}, Complex{-alpha * alpha * c2, 0.0}};
}

inline bool near_integer(double x, double tol, int* out) {
  double r = std::round(x);
  if (std::abs(x - r) > tol) return false;
  *out = static_cast<int>(r);
  return true;
}

}  // namespace detail

// the double-pole residue formula exactly as commonly quoted: i alpha c2 (H_a + H_b - 2 gamma), without the
// derivative of 1/(Gamma(z) Gamma(z+1)); kept for comparison with the full Laurent coefficient
inline Complex double_pole_residue_as_quoted(int m, int a, double alpha) {
  int b = a - 2 * m - 2;
  if (b < 0) throw std::domain_error("double_pole_residue_as_quoted: index below 2M + 2");
  auto dp = detail::double_pole(m, a, alpha);
  double c2 = -dp.r2.real() / (alpha * alpha);
  return {0.0, alpha * c2 * (harmonic(a) + harmonic(b) - 2.0 * euler_gamma)};
}

inline std::vector<Pole> enumerate_poles(const EckartPotential& pot, int n_max, const PoleOptions& opt = {}) {
  if (n_max < 1) throw std::invalid_argument("enumerate_poles: n_max must be >= 1");
  pot.validate();
  std::vector<Pole> out;
  if (pot.is_free()) return out;
  const double alpha = pot.alpha;
  const Complex s = pot.s();
  const Complex i{0.0, 1.0};
  bool real_s = std::abs(s.imag()) <= opt.merge_tol;

  int m = 0;
  if (real_s && s.real() > 0.5 && detail::near_integer(s.real(), opt.merge_tol, &m)) {
    for (int n = 0; n < m && n < n_max; ++n) {
      Pole p;
      p.position = i * alpha * static_cast<double>(m - n);
      p.residue = detail::integer_s_residue(m, n, alpha);
      p.log_residue = LogComplex::from_value(p.residue);
      p.kind = PoleKind::I;
      p.n = n;
      p.cls = detail::classify(p.position, alpha, opt);
      out.push_back(p);
    }
    return out;
  }

  int twice = 0;
  if (real_s && detail::near_integer(2.0 * s.real(), 2.0 * opt.merge_tol, &twice) && twice % 2 != 0) {
    // s = M + 1/2, M >= -1: simple poles k^I_n, n <= 2M+1, then double poles where the families meet
    int mm = (twice - 1) / 2;
    double sh = mm + 0.5;
    for (int n = 0; n < n_max; ++n) {
      Pole p;
      p.position = i * alpha * (sh - n);
      p.kind = PoleKind::I;
      p.n = n;
      if (n <= 2 * mm + 1) {
        p.log_residue = detail::ln_simple_residue(Complex{sh, 0.0}, n, alpha);
        p.residue = p.log_residue.value();
      } else {
        auto dp = detail::double_pole(mm, n, alpha);
        p.order = 2;
        p.residue = dp.r1;
        p.residue2 = dp.r2;
        p.log_residue = LogComplex::from_value(p.residue);
      }
      p.cls = detail::classify(p.position, alpha, opt);
      out.push_back(p);
    }
    return out;
  }

  for (int n = 0; n < n_max; ++n) {
    Pole p1;
    p1.position = i * alpha * (s - static_cast<double>(n));
    p1.kind = PoleKind::I;
    p1.n = n;
    p1.log_residue = detail::ln_simple_residue(s, n, alpha);
    p1.residue = p1.log_residue.value();
    p1.cls = detail::classify(p1.position, alpha, opt);
    out.push_back(p1);
    Pole p2;
    p2.position = -i * alpha * (static_cast<double>(n) + s + 1.0);
    p2.kind = PoleKind::II;
    p2.n = n;
    p2.log_residue = detail::ln_simple_residue(-1.0 - s, n, alpha);
    p2.residue = p2.log_residue.value();
    p2.cls = detail::classify(p2.position, alpha, opt);
    out.push_back(p2);
  }
  return out;
}

inline BoundStateCount bound_state_count(const EckartPotential& pot, double tol = 1e-8) {
  if (!pot.is_well()) return {};
  double s = pot.s().real();
  int m = 0;
  if (detail::near_integer(s, tol, &m)) return {m, true};
  return {static_cast<int>(std::floor(s)) + 1, false};
}

// T(p) = 1 + sum Res/(p - k_n) + Res2/(p - k_n)^2
inline Complex pole_sum_transmission(const std::vector<Pole>& poles, Complex p) {
  Complex t{1.0, 0.0};
  for (const auto& pl : poles) {
    Complex d = p - pl.position;
    t += pl.residue / d;
    if (pl.order == 2) t += pl.residue2 / (d * d);
  }
  return t;
}

namespace detail {

// large-n expansion Res_n / Res_inf = 1 + d/n + e/n^2 from ln[Gamma(n+1-s)Gamma(n-s)/(Gamma(n+1)Gamma(n-2s))]
inline std::pair<Complex, Complex> residue_ratio_coefficients(Complex s) {
  auto c = [&](int k) {
    double sg = (k % 2 == 1) ? 1.0 : -1.0;
    return sg / static_cast<double>(k * (k + 1)) *
           (bernoulli_poly(k + 1, 1.0 - s) + bernoulli_poly(k + 1, -s) - bernoulli_poly(k + 1, Complex{1.0, 0.0}) -
            bernoulli_poly(k + 1, -2.0 * s));
  };
  Complex c1 = c(1);
  Complex c2 = c(2);
  return {c1, c2 + 0.5 * c1 * c1};
}

// sum over n >= N of the asymptotic residues of both families, N poles per family already summed
inline std::optional<Complex> pole_sum_tail(const EckartPotential& pot, Complex p, int n) {
  const Complex s = pot.s();
  if (std::abs(std::cos(pi * s)) < 1e-6) return std::nullopt;
  const Complex z = Complex{0.0, -1.0} * p / pot.alpha;
  const Complex u = z - s;
  const Complex v = z + s + 1.0;
  const double nn = static_cast<double>(n);
  auto sa = [&](Complex w) { return (digamma(nn + w) - digamma(Complex{nn, 0.0})) / w; };
  auto sb = [&](Complex w) { return trigamma(nn) / w - sa(w) / w; };
  auto [d1, e1] = residue_ratio_coefficients(s);
  auto [d2, e2] = residue_ratio_coefficients(-1.0 - s);
  Complex pref = std::tan(pi * s) / (2.0 * pi);
  Complex bracket = digamma(nn + v) - digamma(nn + u) + d1 * sa(u) - d2 * sa(v) + e1 * sb(u) - e2 * sb(v);
  return pref * bracket;
}

}  // namespace detail

struct PoleSumResult {
  Complex value;
  int per_family = 0;
  bool tail_corrected = false;
};

// n poles of each family plus the analytic tail of the rest; integer s is a finite exact sum
inline PoleSumResult pole_sum_transmission(const EckartPotential& pot, Complex p, int per_family, bool tail = true) {
  if (per_family < 1) throw std::invalid_argument("pole_sum_transmission: need at least one pole per family");
  if (pot.is_free()) return {Complex{1.0, 0.0}, per_family, false};
  auto poles = enumerate_poles(pot, per_family);
  PoleSumResult r{pole_sum_transmission(poles, p), per_family, false};
  if (!tail || (pot.is_well() && bound_state_count(pot).threshold)) return r;
  int fam2 = 0;
  for (const auto& pl : poles) fam2 += pl.kind == PoleKind::II ? 1 : 0;
  if (fam2 == 0) return r;
  if (auto t = detail::pole_sum_tail(pot, p, per_family)) {
    r.value += *t;
    r.tail_corrected = true;
  }
  return r;
}

// doubles n from 64 until successive tail-corrected sums agree to tol * max(1, |T|)
inline PoleSumResult pole_sum_converged(const EckartPotential& pot, Complex p, double tol, int n_start = 64,
                                        int n_limit = 1 << 16) {
  auto prev = pole_sum_transmission(pot, p, n_start);
  if (pot.is_free() || bound_state_count(pot).threshold) return prev;
  for (int n = 2 * n_start; n <= n_limit; n *= 2) {
    auto cur = pole_sum_transmission(pot, p, n);
    if (std::abs(cur.value - prev.value) <= tol * std::max(1.0, std::abs(cur.value))) return cur;
    prev = cur;
  }
  throw numerical_error("poles", "pole sum did not converge by n = " + std::to_string(n_limit));
}

// Res(k^I_n) for the barrier above alpha^2/8mu
inline Complex residue_asymptote(const EckartPotential& pot, int n) {
  if (!(pot.strength() > 1.0)) throw std::domain_error("residue_asymptote: needs U0 > alpha^2/8mu");
  if (n < 0) throw std::domain_error("residue_asymptote: n must be >= 0");
  return detail::ln_simple_residue(pot.s(), n, pot.alpha).value();
}

// n -> infinity value of Res(k^I_n): i alpha tan(pi s)/2pi = -alpha coth(pi Im s)/2pi on the barrier line
inline Complex residue_limit(const EckartPotential& pot) {
  return Complex{0.0, pot.alpha} * std::tan(pi * pot.s()) / (2.0 * pi);
}

inline void write_pole_table(std::ostream& os, const std::vector<Pole>& poles) {
  auto old = os.precision(17);
  os << "n,kind,order,re_k,im_k,re_res,im_res,log10_abs_res\n";
  for (const auto& p : poles) {
    os << p.n << ',' << (p.kind == PoleKind::I ? "I" : "II") << ',' << p.order << ',' << p.position.real() << ','
       << p.position.imag() << ',' << p.residue.real() << ',' << p.residue.imag() << ','
       << p.log_residue.log_mag / std::log(10.0) << '\n';
  }
  os.precision(old);
}

}  // namespace eckart
