#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include "eckart/potential.hpp"
#include "eckart/special_fn.hpp"

namespace eckart {

namespace detail {

inline constexpr std::array<double, 31> bernoulli_numbers = {
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
    0.0,
    854513.0 / 138.0,
    0.0,
    -236364091.0 / 2730.0,
    0.0,
    8553103.0 / 6.0,
    0.0,
    -23749461029.0 / 870.0,
    0.0,
    8615841276005.0 / 14322.0,
};

inline Complex bernoulli_poly(int n, Complex x) {
  Complex sum{};
  double binom = 1.0;
  Complex pw = std::pow(x, n);
  Complex inv = (x == Complex{}) ? Complex{} : 1.0 / x;
  for (int k = 0; k <= n; ++k) {
    if (k == n)
      sum += bernoulli_numbers[k];
    else if (x != Complex{})
      sum += binom * bernoulli_numbers[k] * pw;
    binom = binom * (n - k) / (k + 1);
    pw *= inv;
  }
  return sum;
}

// ln T = sum_{n even} 2 [B_n(-s) - B_n] / (n (n-1) z^{n-1}), valid for |z| >> |s|^2
inline std::optional<Complex> ln_t_asymptotic(Complex s, Complex z) {
  double az = std::abs(z);
  double as = std::abs(s);
  if (az < 30.0 * std::max(1.0, as * as) || z.real() < -0.5 * az) return std::nullopt;
  Complex inv = 1.0 / z;
  Complex inv2 = inv * inv;
  Complex pw = inv;
  Complex sum{};
  double last = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 30; n += 2) {
    Complex term = 2.0 * (bernoulli_poly(n, -s) - bernoulli_numbers[n]) / static_cast<double>(n * (n - 1)) * pw;
    double t = std::abs(term);
    if (t > last) return std::nullopt;
    sum += term;
    if (t <= 1e-17 * std::abs(sum)) return sum;
    last = t;
    pw *= inv2;
  }
  return std::nullopt;
}

// Gamma-argument lattice: counts poles of the numerator and denominator at z
inline int lattice_poles(Complex w) {
  if (std::abs(w.imag()) > 1e-12) return 0;
  double r = std::round(w.real());
  if (r > 0.0 || std::abs(w.real() - r) > 1e-12) return 0;
  return 1;
}

// ln T from ln Gamma differences with the a ln z terms cancelled; needs |z| >= 20 and |s|, |s+1| <= |z|/2
inline std::optional<Complex> ln_t_difference(Complex s, Complex z) {
  double az = std::abs(z);
  if (az < 20.0 || std::abs(s) > 0.5 * az || std::abs(s + 1.0) > 0.5 * az || z.real() < -0.5 * az) return std::nullopt;
  Complex a = z - s, b = z + s + 1.0;
  if (std::abs(a) < 20.0 || std::abs(b) < 20.0) return std::nullopt;
  Complex l1 = detail::log1p(-s / z);
  Complex l2 = detail::log1p((s + 1.0) / z);
  Complex c = stirling_series(z);
  return (a - 0.5) * l1 + (b - 0.5) * l2 - 1.0 + (stirling_series(a) - c) + (stirling_series(b) - c);
}

inline Complex ln_t_gamma(Complex s, Complex z) {
  return lgamma_complex(z - s) + lgamma_complex(z + s + 1.0) - lgamma_complex(z) - lgamma_complex(z + 1.0);
}

}  // namespace detail

// T(p) = Gamma(z-s) Gamma(z+s+1) / (Gamma(z) Gamma(1+z)), z = -ip/alpha, as a complex logarithm
inline Complex ln_transmission(const EckartPotential& pot, Complex p) {
  if (pot.is_free()) return {};
  const Complex s = pot.s();
  const Complex z = Complex{0.0, -1.0} * p / pot.alpha;
  if (auto a = detail::ln_t_asymptotic(s, z)) return *a;
  int num = detail::lattice_poles(z - s) + detail::lattice_poles(z + s + 1.0);
  int den = detail::lattice_poles(z) + detail::lattice_poles(z + 1.0);
  if (num == 0 && den == 0) {
    if (auto d = detail::ln_t_difference(s, z)) return *d;
    return detail::ln_t_gamma(s, z);
  }
  if (num > den)
    throw std::domain_error("transmission: p = (" + std::to_string(p.real()) + ", " + std::to_string(p.imag()) +
                            ") is a pole of T");
  if (den > num) return {-std::numeric_limits<double>::infinity(), 0.0};
  // removable: average across the lattice point
  const double eps = 1e-7 * pot.alpha;
  Complex a = std::exp(detail::ln_t_gamma(s, Complex{0.0, -1.0} * (p + eps) / pot.alpha));
  Complex b = std::exp(detail::ln_t_gamma(s, Complex{0.0, -1.0} * (p - eps) / pot.alpha));
  return std::log(0.5 * (a + b));
}

inline LogComplex transmission_exact(const EckartPotential& pot, Complex p) {
  Complex l = ln_transmission(pot, p);
  if (std::isinf(l.real()) && l.real() < 0) return LogComplex::zero();
  return LogComplex::from_log(l);
}

inline Complex transmission_value(const EckartPotential& pot, Complex p) {
  return transmission_exact(pot, p).value();
}

// T - 1 without cancellation at large momenta
inline Complex transmission_minus_one(const EckartPotential& pot, Complex p) {
  Complex l = ln_transmission(pot, p);
  if (std::isinf(l.real()) && l.real() < 0) return -1.0;
  return eckart::expm1(l);
}

inline LogComplex transmission_semiclassical(const EckartPotential& pot, double p) {
  if (pot.is_free()) return {};
  Complex phi = semiclassical_phase(pot, p);
  return {-phi.imag(), wrap_phase(phi.real())};
}

// |T(-p*) - T(p)*| for real p
inline double transmission_symmetry_check(const EckartPotential& pot, double p) {
  Complex a = transmission_value(pot, Complex{-p, 0.0});
  Complex b = std::conj(transmission_value(pot, Complex{p, 0.0}));
  return std::abs(a - b);
}

}  // namespace eckart
