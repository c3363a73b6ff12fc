#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/trigamma.hpp>

namespace eckart {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;

// wraps an angle to (-pi, pi]
inline double wrap_phase(double a) {
  double r = std::remainder(a, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

// z stored as (ln|z|, arg z); zero is log_mag = -inf
struct LogComplex {
  double log_mag = 0.0;
  double phase = 0.0;

  static LogComplex zero() { return {-std::numeric_limits<double>::infinity(), 0.0}; }

  static LogComplex from_log(Complex lnz) { return {lnz.real(), wrap_phase(lnz.imag())}; }

  static LogComplex from_value(Complex z) {
    if (z == Complex{}) return zero();
    return {std::log(std::abs(z)), std::arg(z)};
  }

  bool is_zero() const { return std::isinf(log_mag) && log_mag < 0; }

  Complex log() const { return {log_mag, phase}; }

  Complex value() const {
    if (is_zero()) return {};
    return std::polar(std::exp(log_mag), phase);
  }

  double log10_mag() const { return log_mag / std::numbers::ln10; }

  LogComplex conj() const { return {log_mag, wrap_phase(-phase)}; }
};

inline LogComplex operator*(LogComplex a, LogComplex b) {
  return {a.log_mag + b.log_mag, wrap_phase(a.phase + b.phase)};
}

inline LogComplex operator/(LogComplex a, LogComplex b) {
  return {a.log_mag - b.log_mag, wrap_phase(a.phase - b.phase)};
}

namespace detail {

inline bool nonpositive_integer(Complex z, long long* n = nullptr) {
  if (z.imag() != 0.0 || z.real() > 0.0) return false;
  double r = std::round(z.real());
  if (r != z.real()) return false;
  if (n) *n = static_cast<long long>(r);
  return true;
}

// log(1 + w) without cancellation for small w
inline Complex log1p(Complex w) {
  Complex u = 1.0 + w;
  if (u == 1.0) return w;
  return std::log(u) * w / (u - 1.0);
}

// ln sin(pi z); value correct modulo 2 pi i
inline Complex log_sin_pi(Complex z) {
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  if (z.imag() < 1.0) return std::log(std::sin(pi * z));
  const Complex i{0.0, 1.0};
  Complex w = std::exp(2.0 * i * pi * z);
  return -i * pi * z + std::log(Complex{0.0, 0.5}) + log1p(-w);
}

// cot(pi z), stable for large |Im z|
inline Complex cot_pi(Complex z) {
  const Complex i{0.0, 1.0};
  if (z.imag() >= 0.0) {
    Complex w = std::exp(2.0 * i * pi * z);
    return i * (w + 1.0) / (w - 1.0);
  }
  Complex v = std::exp(-2.0 * i * pi * z);
  return i * (1.0 + v) / (1.0 - v);
}

// ln Gamma(z) - (z - 1/2) ln z + z - ln(2 pi)/2
inline Complex stirling_series(Complex z) {
  static constexpr double c[] = {1.0 / 12.0,          -1.0 / 360.0,        1.0 / 1260.0,
                                 -1.0 / 1680.0,       1.0 / 1188.0,        -691.0 / 360360.0,
                                 1.0 / 156.0,         -3617.0 / 122400.0,  43867.0 / 244188.0,
                                 -174611.0 / 125400.0};
  Complex inv = 1.0 / z;
  Complex inv2 = inv * inv;
  Complex sum{};
  Complex pw = inv;
  for (double ck : c) {
    Complex term = ck * pw;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pw *= inv2;
  }
  return sum;
}

inline Complex stirling_lgamma(Complex z) {
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + stirling_series(z);
}

inline Complex stirling_digamma(Complex z) {
  static constexpr double c[] = {1.0 / 12.0,  -1.0 / 120.0,         1.0 / 252.0, -1.0 / 240.0,
                                 1.0 / 132.0, -691.0 / 32760.0,     1.0 / 12.0,  -3617.0 / 8160.0};
  Complex inv2 = 1.0 / (z * z);
  Complex sum{};
  Complex pw = inv2;
  for (double ck : c) {
    sum += ck * pw;
    pw *= inv2;
  }
  return std::log(z) - 0.5 / z - sum;
}

inline bool stirling_ok(Complex z) { return z.real() >= 0.0 && std::abs(z) >= 10.0; }

}  // namespace detail

// continuous branch of ln Gamma(z) off the negative real axis
inline Complex lgamma_complex(Complex z) {
  long long n = 0;
  if (detail::nonpositive_integer(z, &n))
    throw std::domain_error("ln_gamma: pole of Gamma at z = " + std::to_string(n));
  if (z.real() < -20.0)
    return std::log(pi) - detail::log_sin_pi(z) - lgamma_complex(1.0 - z);
  Complex shift{};
  while (!detail::stirling_ok(z)) {
    shift += std::log(z);
    z += 1.0;
  }
  return detail::stirling_lgamma(z) - shift;
}

inline LogComplex ln_gamma(Complex z) { return LogComplex::from_log(lgamma_complex(z)); }

inline Complex reciprocal_gamma(Complex z) {
  if (detail::nonpositive_integer(z)) return {};
  return std::exp(-lgamma_complex(z));
}

inline Complex digamma(Complex z) {
  long long n = 0;
  if (detail::nonpositive_integer(z, &n))
    throw std::domain_error("digamma: pole at z = " + std::to_string(n));
  if (z.real() < 0.5) return digamma(1.0 - z) - pi * detail::cot_pi(z);
  Complex shift{};
  while (!detail::stirling_ok(z)) {
    shift += 1.0 / z;
    z += 1.0;
  }
  return detail::stirling_digamma(z) - shift;
}

inline double trigamma(double x) { return boost::math::trigamma(x); }

inline double harmonic(std::uint64_t n) {
  double h = 0.0;
  for (std::uint64_t k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
  return h;
}

// exp(z) - 1 without cancellation near z = 0
inline Complex expm1(Complex z) {
  double c = std::cos(z.imag());
  double s = std::sin(z.imag());
  double hs = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * c - 2.0 * hs * hs, std::exp(z.real()) * s};
}

// Faddeeva function w(z) = exp(-z^2) erfc(-iz)
// region-switched power series / continued fraction / Laplace continued fraction
inline Complex faddeeva(Complex z) {
  constexpr double factor = 1.12837916709551257388;  // 2/sqrt(pi)
  const double xi = z.real();
  const double yi = z.imag();
  const double xabs = std::abs(xi);
  const double yabs = std::abs(yi);
  const double x = xabs / 6.3;
  const double y = yabs / 4.4;
  double qrho = x * x + y * y;
  const double xquad = xabs * xabs - yabs * yabs;
  const double yquad = 2.0 * xabs * yabs;
  const bool small = qrho < 0.085264;
  double u = 0.0, v = 0.0, u2 = 0.0, v2 = 0.0;
  if (small) {
    qrho = (1.0 - 0.85 * y) * std::sqrt(qrho);
    const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
    int j = 2 * n + 1;
    double xsum = 1.0 / j;
    double ysum = 0.0;
    for (int i = n; i >= 1; --i) {
      j -= 2;
      double xaux = (xsum * xquad - ysum * yquad) / i;
      ysum = (xsum * yquad + ysum * xquad) / i;
      xsum = xaux + 1.0 / j;
    }
    const double u1 = -factor * (xsum * yabs + ysum * xabs) + 1.0;
    const double v1 = factor * (xsum * xabs - ysum * yabs);
    const double daux = std::exp(-xquad);
    u2 = daux * std::cos(yquad);
    v2 = -daux * std::sin(yquad);
    u = u1 * u2 - v1 * v2;
    v = u1 * v2 + v1 * u2;
  } else {
    double h = 0.0, h2 = 0.0, qlambda = 0.0;
    int kapn = 0, nu = 0;
    if (qrho > 1.0) {
      qrho = std::sqrt(qrho);
      nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
    } else {
      qrho = (1.0 - y) * std::sqrt(1.0 - qrho);
      h = 1.88 * qrho;
      h2 = 2.0 * h;
      kapn = static_cast<int>(std::lround(7.0 + 34.0 * qrho));
      nu = static_cast<int>(std::lround(16.0 + 26.0 * qrho));
    }
    const bool b = h > 0.0;
    if (b) qlambda = std::pow(h2, kapn);
    double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
    for (int n = nu; n >= 0; --n) {
      const double np1 = n + 1.0;
      const double tx = yabs + h + np1 * rx;
      const double ty = xabs - np1 * ry;
      const double c = 0.5 / (tx * tx + ty * ty);
      rx = c * tx;
      ry = c * ty;
      if (b && n <= kapn) {
        const double t = qlambda + sx;
        sx = rx * t - ry * sy;
        sy = ry * t + rx * sy;
        qlambda /= h2;
      }
    }
    if (h == 0.0) {
      u = factor * rx;
      v = factor * ry;
    } else {
      u = factor * sx;
      v = factor * sy;
    }
    if (yabs == 0.0) u = std::exp(-xabs * xabs);
  }
  if (yi < 0.0) {
    if (small) {
      u2 *= 2.0;
      v2 *= 2.0;
    } else {
      const double w1 = 2.0 * std::exp(-xquad);
      u2 = w1 * std::cos(yquad);
      v2 = -w1 * std::sin(yquad);
    }
    u = u2 - u;
    v = v2 - v;
    if (xi > 0.0) v = -v;
  } else if (xi < 0.0) {
    v = -v;
  }
  return {u, v};
}

inline Complex erf_complex(Complex z) {
  if (z == Complex{}) return {};
  if (std::abs(z) < 1.0) {
    Complex z2 = z * z;
    Complex term = z;
    Complex sum = z;
    for (int n = 1; n < 60; ++n) {
      term *= -z2 / static_cast<double>(n);
      Complex t = term / static_cast<double>(2 * n + 1);
      sum += t;
      if (std::abs(t) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 / std::sqrt(pi) * sum;
  }
  if (z.real() < 0.0) return -erf_complex(-z);
  const Complex i{0.0, 1.0};
  return 1.0 - std::exp(-z * z) * faddeeva(i * z);
}

}  // namespace eckart
