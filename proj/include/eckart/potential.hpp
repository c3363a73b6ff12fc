#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "eckart/errors.hpp"
#include "eckart/special_fn.hpp"

namespace eckart {

// V(x) = u0 / cosh^2(alpha x)
struct EckartPotential {
  double u0 = 0.0;
  double alpha = 1.0;
  double mu = 1.0;

  static EckartPotential dimensionless(double u0_bar) { return {u0_bar, 1.0, 1.0}; }

  // 8 mu U0 / alpha^2
  double strength() const { return 8.0 * mu * u0 / (alpha * alpha); }

  Complex s() const {
    Complex root = std::sqrt(Complex{1.0 - strength(), 0.0});
    return 0.5 * (-1.0 + root);
  }

  bool is_barrier() const { return u0 > 0.0; }
  bool is_well() const { return u0 < 0.0; }
  bool is_free() const { return u0 == 0.0; }

  // barrier above alpha^2/8mu: poles at Re k = -+beta
  double beta() const {
    double g = strength() - 1.0;
    return g > 0.0 ? 0.5 * alpha * std::sqrt(g) : 0.0;
  }

  double energy(double p) const { return p * p / (2.0 * mu); }

  // integral of V over the real line
  double integral() const { return 2.0 * u0 / alpha; }

  void validate() const {
    if (!(alpha > 0.0) || !(mu > 0.0) || !std::isfinite(u0) || !std::isfinite(alpha) || !std::isfinite(mu))
      throw std::invalid_argument("EckartPotential: need finite u0, alpha > 0, mu > 0");
  }
};

// x_bar = alpha x, p_bar = p/alpha, t_bar = alpha^2 t/mu, U_bar = mu U0/alpha^2 (hbar = 1)
struct DimensionlessScales {
  double alpha = 1.0;
  double mu = 1.0;

  double x_to_bar(double x) const { return alpha * x; }
  double x_from_bar(double xb) const { return xb / alpha; }
  double p_to_bar(double p) const { return p / alpha; }
  double p_from_bar(double pb) const { return pb * alpha; }
  double t_to_bar(double t) const { return alpha * alpha * t / mu; }
  double t_from_bar(double tb) const { return tb * mu / (alpha * alpha); }
  double u_to_bar(double u) const { return mu * u / (alpha * alpha); }
  double u_from_bar(double ub) const { return ub * alpha * alpha / mu; }

  EckartPotential potential(double u0_bar) const { return {u_from_bar(u0_bar), alpha, mu}; }
};

inline Complex s_parameter(const EckartPotential& pot) { return pot.s(); }

inline double evaluate(const EckartPotential& pot, double x) {
  double c = std::cosh(pot.alpha * x);
  return pot.u0 / (c * c);
}

inline Complex local_momentum(const EckartPotential& pot, double x, double p) {
  double q2 = p * p - 2.0 * pot.mu * evaluate(pot, x);
  if (q2 >= 0.0) return {std::sqrt(q2), 0.0};
  return {0.0, std::sqrt(-q2)};
}

// x_< = -x_>, x_> = arccosh(sqrt(U0/E))/alpha
inline std::optional<std::pair<double, double>> turning_points(const EckartPotential& pot, double p) {
  if (!pot.is_barrier()) return std::nullopt;
  double e = pot.energy(p);
  if (e >= pot.u0) return std::nullopt;
  double xr = std::acosh(std::sqrt(pot.u0 / e)) / pot.alpha;
  return std::make_pair(-xr, xr);
}

namespace detail {

inline constexpr double truncation = 40.0;  // alpha x cut-off
inline constexpr double quad_tol = 1e-10;

template <class F>
double integrate(F f, double a, double b, const char* what) {
  if (b <= a) return 0.0;
  double err = 0.0;
  double l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, quad_tol, &err, &l1);
  if (!std::isfinite(v) || err > 1e-7 * std::max(1.0, l1))
    throw numerical_error("potential", std::string("quadrature did not converge for ") + what);
  return v;
}

inline void check_momentum(const EckartPotential& pot, double p) {
  pot.validate();
  if (!(p > 0.0)) throw std::domain_error("potential: momentum must be positive");
  if (pot.is_barrier()) {
    double rel = std::abs(pot.energy(p) - pot.u0) / pot.u0;
    if (rel < 1e-10)
      throw numerical_error("potential", "energy within 1e-10 of the barrier top; semiclassical integrals undefined");
  }
}

// q^2 - p^2 = -2 mu V, written so that q - p and 1 - p/q keep full precision
inline double q_minus_p(const EckartPotential& pot, double x, double p) {
  double v2 = 2.0 * pot.mu * evaluate(pot, x);
  double q = std::sqrt(p * p - v2);
  return -v2 / (q + p);
}

struct Pieces {
  double allowed_phase = 0.0;  // int over allowed region of (q - p)
  double width = 0.0;          // x_> - x_<
  double forbidden_q = 0.0;    // int |q| over [x_<, x_>]
  double allowed_shift = 0.0;  // int over allowed region of (1 - p/q)
  double forbidden_inv = 0.0;  // int p/|q| over [x_<, x_>]
};

// |q| and q on either side of x_> via sinh(a(x - x_>)) sinh(a(x + x_>)) / cosh^2(ax)
inline double q_outside(const EckartPotential& pot, double xr, double w2, double p) {
  double a = pot.alpha;
  double x = xr + w2;
  double c = std::cosh(a * x);
  return p * std::sqrt(std::sinh(a * w2) * std::sinh(a * (x + xr))) / c;
}

inline double q_inside(const EckartPotential& pot, double xr, double w2, double p) {
  double a = pot.alpha;
  double x = xr - w2;
  double c = std::cosh(a * x);
  return p * std::sqrt(std::sinh(a * w2) * std::sinh(a * (x + xr))) / c;
}

inline Pieces pieces(const EckartPotential& pot, double p, bool want_phase, bool want_shift) {
  Pieces out;
  double L = truncation / pot.alpha;
  auto tp = turning_points(pot, p);
  if (!tp) {
    // near a barrier top q dips on a scale c = sqrt(E/U0 - 1)/alpha; x = c sinh(u) flattens it
    double c = 1.0 / pot.alpha;
    if (pot.is_barrier()) c = std::min(c, std::sqrt(pot.energy(p) / pot.u0 - 1.0) / pot.alpha);
    double umax = std::asinh(L / c);
    auto sub = [&](auto g) {
      return [&, g](double u) {
        double x = c * std::sinh(u);
        return g(x) * c * std::cosh(u);
      };
    };
    if (want_phase)
      out.allowed_phase = 2.0 * integrate(sub([&](double x) { return q_minus_p(pot, x, p); }), 0.0, umax, "phase");
    if (want_shift)
      out.allowed_shift = 2.0 * integrate(sub([&](double x) {
                                            double qm = q_minus_p(pot, x, p);
                                            return qm / (qm + p);
                                          }),
                                          0.0, umax, "classical shift");
    return out;
  }
  double xr = tp->second;
  out.width = 2.0 * xr;
  double wout = std::sqrt(std::max(L - xr, 0.0));
  double win = std::sqrt(xr);
  if (want_phase) {
    out.allowed_phase =
        2.0 * integrate([&](double w) { return (q_outside(pot, xr, w * w, p) - p) * 2.0 * w; }, 0.0, wout, "phase");
    out.forbidden_q = 2.0 * integrate([&](double w) { return q_inside(pot, xr, w * w, p) * 2.0 * w; }, 0.0, win,
                                      "forbidden phase");
  }
  if (want_shift) {
    out.allowed_shift = 2.0 * integrate(
                                  [&](double w) {
                                    if (w == 0.0) {
                                      // limit of 2w p/q at the turning point
                                      double a = pot.alpha;
                                      double c = std::cosh(a * xr);
                                      return -2.0 * c / std::sqrt(a * std::sinh(2.0 * a * xr));
                                    }
                                    double q = q_outside(pot, xr, w * w, p);
                                    return (1.0 - p / q) * 2.0 * w;
                                  },
                                  0.0, wout, "classical shift");
    out.forbidden_inv = 2.0 * integrate(
                                  [&](double w) {
                                    double a = pot.alpha;
                                    if (w == 0.0) {
                                      double c = std::cosh(a * xr);
                                      return 2.0 * c / std::sqrt(a * std::sinh(2.0 * a * xr));
                                    }
                                    return p / q_inside(pot, xr, w * w, p) * 2.0 * w;
                                  },
                                  0.0, win, "forbidden shift");
  }
  return out;
}

}  // namespace detail

// Phi(p) = int (q - p) dx; Im Phi = int |q| over the forbidden region, so |exp(i Phi)| = exp(-int |q|)
inline Complex semiclassical_phase(const EckartPotential& pot, double p) {
  detail::check_momentum(pot, p);
  if (pot.is_free()) return {};
  auto pc = detail::pieces(pot, p, true, false);
  return {pc.allowed_phase - p * pc.width, pc.forbidden_q};
}

// x~' = x1 + i x2 = -dPhi/dp; x2 = +v0 int dx/|v| > 0 under a barrier
inline Complex classical_shift(const EckartPotential& pot, double p0) {
  detail::check_momentum(pot, p0);
  if (pot.is_free()) return {};
  auto pc = detail::pieces(pot, p0, false, true);
  return {pc.allowed_shift + pc.width, pc.forbidden_inv};
}

}  // namespace eckart
