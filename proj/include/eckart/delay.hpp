#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "eckart/errors.hpp"
#include "eckart/poles.hpp"
#include "eckart/potential.hpp"
#include "eckart/special_fn.hpp"
#include "eckart/transmission.hpp"

namespace eckart {

// eta(p0, x') = delta_weight * delta(x') + eta_smooth(x')
struct DelayDistribution {
  std::vector<double> x_grid;
  std::vector<Complex> eta_smooth;
  Complex delta_weight{1.0, 0.0};
  double p0 = 0.0;
};

namespace detail {

inline constexpr int filon_order = 16;

struct LegendreTable {
  std::array<double, filon_order> t{};
  std::array<double, filon_order> w{};
  std::array<std::array<double, filon_order>, filon_order> p{};  // p[l][j] = P_l(t_j)

  LegendreTable() {
    using G = boost::math::quadrature::gauss<double, filon_order>;
    const auto& a = G::abscissa();
    const auto& ww = G::weights();
    const int h = filon_order / 2;
    for (int j = 0; j < h; ++j) {
      t[j] = -a[h - 1 - j];
      w[j] = ww[h - 1 - j];
      t[filon_order - 1 - j] = a[h - 1 - j];
      w[filon_order - 1 - j] = ww[h - 1 - j];
    }
    for (int j = 0; j < filon_order; ++j) {
      double p0 = 1.0, p1 = t[j];
      p[0][j] = 1.0;
      p[1][j] = p1;
      for (int l = 1; l + 1 < filon_order; ++l) {
        double p2 = ((2.0 * l + 1.0) * t[j] * p1 - l * p0) / (l + 1.0);
        p[l + 1][j] = p2;
        p0 = p1;
        p1 = p2;
      }
    }
  }
};

inline const LegendreTable& legendre_table() {
  static const LegendreTable tab;
  return tab;
}

// j_0..j_{L-1}(w), w >= 0
inline void spherical_bessel(double w, std::array<double, filon_order>& j) {
  const int L = filon_order;
  if (w < 1e-8) {
    j.fill(0.0);
    j[0] = 1.0;
    j[1] = w / 3.0;
    return;
  }
  if (w > L) {
    j[0] = std::sin(w) / w;
    j[1] = std::sin(w) / (w * w) - std::cos(w) / w;
    for (int l = 1; l + 1 < L; ++l) j[l + 1] = (2.0 * l + 1.0) / w * j[l] - j[l - 1];
    return;
  }
  // Miller's downward recurrence, normalised by sum (2l+1) j_l^2 = 1
  int start = L + 20 + static_cast<int>(w);
  double jp1 = 0.0, jl = 1e-30, norm = 0.0;
  for (int l = start; l >= 1; --l) {
    double jm1 = (2.0 * l + 1.0) / w * jl - jp1;
    norm += (2.0 * l + 1.0) * jl * jl;
    if (l < L) j[l] = jl;
    jp1 = jl;
    jl = jm1;
    if (std::abs(jl) > 1e150) {
      jp1 *= 1e-150;
      jl *= 1e-150;
      norm *= 1e-300;
      for (int m = l; m < L; ++m) j[m] *= 1e-150;
    }
  }
  j[0] = jl;
  norm += jl * jl;
  double sc = 1.0 / std::sqrt(norm);
  for (int l = 0; l < L; ++l) j[l] *= sc;
}

struct FilonPanel {
  double center = 0.0;
  double half = 0.0;
  std::array<Complex, filon_order> coef{};  // Legendre coefficients of the integrand on the panel
};

// integral over the panel of g(k) e^{ikx}
inline Complex filon_apply(const FilonPanel& pn, double x) {
  std::array<double, filon_order> jb{};
  double w = pn.half * x;
  spherical_bessel(std::abs(w), jb);
  Complex acc{};
  static const Complex ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int l = 0; l < filon_order; ++l) {
    double jl = (w < 0.0 && (l % 2)) ? -jb[l] : jb[l];
    acc += pn.coef[l] * ipow[l % 4] * jl;
  }
  return 2.0 * pn.half * std::polar(1.0, pn.center * x) * acc;
}

template <class G>
FilonPanel filon_panel(G&& g, double a, double b, double* tail, double* gmax) {
  const auto& tab = legendre_table();
  FilonPanel pn;
  pn.center = 0.5 * (a + b);
  pn.half = 0.5 * (b - a);
  std::array<Complex, filon_order> vals{};
  double mx = 0.0;
  for (int j = 0; j < filon_order; ++j) {
    vals[j] = g(pn.center + pn.half * tab.t[j]);
    mx = std::max(mx, std::abs(vals[j]));
  }
  for (int l = 0; l < filon_order; ++l) {
    Complex s{};
    for (int j = 0; j < filon_order; ++j) s += tab.w[j] * vals[j] * tab.p[l][j];
    pn.coef[l] = 0.5 * (2.0 * l + 1.0) * s;
  }
  *tail = std::abs(pn.coef[filon_order - 1]) + std::abs(pn.coef[filon_order - 2]);
  *gmax = mx;
  return pn;
}

// poles nearest the real axis, for panel sizing
inline double nearest_pole_distance(const std::vector<Pole>& poles, double k, double alpha) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : poles) d = std::min(d, std::abs(Complex{k, 0.0} - p.position));
  return std::max(d, 1e-6 * alpha);
}

}  // namespace detail

// xi(x) = (1/2pi) int [T(k) - 1] e^{ikx} dk, so that eta_smooth = e^{-i p0 x} xi(x); xi is real
class SpectralXi {
 public:
  explicit SpectralXi(const EckartPotential& pot, double k_max = 0.0, double tol = 1e-12) : pot_(pot) {
    pot_.validate();
    if (pot_.is_free()) return;
    const double alpha = pot_.alpha;
    mu_j_ = pot_.mu * pot_.integral();
    lambda_ = std::max(alpha, std::abs(mu_j_));
    auto poles = enumerate_poles(pot_, 8);
    double ktop = std::sqrt(2.0 * pot_.mu * std::abs(pot_.u0));
    double kphys = 4.0 * std::max({alpha, pot_.beta(), ktop, std::abs(pot_.s()) * alpha});
    k_end_ = std::max({k_max, 50.0 * alpha, 1e3 * std::max({lambda_, kphys})});
    auto r = [this](double k) { return remainder(k); };
    double w0 = 0.05 * std::min(alpha, detail::nearest_pole_distance(poles, 0.0, alpha));
    struct Piece {
      double a, e, parent_tail;
    };
    std::vector<Piece> todo;
    double b = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    while (b < k_end_) {
      double w = (b < kphys) ? std::min(0.5 * alpha, std::max(b, w0)) : 0.5 * b;
      w = std::min(w, 0.25 * detail::nearest_pole_distance(poles, b, alpha) + w0);
      double e = std::min(b + w, k_end_);
      todo.push_back({b, e, inf});
      b = e;
    }
    const double scale = 1.0 + std::abs(mu_j_) / lambda_ + 0.5 * mu_j_ * mu_j_ / (lambda_ * lambda_);
    while (!todo.empty()) {
      auto [a, e, pt] = todo.back();
      todo.pop_back();
      double tail = 0.0, gm = 0.0;
      auto pn = detail::filon_panel(r, a, e, &tail, &gm);
      // rounding noise in T: halving no longer helps
      bool stalled = tail < 1e-8 * scale && tail > 0.25 * pt;
      if (tail > tol * scale && !stalled && (e - a) > 1e-9 * std::max(1.0, e) && panels_.size() < 400000) {
        double m = 0.5 * (a + e);
        todo.push_back({a, m, tail});
        todo.push_back({m, e, tail});
        continue;
      }
      panels_.push_back(pn);
    }
    r_end_ = remainder(k_end_);
    double h = 1e-3 * k_end_;
    dr_end_ = (remainder(k_end_ + h) - remainder(k_end_ - h)) / (2.0 * h);
  }

  // T(k) - 1 - a(k), a(k) = (-i mu J k - (mu J)^2/2) / (k^2 + lambda^2)
  Complex remainder(double k) const {
    Complex tm1 = transmission_minus_one(pot_, k);
    return tm1 - asymptote(k);
  }

  Complex asymptote(double k) const {
    double d = k * k + lambda_ * lambda_;
    return Complex{-0.5 * mu_j_ * mu_j_, -mu_j_ * k} / d;
  }

  double operator()(double x) const {
    if (pot_.is_free()) return 0.0;
    Complex f{};
    for (const auto& pn : panels_) f += detail::filon_apply(pn, x);
    // integration by parts beyond k_end
    if (std::abs(k_end_ * x) > 10.0) {
      f += std::polar(1.0, k_end_ * x) * (Complex{0.0, 1.0} * r_end_ / x + dr_end_ / (x * x));
    } else {
      f += 0.5 * r_end_ * k_end_;
    }
    double ax = std::abs(x);
    double sg = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    double e = std::exp(-lambda_ * ax);
    double a = pi * mu_j_ * sg * e - pi * mu_j_ * mu_j_ / (2.0 * lambda_) * e;
    return (2.0 * f.real() + a) / (2.0 * pi);
  }

  std::size_t panel_count() const { return panels_.size(); }
  const std::vector<detail::FilonPanel>& panels() const { return panels_; }
  double k_end() const { return k_end_; }

 private:
  EckartPotential pot_;
  double mu_j_ = 0.0;
  double lambda_ = 1.0;
  double k_end_ = 0.0;
  Complex r_end_{};
  Complex dr_end_{};
  std::vector<detail::FilonPanel> panels_;
};

inline DelayDistribution eta_spectral(const EckartPotential& pot, double p0, const std::vector<double>& x_grid,
                                      double k_max = 0.0) {
  DelayDistribution d;
  d.p0 = p0;
  d.x_grid = x_grid;
  d.eta_smooth.resize(x_grid.size());
  if (pot.is_free()) return d;
  SpectralXi xi(pot, k_max);
  for (std::size_t j = 0; j < x_grid.size(); ++j) d.eta_smooth[j] = std::polar(1.0, -p0 * x_grid[j]) * xi(x_grid[j]);
  return d;
}

namespace detail {

using mp_real = boost::multiprecision::cpp_bin_float_50;
using mp_wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

template <class R>
struct Cx {
  R re{0}, im{0};
  Cx() = default;
  Cx(R a, R b) : re(std::move(a)), im(std::move(b)) {}
  explicit Cx(Complex z) : re(z.real()), im(z.imag()) {}
  Cx operator+(const Cx& o) const { return {re + o.re, im + o.im}; }
  Cx operator-(const Cx& o) const { return {re - o.re, im - o.im}; }
  Cx operator*(const Cx& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
  Cx operator*(const R& r) const { return {re * r, im * r}; }
  Cx operator/(const Cx& o) const {
    R d = o.re * o.re + o.im * o.im;
    return {(re * o.re + im * o.im) / d, (im * o.re - re * o.im) / d};
  }
  Complex to_complex() const { return {static_cast<double>(re), static_cast<double>(im)}; }
  double abs_d() const { return std::hypot(static_cast<double>(re), static_cast<double>(im)); }
};

template <class R>
Cx<R> cexp(Complex z) {
  using std::cos;
  using std::exp;
  using std::sin;
  R er = exp(R(z.real()));
  R a(z.imag());
  return {er * cos(a), er * sin(a)};
}

struct SeriesResult {
  Complex value;
  double max_term = 0.0;
  int terms = 0;
};

// sum_{n >= n_first} R_n e^{E0 + n alpha x}, R_{n+1}/R_n = -(sigma-n-1)(sigma-n)/((n+1)(2 sigma-n)),
// stopping after n_last or once terms fall below e^{ln_tol} and shrink
template <class R>
SeriesResult residue_series(Complex sigma, Complex r0, Complex e0, double ax, int n_first, int n_last, double ln_tol,
                            int n_cap, const Complex* shift = nullptr) {
  using std::exp;
  Cx<R> rn(r0);
  Cx<R> sg(sigma);
  Cx<R> acc;
  R q = exp(R(ax));
  R qn(1);
  SeriesResult out;
  double lq = ax;
  Cx<R> sh = shift ? Cx<R>(*shift) : Cx<R>();
  for (int n = 0;; ++n) {
    if (n_last >= 0 && n > n_last) break;
    Complex nd{static_cast<double>(n), 0.0};
    double ratio = std::abs((sigma - nd - 1.0) * (sigma - nd)) / ((n + 1.0) * std::abs(2.0 * sigma - nd)) * std::exp(lq);
    if (n >= n_first) {
      Cx<R> c = shift ? (rn + sh) : rn;
      acc = acc + c * qn;
      double lt = std::log(std::max(c.abs_d(), 1e-300)) + n * lq + e0.real();
      out.max_term = std::max(out.max_term, std::exp(std::min(lt, 700.0)));
      out.terms = n - n_first + 1;
      if (n_last < 0 && n > n_first + 2 && lt < ln_tol && ratio < 0.999) break;
      if (n >= n_cap) throw numerical_error("delay", "pole series did not converge; |x| too small for the pole route");
    }
    Cx<R> ndr(nd);
    Cx<R> num = (sg - ndr - Cx<R>(Complex{1.0, 0.0})) * (sg - ndr);
    Cx<R> den = (sg * R(2) - ndr) * R(n + 1);
    rn = Cx<R>(R(0), R(0)) - num * rn / den;
    qn *= q;
  }
  Cx<R> pre = cexp<R>(e0);
  out.value = (acc * pre).to_complex();
  return out;
}

template <class F>
SeriesResult adaptive_precision(F&& run) {
  auto lost = [](const SeriesResult& r, double digits) {
    return r.max_term > std::pow(10.0, digits - 11.0) * std::max(std::abs(r.value), 1e-3);
  };
  SeriesResult d = run(double{});
  if (!lost(d, 16.0)) return d;
  d = run(mp_real{});
  if (!lost(d, 50.0)) return d;
  d = run(mp_wide{});
  if (!lost(d, 200.0)) return d;
  throw numerical_error("delay", "pole series cancellation exceeds working precision; use the spectral route");
}

inline bool half_integer_s(const EckartPotential& pot, double tol) {
  Complex s = pot.s();
  if (std::abs(s.imag()) > tol) return false;
  double t = 2.0 * s.real();
  double r = std::round(t);
  return std::abs(t - r) <= 2.0 * tol && static_cast<long>(r) % 2 != 0;
}

}  // namespace detail

// xi(x) = e^{i p0 x} eta_smooth(x) from the pole expansion: bound poles for x > 0, the rest for x < 0
inline Complex pole_xi(const EckartPotential& pot, double x, int n_cap = 200000, double tol = 1e-8) {
  if (pot.is_free()) return {};
  const double alpha = pot.alpha;
  const Complex i{0.0, 1.0};
  const Complex s = pot.s();
  const double ln_tol = std::log(1e-19 * alpha);
  auto bc = bound_state_count(pot, tol);

  if (detail::half_integer_s(pot, tol)) {
    if (x == 0.0) throw std::domain_error("pole_xi: x = 0 needs the spectral route");
    Complex acc{};
    if (x > 0.0) {
      for (const auto& p : enumerate_poles(pot, std::max(bc.bound, 1)))
        if (p.position.imag() > 0.0) acc += i * p.residue * std::exp(i * p.position * x);
      return acc;
    }
    int chunk = 256;
    auto poles = enumerate_poles(pot, chunk);
    for (int n = 0;; ++n) {
      if (n >= static_cast<int>(poles.size())) {
        if (chunk >= n_cap) throw numerical_error("delay", "pole series did not converge");
        chunk *= 2;
        poles = enumerate_poles(pot, chunk);
      }
      const auto& p = poles[n];
      if (p.position.imag() > 0.0) continue;
      Complex e = std::exp(i * p.position * x);
      Complex term = (-i * p.residue + x * p.residue2) * e;
      acc += term;
      if (p.order == 2 && std::abs(term) < 1e-19 * alpha && std::exp(alpha * x) < 0.999) break;
    }
    return acc;
  }

  if (bc.threshold) {
    // s = M: finite sum over the bound poles, zero for x < 0
    if (x < 0.0) return {};
    int m = bc.bound;
    Complex r0 = detail::integer_s_residue(m, 0, alpha);
    Complex sig{static_cast<double>(m), 0.0};
    auto run = [&](auto tag) {
      using R = decltype(tag);
      return detail::residue_series<R>(sig, r0, Complex{-alpha * m * x, 0.0}, alpha * x, 0, m - 1, ln_tol, n_cap);
    };
    return i * detail::adaptive_precision(run).value;
  }

  Complex r0i = detail::ln_simple_residue(s, 0, alpha).value();
  Complex r0ii = detail::ln_simple_residue(-1.0 - s, 0, alpha).value();
  if (x > 0.0) {
    if (bc.bound == 0) return {};
    auto run = [&](auto tag) {
      using R = decltype(tag);
      return detail::residue_series<R>(s, r0i, -alpha * s * x, alpha * x, 0, bc.bound - 1, ln_tol, n_cap);
    };
    return i * detail::adaptive_precision(run).value;
  }
  if (x == 0.0) throw std::domain_error("pole_xi: x = 0 needs the spectral route");
  auto run1 = [&](auto tag) {
    using R = decltype(tag);
    return detail::residue_series<R>(s, r0i, -alpha * s * x, alpha * x, bc.bound, -1, ln_tol, n_cap);
  };
  auto run2 = [&](auto tag) {
    using R = decltype(tag);
    return detail::residue_series<R>(-1.0 - s, r0ii, alpha * (s + 1.0) * x, alpha * x, 0, -1, ln_tol, n_cap);
  };
  auto a = detail::adaptive_precision(run1);
  auto b = detail::adaptive_precision(run2);
  return -i * (a.value + b.value);
}

inline DelayDistribution eta_pole(const EckartPotential& pot, double p0, const std::vector<double>& x_grid,
                                  int n_cap = 200000) {
  DelayDistribution d;
  d.p0 = p0;
  d.x_grid = x_grid;
  d.eta_smooth.resize(x_grid.size());
  for (std::size_t j = 0; j < x_grid.size(); ++j)
    d.eta_smooth[j] = std::polar(1.0, -p0 * x_grid[j]) * pole_xi(pot, x_grid[j], n_cap);
  return d;
}

// x <= 0, barrier above alpha^2/8mu: (e^{-ip0x}/2pi)[F(x) - alpha sin(beta x)/sinh(alpha x/2)],
// F = 4 pi sum_n e^{(n+1/2) alpha x} Im{[Res(k^I_n) + alpha/2pi] e^{-i beta x}}
inline DelayDistribution eta_barrier_closed_form(const EckartPotential& pot, double p0,
                                                 const std::vector<double>& x_grid, int n_terms) {
  if (!(pot.strength() > 1.0)) throw std::domain_error("eta_barrier_closed_form: needs U0 > alpha^2/8mu");
  if (n_terms < 1) throw std::domain_error("eta_barrier_closed_form: n_terms must be >= 1");
  const double alpha = pot.alpha;
  const double beta = pot.beta();
  const Complex s = pot.s();
  const Complex r0 = detail::ln_simple_residue(s, 0, alpha).value();
  const Complex shift{alpha / (2.0 * pi), 0.0};
  DelayDistribution d;
  d.p0 = p0;
  d.x_grid = x_grid;
  d.eta_smooth.resize(x_grid.size());
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    double x = x_grid[j];
    if (x > 0.0) throw std::domain_error("eta_barrier_closed_form: grid must satisfy x <= 0");
    double sub = (x == 0.0) ? 2.0 * beta : alpha * std::sin(beta * x) / std::sinh(0.5 * alpha * x);
    // sum_n (R_n + alpha/2pi) e^{(n+1/2) alpha x} e^{-i beta x}
    auto run = [&](auto tag) {
      using R = decltype(tag);
      return detail::residue_series<R>(s, r0, Complex{0.5 * alpha * x, -beta * x}, alpha * x, 0, n_terms - 1, 0.0,
                                       n_terms + 1, &shift);
    };
    Complex ser = detail::adaptive_precision(run).value;
    double f = 4.0 * pi * ser.imag();
    d.eta_smooth[j] = std::polar(1.0, -p0 * x) * ((f - sub) / (2.0 * pi));
  }
  return d;
}

// trapezoid; a jump at a node is handled to second order if the node carries the mid value
inline Complex integrate_eta(const DelayDistribution& d) {
  Complex acc{};
  for (std::size_t j = 1; j < d.x_grid.size(); ++j)
    acc += 0.5 * (d.x_grid[j] - d.x_grid[j - 1]) * (d.eta_smooth[j] + d.eta_smooth[j - 1]);
  return acc;
}

// integral of eta including the delta weight: the sum rule gives T(p0)
inline Complex sum_rule(const DelayDistribution& d) { return d.delta_weight + integrate_eta(d); }

// y^{-1} int_x^{x+y} eta_smooth; NaN where x + y runs past the grid
inline std::vector<Complex> running_average(const DelayDistribution& d, double y) {
  const auto& xg = d.x_grid;
  if (!(y > 0.0)) throw std::domain_error("running_average: y must be positive");
  if (xg.size() < 2 || y > xg.back() - xg.front()) throw std::domain_error("running_average: y exceeds the grid");
  std::vector<Complex> cum(xg.size());
  for (std::size_t j = 1; j < xg.size(); ++j)
    cum[j] = cum[j - 1] + 0.5 * (xg[j] - xg[j - 1]) * (d.eta_smooth[j] + d.eta_smooth[j - 1]);
  auto at = [&](double x) {
    auto it = std::upper_bound(xg.begin(), xg.end(), x);
    std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xg.begin(), 1), xg.size() - 1);
    std::size_t lo = hi - 1;
    double h = xg[hi] - xg[lo];
    double u = x - xg[lo];
    // exact integral of the linear interpolant
    Complex slope = (d.eta_smooth[hi] - d.eta_smooth[lo]) / h;
    return cum[lo] + u * d.eta_smooth[lo] + 0.5 * u * u * slope;
  };
  std::vector<Complex> out(xg.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < xg.size(); ++j) {
    double e = xg[j] + y;
    if (e > xg.back() * (1.0 + 1e-14) + 1e-300) {
      out[j] = {nan, nan};
      continue;
    }
    out[j] = (at(std::min(e, xg.back())) - cum[j]) / y;
  }
  return out;
}

// x~'(p0) = -dPhi/dp from the semiclassical phase
inline Complex stationary_delay(const EckartPotential& pot, double p0) {
  if (!(p0 > 0.0)) throw std::domain_error("stationary_delay: p0 must be positive");
  if (pot.is_free()) return {};
  return classical_shift(pot, p0);
}

namespace detail {

// d/dp ln T
inline Complex dlnt(const EckartPotential& pot, double p) {
  if (pot.is_free()) return {};
  const Complex s = pot.s();
  const Complex z{0.0, -p / pot.alpha};
  const Complex dz{0.0, -1.0 / pot.alpha};
  double az = std::abs(z);
  if (az >= 30.0 * std::max(1.0, std::norm(s))) {
    // derivative of the asymptotic series
    Complex inv = 1.0 / z;
    Complex sum{};
    Complex pw = inv * inv;
    for (int n = 2; n <= 30; n += 2) {
      Complex c = 2.0 * (bernoulli_poly(n, -s) - bernoulli_numbers[n]) / static_cast<double>(n * (n - 1));
      Complex term = -static_cast<double>(n - 1) * c * pw;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
      pw *= inv * inv;
    }
    return sum * dz;
  }
  return (digamma(z - s) + digamma(z + s + 1.0) - digamma(z) - digamma(z + 1.0)) * dz;
}

}  // namespace detail

// x'^m-bar = T^{-1} (i d/dp)^m T at p0, m = 1 or 2
inline Complex delay_moments(const EckartPotential& pot, double p0, int m) {
  if (m != 1 && m != 2) throw std::domain_error("delay_moments: m must be 1 or 2");
  if (!(p0 > 0.0)) throw std::domain_error("delay_moments: p0 must be positive");
  if (pot.is_free()) return {};
  if (transmission_exact(pot, p0).is_zero()) throw numerical_error("delay", "T(p0) = 0; moments undefined");
  const Complex i{0.0, 1.0};
  Complex d1 = detail::dlnt(pot, p0);
  if (m == 1) return i * d1;
  // second derivative of ln T: central differences of the analytic first derivative, Richardson-extrapolated
  auto poles = enumerate_poles(pot, 8);
  double dist = detail::nearest_pole_distance(poles, p0, pot.alpha);
  double h = std::min({1e-3 * std::max(pot.alpha, p0), 0.05 * dist, 0.5 * p0});
  auto cd = [&](double hh) { return (detail::dlnt(pot, p0 + hh) - detail::dlnt(pot, p0 - hh)) / (2.0 * hh); };
  Complex d2 = (4.0 * cd(0.5 * h) - cd(h)) / 3.0;
  return -(d2 + d1 * d1);
}

// R(p0) = sqrt|T''/T|
inline double effective_range(const EckartPotential& pot, double p0) {
  return std::sqrt(std::abs(delay_moments(pot, p0, 2)));
}

// delta weight plus the Gaussian-windowed integral of eta_smooth
inline Complex truncated_transmission(const DelayDistribution& d, double z) {
  if (!(z > 0.0)) throw std::domain_error("truncated_transmission: z must be positive");
  const auto& xg = d.x_grid;
  if (xg.size() < 2) throw std::domain_error("truncated_transmission: empty grid");
  double emax = 0.0;
  for (const auto& e : d.eta_smooth) emax = std::max(emax, std::abs(e));
  auto edge = [&](std::size_t j) {
    double w = std::exp(-xg[j] * xg[j] / (z * z));
    return w * std::abs(d.eta_smooth[j]) > 1e-8 * std::max(emax, 1e-300);
  };
  if (emax > 0.0 && (edge(0) || edge(xg.size() - 1)))
    throw std::domain_error("truncated_transmission: grid too short for window z");
  Complex acc{};
  for (std::size_t j = 1; j < xg.size(); ++j) {
    double w0 = std::exp(-xg[j - 1] * xg[j - 1] / (z * z));
    double w1 = std::exp(-xg[j] * xg[j] / (z * z));
    acc += 0.5 * (xg[j] - xg[j - 1]) * (w0 * d.eta_smooth[j - 1] + w1 * d.eta_smooth[j]);
  }
  return d.delta_weight + acc;
}

struct ToyRange {
  double integral = 0.0;        // I(z)
  double exact_integral = 0.0;  // epsilon
  double mean = 0.0;            // x-bar
  double second_moment = 0.0;   // x^2-bar
};

// rho(x) = (1/2 + eps) e^{-x} - e^{-2x}, x >= 0
inline ToyRange toy_range_demo(double eps, double z) {
  if (!(eps > 0.0) || !(z > 0.0)) throw std::domain_error("toy_range_demo: eps and z must be positive");
  // int_0^inf e^{-x^2/z^2 - a x} dx = (z sqrt(pi)/2) w(i a z/2)
  auto win = [&](double a) { return 0.5 * z * std::sqrt(pi) * faddeeva(Complex{0.0, 0.5 * a * z}).real(); };
  ToyRange r;
  r.integral = (0.5 + eps) * win(1.0) - win(2.0);
  r.exact_integral = eps;
  r.mean = (0.25 + eps) / eps;
  r.second_moment = (0.75 + 2.0 * eps) / eps;
  return r;
}

// closed-form models near a threshold: M = 0 low barrier / shallow virtual state, M >= 1 near s = M
class NearThresholdModel {
 public:
  NearThresholdModel(const EckartPotential& pot, int m) : pot_(pot), m_(m) {
    if (m < 0) throw std::domain_error("near_threshold_model: M must be >= 0");
    eps_ = pot.s().real() - m;
    for (int n = 0; n < m; ++n) {
      // (-1)^n (2M-n)! / (n! (M-n-1)! (M-n)!)
      double l = std::lgamma(2.0 * m - n + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 0.0) -
                 std::lgamma(m - n + 1.0);
      c_.push_back((n % 2 ? -1.0 : 1.0) * std::exp(l));
    }
  }

  double epsilon() const { return eps_; }

  // validity window |s - M| << 1, p0 << alpha
  bool in_validity_window(double p0) const {
    return std::abs(pot_.s().imag()) < 1e-12 && std::abs(eps_) < 0.1 && p0 < 0.1 * pot_.alpha;
  }

  Complex eta(double p, double x) const {
    const double a = pot_.alpha;
    Complex out{};
    if (x >= 0.0) {
      for (int n = 0; n < m_; ++n)
        out += Complex{-a * c_[n], 0.0} * std::exp(-Complex{a * (m_ - n), p} * x);
    }
    // virtual or shallow level at k = i alpha eps
    double sg = (m_ % 2) ? -1.0 : 1.0;
    bool side = eps_ >= 0.0 ? (x >= 0.0) : (x < 0.0);
    if (side && eps_ != 0.0) {
      double amp = (eps_ >= 0.0 ? -1.0 : 1.0) * sg * a * eps_;
      out += amp * std::exp(-Complex{a * eps_, p} * x);
    }
    return out;
  }

  // e^{i Theta(p)} from the M threshold-pinned poles
  Complex theta_factor(double p) const {
    const double a = pot_.alpha;
    Complex f{1.0, 0.0};
    for (int n = 0; n < m_; ++n) f -= c_[n] / Complex{static_cast<double>(m_ - n), p / a};
    return f;
  }

  Complex transmission(double p) const {
    const double a = pot_.alpha;
    double sg = (m_ % 2) ? -1.0 : 1.0;
    return theta_factor(p) - sg * eps_ / Complex{eps_, p / a};
  }

  // delta x_COM - delta v0 t
  double com_delay(double p0) const {
    const double a = pot_.alpha;
    double bw = a * eps_ / (a * a * eps_ * eps_ + p0 * p0);
    Complex f = theta_factor(p0);
    Complex df{};
    for (int n = 0; n < m_; ++n) {
      Complex d = Complex{static_cast<double>(m_ - n), p0 / a};
      df += c_[n] * Complex{0.0, 1.0 / a} / (d * d);
    }
    double dtheta = (df / f).imag();
    return bw - dtheta;
  }

  // x'^2-bar of the two-pole M = 1 model with k^I_0 = i alpha s
  Complex x2_moment(double p0) const {
    if (m_ != 1) throw std::domain_error("near_threshold_model: second moment formula is for M = 1");
    const double a = pot_.alpha;
    const double s = pot_.s().real();
    Complex q{0.0, p0 / a};
    Complex t = transmission_two_pole(p0);
    Complex b1 = s + q;
    Complex b2 = s - 1.0 + q;
    return (-4.0 / (b1 * b1 * b1) + 2.0 * (s - 1.0) / (b2 * b2 * b2)) / (a * a * t);
  }

  // M = 1 two-pole transmission with k^I_0 = i alpha s
  Complex transmission_two_pole(double p) const {
    const double s = pot_.s().real();
    Complex q{0.0, p / pot_.alpha};
    return 1.0 - 2.0 / (s + q) + (s - 1.0) / (s - 1.0 + q);
  }

 private:
  EckartPotential pot_;
  int m_ = 0;
  double eps_ = 0.0;
  std::vector<double> c_;
};

inline void write_delay_csv(std::ostream& os, const DelayDistribution& d, const std::vector<Complex>& avg) {
  auto old = os.precision(17);
  os << "# p0=" << d.p0 << " delta_weight=" << d.delta_weight.real() << "\n";
  os << "x,re_eta,im_eta,re_avg,im_avg\n";
  for (std::size_t j = 0; j < d.x_grid.size(); ++j) {
    Complex a = j < avg.size() ? avg[j] : Complex{};
    os << d.x_grid[j] << ',' << d.eta_smooth[j].real() << ',' << d.eta_smooth[j].imag() << ',' << a.real() << ','
       << a.imag() << '\n';
  }
  os.precision(old);
}

}  // namespace eckart
