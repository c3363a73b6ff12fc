#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "eckart/delay.hpp"
#include "eckart/errors.hpp"
#include "eckart/poles.hpp"
#include "eckart/potential.hpp"
#include "eckart/special_fn.hpp"
#include "eckart/transmission.hpp"

namespace eckart {

struct GaussianPacket {
  double p0 = 1.0;
  double dp = 0.1;
  double x0 = -100.0;

  double dx() const { return 2.0 / dp; }

  void validate() const {
    if (!(p0 > 0.0) || !std::isfinite(p0)) throw std::domain_error("GaussianPacket: p0 must be positive");
    if (!(dp > 0.0) || !std::isfinite(dp)) throw std::domain_error("GaussianPacket: dp must be positive");
    if (!std::isfinite(x0)) throw std::domain_error("GaussianPacket: x0 must be finite");
  }
};

// psi(x) = values * exp(log_scale)
struct WaveField {
  std::vector<double> x_grid;
  std::vector<Complex> values;
  double log_scale = 0.0;
  double time = 0.0;

  Complex at(std::size_t j) const { return values[j] * std::exp(log_scale); }
};

namespace detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// values = exp(logs - max Re logs)
inline WaveField make_field(const std::vector<double>& x, const std::vector<Complex>& logs, double t) {
  WaveField f;
  f.x_grid = x;
  f.time = t;
  double m = neg_inf;
  for (const auto& l : logs) m = std::max(m, l.real());
  f.values.resize(x.size());
  if (!std::isfinite(m)) return f;
  f.log_scale = m;
  for (std::size_t j = 0; j < x.size(); ++j)
    f.values[j] = std::isfinite(logs[j].real()) ? std::exp(logs[j] - m) : Complex{};
  return f;
}

// ln(sum exp(l_i))
inline Complex log_sum(const std::vector<Complex>& ls) {
  double m = neg_inf;
  for (const auto& l : ls) m = std::max(m, l.real());
  if (!std::isfinite(m)) return {neg_inf, 0.0};
  Complex acc{};
  for (const auto& l : ls)
    if (std::isfinite(l.real())) acc += std::exp(l - m);
  if (acc == Complex{}) return {neg_inf, 0.0};
  return std::log(acc) + m;
}

// ln w(z), safe where w overflows (Im z << 0)
inline Complex log_faddeeva(Complex z) {
  if (z.imag() > -5.0) return std::log(faddeeva(z));
  // w(z) = 2 e^{-z^2} - w(-z)
  Complex e = -z * z;
  Complex r = faddeeva(-z) * std::exp(-e) * 0.5;
  return e + std::log(2.0) + detail::log1p(-r);
}

// ln w'(z), w' = -2 z w + 2i/sqrt(pi)
inline Complex log_faddeeva_prime(Complex z) {
  Complex lw = log_faddeeva(z);
  Complex c{0.0, 2.0 / std::sqrt(pi)};
  return lw + std::log(-2.0 * z + c * std::exp(-lw));
}

inline Complex log_i(double sign) { return {0.0, sign * 0.5 * pi}; }

inline Complex log_value(Complex z) {
  if (z == Complex{}) return {neg_inf, 0.0};
  return std::log(z);
}

}  // namespace detail

inline Complex free_envelope_log(const GaussianPacket& pk, double mu, Complex x, double t) {
  double dx = pk.dx();
  Complex d2{dx * dx, 2.0 * t / mu};
  Complex u = x - pk.x0 - pk.p0 * t / mu;
  return 0.25 * std::log(2.0 * dx * dx / pi) - 0.5 * std::log(d2) - u * u / d2;
}

// G0(x, t): (2 dx^2 / (pi dxt^4))^{1/4} exp(-(x - p0 t/mu - x0)^2 / dxt^2), dxt^2 = dx^2 + 2it/mu
inline Complex free_envelope(const GaussianPacket& pk, double x, double t, double mu = 1.0) {
  return std::exp(free_envelope_log(pk, mu, Complex{x, 0.0}, t));
}

inline Complex free_packet_log(const GaussianPacket& pk, double mu, Complex x, double t) {
  double e0 = pk.p0 * pk.p0 / (2.0 * mu);
  return Complex{0.0, pk.p0} * x - Complex{0.0, e0 * t} + free_envelope_log(pk, mu, x, t);
}

inline WaveField free_packet(const GaussianPacket& pk, const std::vector<double>& grid, double t, double mu = 1.0) {
  pk.validate();
  std::vector<Complex> l(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) l[j] = free_packet_log(pk, mu, grid[j], t);
  return detail::make_field(grid, l, t);
}

// uniform grid around the free centre, widened by the expected shift
inline std::vector<double> default_grid(const EckartPotential& pot, const GaussianPacket& pk, double t,
                                        std::size_t n = 4096) {
  double dx = pk.dx();
  double w = std::abs(Complex{dx * dx, 2.0 * t / pot.mu}) / dx;
  double c = pk.x0 + pk.p0 * t / pot.mu;
  double extra = 10.0 / pot.alpha;
  if (!pot.is_free()) {
    Complex sh = classical_shift(pot, pk.p0);
    extra += std::abs(sh.real()) + pk.dp * pk.dp * std::abs(sh.imag()) * t / pot.mu;
  }
  double lo = c - 10.0 * w - extra, hi = c + 10.0 * w + extra;
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
  return g;
}

namespace detail {

inline Complex ln_t_real_axis(const EckartPotential& pot, double p) {
  if (pot.is_free()) return {};
  if (p < 0.0) return std::conj(ln_t_real_axis(pot, -p));
  return ln_transmission(pot, p);
}

inline double ln_amplitude_norm(const GaussianPacket& pk) {
  return 0.25 * std::log(2.0 / (pi * pk.dx() * pk.dx())) - 0.5 * std::log(pi) - std::log(pk.dp);
}

inline Complex ln_amplitude(const GaussianPacket& pk, double q) {
  return {ln_amplitude_norm(pk) - q * q / (pk.dp * pk.dp), -q * pk.x0};
}

// Re ln |T A| up to a constant
inline double ln_weight(const EckartPotential& pot, const GaussianPacket& pk, double p) {
  double q = p - pk.p0;
  return ln_t_real_axis(pot, p).real() - q * q / (pk.dp * pk.dp);
}

struct MomentumWindow {
  double lo = 0.0;
  double hi = 0.0;
  double peak = 0.0;  // max ln|TA|
};

// p0 +- 8 dp, extended while the edges exceed 1e-12 of the peak
inline MomentumWindow momentum_window(const EckartPotential& pot, const GaussianPacket& pk) {
  MomentumWindow w{pk.p0 - 8.0 * pk.dp, pk.p0 + 8.0 * pk.dp, neg_inf};
  const double drop = std::log(1e12);
  for (int it = 0; it < 40; ++it) {
    double step = pk.dp / 4.0;
    double mx = neg_inf;
    for (double p = w.lo; p <= w.hi + 0.5 * step; p += step) mx = std::max(mx, ln_weight(pot, pk, p));
    w.peak = mx;
    if (!std::isfinite(mx)) throw numerical_error("wavepacket", "transmission vanishes on the momentum window");
    bool lo_ok = ln_weight(pot, pk, w.lo) < mx - drop;
    bool hi_ok = ln_weight(pot, pk, w.hi) < mx - drop;
    if (lo_ok && hi_ok) return w;
    double grow = 4.0 * pk.dp * std::pow(2.0, it / 2);
    if (!lo_ok) w.lo -= grow;
    if (!hi_ok) w.hi += grow;
  }
  throw numerical_error("wavepacket", "momentum window did not converge; edge weight still above 1e-12 of peak");
}

inline double pole_clearance(const EckartPotential& pot) {
  if (pot.is_free()) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : enumerate_poles(pot, 8)) {
    if (p.residue == Complex{} && p.residue2 == Complex{}) continue;
    d = std::min(d, std::abs(p.position.imag()));
  }
  return d;
}

inline double momentum_step(const EckartPotential& pot, const GaussianPacket& pk, double span) {
  double h = pk.dp / 8.0;
  h = std::min(h, 0.05 * pot.alpha);
  h = std::min(h, 0.1 * pole_clearance(pot));
  h = std::min(h, 2.0 * pi / (2.0 * span + 40.0 / pot.alpha));
  return h;
}

}  // namespace detail

// psi^T = int T(p) A(p - p0) e^{ipx - iE(p)t} dp, in the log domain
inline WaveField transmitted_quadrature(const EckartPotential& pot, const GaussianPacket& pk,
                                        const std::vector<double>& grid, double t, int max_nodes = 1 << 22) {
  pk.validate();
  if (grid.empty()) throw std::domain_error("transmitted_quadrature: empty grid");
  auto win = detail::momentum_window(pot, pk);
  double span = *std::max_element(grid.begin(), grid.end()) - *std::min_element(grid.begin(), grid.end());
  double h = detail::momentum_step(pot, pk, span);
  auto np = static_cast<long>(std::ceil((win.hi - win.lo) / h));
  if (np > max_nodes) throw numerical_error("wavepacket", "momentum quadrature needs too many nodes");
  h = (win.hi - win.lo) / static_cast<double>(np);
  std::vector<double> ps;
  std::vector<Complex> cs;
  double m = detail::neg_inf;
  std::vector<Complex> ls;
  for (long j = 0; j <= np; ++j) {
    double p = win.lo + h * static_cast<double>(j);
    Complex l = detail::ln_t_real_axis(pot, p) + detail::ln_amplitude(pk, p - pk.p0) -
                Complex{0.0, p * p / (2.0 * pot.mu) * t};
    ps.push_back(p);
    ls.push_back(l);
    if (std::isfinite(l.real())) m = std::max(m, l.real());
  }
  const double floor = m - std::log(1e17);
  for (std::size_t j = 0; j < ps.size(); ++j) cs.push_back(ls[j].real() > floor ? std::exp(ls[j] - m) : Complex{});
  std::vector<Complex> logs(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Complex acc{};
    for (std::size_t j = 0; j < ps.size(); ++j)
      if (cs[j] != Complex{}) acc += cs[j] * std::polar(1.0, ps[j] * grid[k]);
    logs[k] = detail::log_value(acc * h) + m;
  }
  return detail::make_field(grid, logs, t);
}

namespace detail {

// ln of int A(p - p0) e^{ipx - iEt} / (p - k)^order dp
inline Complex ln_pole_envelope(const GaussianPacket& pk, double mu, double x, double t, Complex k, int order) {
  double dx = pk.dx();
  Complex d2{dx * dx, 2.0 * t / mu};
  Complex sd = std::sqrt(d2);
  Complex u = x - pk.x0 - pk.p0 * t / mu;
  Complex kap = pk.p0 - k;
  Complex z = u / sd - Complex{0.0, 0.5} * kap * sd;
  Complex lpsi = free_packet_log(pk, mu, x, t);
  Complex lpre = 0.5 * std::log(pi * d2) - std::log(2.0);
  const Complex i{0.0, 1.0};
  if (k.imag() < 0.0) {
    if (order == 1) return lpsi + lpre + log_i(-1.0) + log_faddeeva(i * z);
    // d/dk of -i (sqrt(pi D)/2) psi0 w(iz)
    return lpsi + lpre + 0.5 * std::log(d2) - std::log(2.0) + log_i(1.0) + log_faddeeva_prime(i * z);
  }
  if (order == 1) return lpsi + lpre + log_i(1.0) + log_faddeeva(-i * z);
  // d/dk of i (sqrt(pi D)/2) psi0 w(-iz)
  return lpsi + lpre + 0.5 * std::log(d2) - std::log(2.0) + log_i(1.0) + log_faddeeva_prime(-i * z);
}

}  // namespace detail

// psi^T = psi0 + sum Res G(k_n) (+ Res2 dG/dk for double poles), using the first n_max poles
inline WaveField transmitted_pole_form(const EckartPotential& pot, const GaussianPacket& pk,
                                       const std::vector<double>& grid, double t, int n_max) {
  pk.validate();
  if (n_max < 0) throw std::domain_error("transmitted_pole_form: n_max must be >= 0");
  std::vector<Pole> poles;
  if (!pot.is_free() && n_max > 0) {
    poles = enumerate_poles(pot, std::max(1, (n_max + 1) / 2));
    if (static_cast<int>(poles.size()) < n_max) poles = enumerate_poles(pot, n_max);
    if (static_cast<int>(poles.size()) > n_max) poles.resize(n_max);
  }
  std::vector<Complex> logs(grid.size());
  std::vector<Complex> terms;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    terms.clear();
    terms.push_back(free_packet_log(pk, pot.mu, grid[j], t));
    for (const auto& p : poles) {
      if (p.residue != Complex{})
        terms.push_back(std::log(p.residue) + detail::ln_pole_envelope(pk, pot.mu, grid[j], t, p.position, 1));
      if (p.order == 2 && p.residue2 != Complex{})
        terms.push_back(std::log(p.residue2) + detail::ln_pole_envelope(pk, pot.mu, grid[j], t, p.position, 2));
    }
    logs[j] = detail::log_sum(terms);
  }
  return detail::make_field(grid, logs, t);
}

// T(p) ~ exp(i Phi(p0) - i x~' (p - p0)): psi^T = e^{i Phi0} psi0(x - x~') continued to complex shift
inline WaveField transmitted_semiclassical(const EckartPotential& pot, const GaussianPacket& pk,
                                           const std::vector<double>& grid, double t) {
  pk.validate();
  if (pot.is_free()) return free_packet(pk, grid, t, pot.mu);
  Complex phi = semiclassical_phase(pot, pk.p0);
  Complex sh = classical_shift(pot, pk.p0);
  const Complex i{0.0, 1.0};
  std::vector<Complex> logs(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    logs[j] = i * phi + i * sh * pk.p0 + free_packet_log(pk, pot.mu, Complex{grid[j], 0.0} - sh, t);
  return detail::make_field(grid, logs, t);
}

inline double com_position(const WaveField& f) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j < f.x_grid.size(); ++j) {
    double h = f.x_grid[j] - f.x_grid[j - 1];
    double a = std::norm(f.values[j - 1]), b = std::norm(f.values[j]);
    num += 0.5 * h * (f.x_grid[j - 1] * a + f.x_grid[j] * b);
    den += 0.5 * h * (a + b);
  }
  if (!(den > 0.0)) throw std::domain_error("com_position: zero-norm field");
  return num / den;
}

// ln of the field norm, log_scale included
inline double log_norm(const WaveField& f) {
  double den = 0.0;
  for (std::size_t j = 1; j < f.x_grid.size(); ++j)
    den += 0.5 * (f.x_grid[j] - f.x_grid[j - 1]) * (std::norm(f.values[j - 1]) + std::norm(f.values[j]));
  return std::log(den) + 2.0 * f.log_scale;
}

inline double com_delay(const EckartPotential& pot, const GaussianPacket& pk, const std::vector<double>& grid,
                        double t) {
  if (pot.is_free()) return 0.0;
  return com_position(transmitted_quadrature(pot, pk, grid, t)) - com_position(free_packet(pk, grid, t, pot.mu));
}

struct MomentumAverages {
  double mean_p = 0.0;        // <p> over |T|^2 |A|^2
  double mean_shift = 0.0;    // <-d arg T / dp>
  double log_weight = 0.0;    // ln 2pi int |T|^2 |A|^2, the transmitted norm
};

inline MomentumAverages momentum_averages(const EckartPotential& pot, const GaussianPacket& pk) {
  pk.validate();
  MomentumAverages out;
  if (pot.is_free()) {
    out.mean_p = pk.p0;
    return out;
  }
  auto win = detail::momentum_window(pot, pk);
  double h = std::min(pk.dp / 64.0, 0.02 * detail::pole_clearance(pot));
  h = std::min(h, 0.01 * pot.alpha);
  auto n = static_cast<long>(std::ceil((win.hi - win.lo) / h));
  n = std::max<long>(n, 256);
  h = (win.hi - win.lo) / static_cast<double>(n);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (long j = 0; j <= n; ++j) {
    double p = win.lo + h * static_cast<double>(j);
    double lw = 2.0 * (detail::ln_weight(pot, pk, p) - win.peak);
    if (lw < -80.0) continue;
    double w = std::exp(lw) * ((j == 0 || j == n) ? 0.5 : 1.0);
    s0 += w;
    s1 += w * p;
    double ap = std::abs(p);
    if (ap > 0.0) {
      Complex d = detail::dlnt(pot, ap);
      s2 += w * (-d.imag());
    }
  }
  if (!(s0 > 0.0)) throw numerical_error("wavepacket", "degenerate momentum weight");
  out.mean_p = s1 / s0;
  out.mean_shift = s2 / s0;
  out.log_weight = std::log(2.0 * pi * s0 * h) + 2.0 * (win.peak + detail::ln_amplitude_norm(pk));
  return out;
}

// delta v0 = <p - p0> / mu over |T|^2 |A|^2
inline double filtered_velocity_shift(const EckartPotential& pot, const GaussianPacket& pk) {
  if (pot.is_free()) return 0.0;
  return (momentum_averages(pot, pk).mean_p - pk.p0) / pot.mu;
}

// delta x_COM from momentum space: <-d arg T/dp> + t <p - p0> / mu
inline double com_delay_exact(const EckartPotential& pot, const GaussianPacket& pk, double t) {
  if (pot.is_free()) return 0.0;
  auto a = momentum_averages(pot, pk);
  return a.mean_shift + t * (a.mean_p - pk.p0) / pot.mu;
}

struct PhaseTime {
  double tau_phase = 0.0;
  double com_prediction = 0.0;
};

// tau_phase = -(1/v0) d arg T/dp; com_prediction = v0 tau_phase + delta v0 t
inline PhaseTime phase_time_and_broad_com(const EckartPotential& pot, const GaussianPacket& pk, double t) {
  pk.validate();
  PhaseTime out;
  if (pot.is_free()) return out;
  double v0 = pk.p0 / pot.mu;
  double shift = -detail::dlnt(pot, pk.p0).imag();
  out.tau_phase = shift / v0;
  out.com_prediction = v0 * out.tau_phase + filtered_velocity_shift(pot, pk) * t;
  return out;
}

// broad-packet limit of the velocity shift: Im[x-bar] dp^2 / 2 mu
inline double broad_velocity_shift(const EckartPotential& pot, const GaussianPacket& pk) {
  if (pot.is_free()) return 0.0;
  return delay_moments(pot, pk.p0, 1).imag() * pk.dp * pk.dp / (2.0 * pot.mu);
}

enum class ArrivalMode { classical, tunnelling };

inline double arrival_time_difference(const EckartPotential& pot, const GaussianPacket& pk, ArrivalMode mode) {
  pk.validate();
  if (pot.is_free()) return 0.0;
  Complex sh = classical_shift(pot, pk.p0);
  double v0 = pk.p0 / pot.mu;
  if (mode == ArrivalMode::classical) {
    if (std::abs(sh.imag()) > 1e-12 * std::max(1.0, std::abs(sh.real())))
      throw std::domain_error("arrival_time_difference: shift is complex; use the tunnelling mode");
    return -sh.real() / v0;
  }
  return -sh.real() / v0;
}

struct PointerDemo {
  std::vector<double> rho;
  double mean_x = 0.0;
  double broad_limit = 0.0;  // Re[(eta1 + 2 eta2) / (eta1 + eta2)]
};

// rho = |G(x-1) eta1 + G(x-2) eta2|^2, G real Gaussian of width dx
inline PointerDemo double_slit_demo(Complex eta1, Complex eta2, double dx, const std::vector<double>& x_grid) {
  if (!(dx > 0.0)) throw std::domain_error("double_slit_demo: dx must be positive");
  if (x_grid.size() < 2) throw std::domain_error("double_slit_demo: grid too small");
  PointerDemo out;
  Complex s = eta1 + eta2;
  if (std::abs(s) <= 1e-14 * (std::abs(eta1) + std::abs(eta2)) || s == Complex{})
    throw std::domain_error("double_slit_demo: eta1 + eta2 = 0, mean undefined");
  out.broad_limit = ((eta1 + 2.0 * eta2) / s).real();
  auto g = [dx](double x) { return std::exp(-x * x / (dx * dx)); };
  out.rho.resize(x_grid.size());
  for (std::size_t j = 0; j < x_grid.size(); ++j) out.rho[j] = std::norm(g(x_grid[j] - 1.0) * eta1 + g(x_grid[j] - 2.0) * eta2);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j < x_grid.size(); ++j) {
    double h = x_grid[j] - x_grid[j - 1];
    num += 0.5 * h * (x_grid[j - 1] * out.rho[j - 1] + x_grid[j] * out.rho[j]);
    den += 0.5 * h * (out.rho[j - 1] + out.rho[j]);
  }
  if (!(den > 0.0)) throw std::domain_error("double_slit_demo: zero pointer density");
  out.mean_x = num / den;
  return out;
}

inline void write_field_csv(std::ostream& os, const WaveField& f) {
  auto old = os.precision(17);
  os << "# log_scale=" << f.log_scale << " t=" << f.time << "\n";
  os << "x,re_psi,im_psi,abs2_psi\n";
  for (std::size_t j = 0; j < f.x_grid.size(); ++j)
    os << f.x_grid[j] << ',' << f.values[j].real() << ',' << f.values[j].imag() << ',' << std::norm(f.values[j])
       << '\n';
  os.precision(old);
}

// |psi^T|^2 - |psi^0|^2 on a shared grid
inline void write_density_difference_csv(std::ostream& os, const WaveField& tr, const WaveField& fr) {
  if (tr.x_grid.size() != fr.x_grid.size()) throw std::domain_error("density difference: grids differ");
  auto old = os.precision(17);
  os << "# t=" << tr.time << "\n";
  os << "x,rho_transmitted,rho_free,difference\n";
  for (std::size_t j = 0; j < tr.x_grid.size(); ++j) {
    double a = std::norm(tr.values[j]) * std::exp(2.0 * tr.log_scale);
    double b = std::norm(fr.values[j]) * std::exp(2.0 * fr.log_scale);
    os << tr.x_grid[j] << ',' << a << ',' << b << ',' << a - b << '\n';
  }
  os.precision(old);
}

}  // namespace eckart
