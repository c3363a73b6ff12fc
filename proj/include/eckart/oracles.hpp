#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <fftw3.h>

#include "eckart/errors.hpp"
#include "eckart/potential.hpp"
#include "eckart/transmission.hpp"
#include "eckart/wavepacket.hpp"

namespace eckart {

struct OracleReport {
  std::string quantity;
  Complex primary;
  Complex oracle;
  double abs_error = 0.0;
  double rel_error = 0.0;
  std::string resolution;

  static OracleReport make(std::string name, Complex primary, Complex oracle, std::string resolution) {
    OracleReport r{std::move(name), primary, oracle, 0.0, 0.0, std::move(resolution)};
    r.abs_error = std::abs(primary - oracle);
    double den = std::abs(oracle);
    r.rel_error = den > 0.0 ? r.abs_error / den : r.abs_error;
    return r;
  }
};

inline void write_oracle_header(std::ostream& os) {
  os << "quantity,re_primary,im_primary,re_oracle,im_oracle,abs_error,rel_error,resolution\n";
}

inline void write_oracle_row(std::ostream& os, const OracleReport& r) {
  auto old = os.precision(17);
  os << r.quantity << ',' << r.primary.real() << ',' << r.primary.imag() << ',' << r.oracle.real() << ','
     << r.oracle.imag() << ',' << r.abs_error << ',' << r.rel_error << ',' << r.resolution << '\n';
  os.precision(old);
}

namespace detail {

// U0 / cosh^2(alpha x) without overflow
inline double potential_value(const EckartPotential& pot, double x) {
  double e = std::exp(-2.0 * pot.alpha * std::abs(x));
  return 4.0 * pot.u0 * e / ((1.0 + e) * (1.0 + e));
}

}  // namespace detail

// integrate psi'' = 2 mu (V - E) psi from e^{ipx} at +L back to -L and read off the incident amplitude
inline Complex transmission_ode_oracle(const EckartPotential& pot, double p, double domain_half_width = 0.0,
                                       double step = 0.0) {
  pot.validate();
  if (!(p > 0.0)) throw std::domain_error("transmission_ode_oracle: need p > 0");
  if (pot.is_free()) return {1.0, 0.0};
  double l = domain_half_width > 0.0 ? domain_half_width : 30.0 / pot.alpha;
  if (l * pot.alpha < 5.0) throw std::domain_error("transmission_ode_oracle: domain too short");
  double kmax = std::sqrt(p * p + 2.0 * pot.mu * std::abs(pot.u0));
  double h = 2.0 * pi / (20.0 * kmax);
  if (step > 0.0) h = std::min(h, step);
  const double e = p * p / (2.0 * pot.mu);

  using State = std::array<double, 4>;  // re psi, im psi, re psi', im psi'
  auto rhs = [&](const State& y, State& dy, double x) {
    double f = 2.0 * pot.mu * (detail::potential_value(pot, x) - e);
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = f * y[0];
    dy[3] = f * y[1];
  };
  Complex psi = std::polar(1.0, p * l);
  Complex dpsi = Complex{0.0, p} * psi;
  State y{psi.real(), psi.imag(), dpsi.real(), dpsi.imag()};
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13);
  try {
    double x = l;
    // bounded steps, so that the controller never skips a wavelength
    while (x > -l) {
      double target = std::max(-l, x - 64.0 * h);
      ode::integrate_adaptive(stepper, rhs, y, x, target, -h);
      x = target;
      for (double v : y)
        if (!std::isfinite(v)) throw numerical_error("oracles", "ODE solution overflowed");
    }
  } catch (const numerical_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw numerical_error("oracles", std::string("ODE integration failed: ") + ex.what());
  }
  Complex ps{y[0], y[1]}, dps{y[2], y[3]};
  // psi = A e^{ipx} + B e^{-ipx} at x = -L
  Complex a = 0.5 * (ps + dps / Complex{0.0, p}) * std::polar(1.0, p * l);
  if (a == Complex{}) throw numerical_error("oracles", "incident amplitude vanished");
  return 1.0 / a;
}

inline OracleReport transmission_oracle_report(const EckartPotential& pot, double p, double domain_half_width = 0.0,
                                               double step = 0.0) {
  Complex o = transmission_ode_oracle(pot, p, domain_half_width, step);
  Complex t = transmission_value(pot, p);
  double l = domain_half_width > 0.0 ? domain_half_width : 30.0 / pot.alpha;
  double h = 2.0 * pi / (20.0 * std::sqrt(p * p + 2.0 * pot.mu * std::abs(pot.u0)));
  if (step > 0.0) h = std::min(h, step);
  std::ostringstream q, r;
  q.precision(10);
  r.precision(6);
  q << "T(p=" << p << " U0=" << pot.u0 << ")";
  r << "L=" << l << " max_step=" << h << " tol=1e-13";
  return OracleReport::make(q.str(), t, o, r.str());
}

struct SplitStepOptions {
  double dt = 0.0;             // 0: from the largest kinetic phase
  std::size_t n_points = 0;    // 0: from the momentum content
  double box_half_width = 0.0; // 0: from packet and output grid
  bool absorb = true;          // cos^2 mask over the outer 10%
  double reflection_threshold = 1e-6;
  double pre_roll = -1.0;      // free back-propagation time; < 0: automatic
  double post_roll = -1.0;     // extra interacting time undone freely at the end; < 0: automatic
};

struct SplitStepRun {
  WaveField field;
  double initial_norm = 0.0;
  double final_norm = 0.0;      // on the box, before any mask loss if absorb is off
  double boundary_fraction = 0.0;  // norm inside the mask zone at the end, relative to the total
  std::size_t n_points = 0;
  double dt = 0.0;
  double pre_roll = 0.0;
  double post_roll = 0.0;
  long steps = 0;
};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

// Strang splitting exp(-iV dt/2) exp(-iK dt) exp(-iV dt/2), kinetic part by FFT;
// evolution runs from -pre_roll to t + post_roll from the free packet, then back to t without the potential
inline SplitStepRun split_step_run(const EckartPotential& pot, const GaussianPacket& pk,
                                   const std::vector<double>& grid, double t, const SplitStepOptions& opt = {}) {
  pot.validate();
  pk.validate();
  if (!(t >= 0.0)) throw std::domain_error("split_step_oracle: need t >= 0");
  if (grid.empty()) throw std::domain_error("split_step_oracle: empty output grid");
  double gmin = *std::min_element(grid.begin(), grid.end());
  double gmax = *std::max_element(grid.begin(), grid.end());
  const double v0 = pk.p0 / pot.mu;
  const double e0 = pk.p0 * pk.p0 / (2.0 * pot.mu);
  // pre-roll: start from the free packet at -tau, where V at its leading edge is below 1e-12 E0
  double tau = opt.pre_roll;
  if (tau < 0.0) {
    double clear = pot.is_free() ? 0.0 : 0.5 * std::log(std::max(1.0, 4.0 * std::abs(pot.u0) / (1e-12 * e0))) / pot.alpha;
    tau = 0.0;
    for (int it = 0; it < 60; ++it) {
      double w = std::abs(Complex{pk.dx() * pk.dx(), -2.0 * tau / pot.mu}) / pk.dx();
      if (pk.x0 - v0 * tau + 8.0 * w <= -clear) break;
      tau += std::max(0.5 * clear / v0, 1e-3 * t);
    }
  }
  // post-roll: run on until the transmitted packet has left the potential, then undo the extra time freely
  double tau2 = opt.post_roll;
  if (tau2 < 0.0) {
    double clear = pot.is_free() ? 0.0 : 0.5 * std::log(std::max(1.0, 4.0 * std::abs(pot.u0) / (1e-12 * e0))) / pot.alpha;
    tau2 = 0.0;
    for (int it = 0; it < 60; ++it) {
      double ta = t + tau2;
      double w = std::abs(Complex{pk.dx() * pk.dx(), 2.0 * ta / pot.mu}) / pk.dx();
      if (pk.x0 + v0 * ta - 8.0 * w >= clear) break;
      tau2 += std::max(0.5 * clear / v0, 1e-3 * t);
    }
  }
  const double total = t + tau + tau2;
  double w0 = std::abs(Complex{pk.dx() * pk.dx(), -2.0 * tau / pot.mu}) / pk.dx();
  double w1 = std::abs(Complex{pk.dx() * pk.dx(), 2.0 * (t + tau2) / pot.mu}) / pk.dx();
  double b = opt.box_half_width;
  if (b <= 0.0) {
    double reach = std::max({std::abs(pk.x0 - v0 * tau) + 10.0 * w0, std::abs(pk.x0 + v0 * (t + tau2)) + 10.0 * w1,
                             std::abs(gmin), std::abs(gmax), 10.0 / pot.alpha});
    b = reach / 0.85;
  }
  double kmax = std::sqrt(std::pow(std::abs(pk.p0) + 10.0 * pk.dp, 2) + 2.0 * pot.mu * std::max(0.0, -pot.u0));
  std::size_t n = opt.n_points;
  if (n == 0) {
    double need = 2.0 * b * 1.25 * kmax / pi;
    n = 256;
    while (static_cast<double>(n) < need) n *= 2;
  }
  double dx = 2.0 * b / static_cast<double>(n);
  double dt = opt.dt;
  if (dt <= 0.0) dt = 1.0 / (kmax * kmax / (2.0 * pot.mu) + std::abs(pot.u0));
  long steps = std::max<long>(1, static_cast<long>(std::ceil((total - tau2) / dt)));
  long steps2 = tau2 > 0.0 ? std::max<long>(1, static_cast<long>(std::ceil(tau2 / dt))) : 0;
  dt = (total - tau2) / static_cast<double>(steps);
  const double dt2 = steps2 > 0 ? tau2 / static_cast<double>(steps2) : 0.0;

  std::vector<double> x(n), k(n), mask(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = -b + dx * static_cast<double>(j);
    long jj = j < n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
    k[j] = 2.0 * pi * static_cast<double>(jj) / (2.0 * b);
  }
  const double edge = 0.1 * b;
  std::vector<bool> in_zone(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    double d = b - std::abs(x[j]);
    if (d < edge) {
      in_zone[j] = true;
      if (opt.absorb) {
        double c = std::cos(0.5 * pi * (edge - d) / edge);
        mask[j] = std::pow(c * c, 0.02);
      }
    }
  }
  if (opt.absorb && (gmin < -b + edge || gmax > b - edge))
    throw std::domain_error("split_step_oracle: output grid reaches the absorbing layer");

  std::vector<Complex> psi(n), half_v(n), kin(n);
  for (std::size_t j = 0; j < n; ++j) psi[j] = std::exp(free_packet_log(pk, pot.mu, x[j], -tau));
  auto norm = [&] {
    double s = 0.0;
    for (const auto& v : psi) s += std::norm(v);
    return s * dx;
  };
  SplitStepRun run;
  run.initial_norm = norm();
  run.n_points = n;
  run.dt = dt;
  run.pre_roll = tau;
  run.post_roll = tau2;
  run.steps = steps + steps2;

  auto* data = reinterpret_cast<fftw_complex*>(psi.data());
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lk(detail::fftw_plan_mutex());
    fwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(n), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  auto evolve = [&](long count, double h) {
    for (std::size_t j = 0; j < n; ++j) {
      half_v[j] = std::polar(1.0, -0.5 * h * detail::potential_value(pot, x[j]));
      kin[j] = std::polar(inv_n, -h * k[j] * k[j] / (2.0 * pot.mu));
    }
    for (long s = 0; s < count; ++s) {
      for (std::size_t j = 0; j < n; ++j) psi[j] *= half_v[j];
      fftw_execute(fwd);
      for (std::size_t j = 0; j < n; ++j) psi[j] *= kin[j];
      fftw_execute(bwd);
      for (std::size_t j = 0; j < n; ++j) psi[j] *= half_v[j] * mask[j];
    }
  };
  evolve(steps, dt);
  evolve(steps2, dt2);
  run.final_norm = norm();
  double zone = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (in_zone[j]) zone += std::norm(psi[j]) * dx;
  run.boundary_fraction = run.final_norm > 0.0 ? zone / run.final_norm : 0.0;

  // free evolution back by the post-roll, in momentum space
  fftw_execute(fwd);
  {
    std::lock_guard<std::mutex> lk(detail::fftw_plan_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  for (std::size_t j = 0; j < n; ++j) psi[j] *= std::polar(1.0, tau2 * k[j] * k[j] / (2.0 * pot.mu));
  std::vector<Complex> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Complex acc{};
    double xr = grid[g] + b;
    for (std::size_t j = 0; j < n; ++j)
      if (psi[j] != Complex{}) acc += psi[j] * std::polar(1.0, k[j] * xr);
    out[g] = acc * inv_n;
  }
  std::vector<Complex> logs(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) logs[g] = detail::log_value(out[g]);
  run.field = detail::make_field(grid, logs, t);

  if (opt.absorb && run.boundary_fraction > opt.reflection_threshold)
    throw numerical_error("oracles", "split-step field reaches the absorbing layer (fraction " +
                                         std::to_string(run.boundary_fraction) + "); enlarge the box");
  return run;
}

inline WaveField split_step_oracle(const EckartPotential& pot, const GaussianPacket& pk, const std::vector<double>& grid,
                                   double t, double dt = 0.0) {
  SplitStepOptions opt;
  opt.dt = dt;
  return split_step_run(pot, pk, grid, t, opt).field;
}

inline double relative_l2(const WaveField& a, const WaveField& ref) {
  if (a.values.size() != ref.values.size()) throw std::domain_error("relative_l2: grids differ");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    num += std::norm(a.at(j) - ref.at(j));
    den += std::norm(ref.at(j));
  }
  if (!(den > 0.0)) throw std::domain_error("relative_l2: zero reference");
  return std::sqrt(num / den);
}

}  // namespace eckart
