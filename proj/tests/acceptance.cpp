#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "eckart/delay.hpp"
#include "eckart/figures.hpp"
#include "eckart/oracles.hpp"
#include "eckart/poles.hpp"
#include "eckart/scenario.hpp"
#include "eckart/transmission.hpp"
#include "eckart/wavepacket.hpp"

using namespace eckart;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel_l2(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - b[j]);
    den += std::norm(b[j]);
  }
  return std::sqrt(num / den);
}

double u0_for_s(double s) { return -0.5 * s * (s + 1.0); }

Verdict c1() {
  Complex a = EckartPotential::dimensionless(-861.0).s();
  Complex b = EckartPotential::dimensionless(-15.0).s();
  Complex c = EckartPotential::dimensionless(1.0).s();
  Complex d = EckartPotential::dimensionless(2485.0).s();
  bool ok = a == Complex{41.0, 0.0} && b == Complex{5.0, 0.0} && std::abs(c - Complex{-0.5, 1.3229}) < 1e-3 &&
            std::abs(d.imag() - 70.50) <= 0.05;
  return {ok, fmt("s = %.0f, %.0f, -0.5%+.4fi, Im s = %.4f", a.real(), b.real(), c.imag(), d.imag())};
}

Verdict c2() {
  double a = classical_shift(EckartPotential::dimensionless(-2e4), 200.0).real();
  double b = classical_shift(EckartPotential::dimensionless(1e5), 700.0).real();
  double c = classical_shift(EckartPotential::dimensionless(1e4), 50.0).real();
  bool ok = std::abs(a - 0.6619) <= 5e-4 && std::abs(b + 0.5392) <= 5e-4 && std::abs(c - 0.8515) <= 1e-3;
  return {ok, fmt("alpha x' = %.4f (0.6619), %.4f (-0.5392), Re %.4f (0.8515)", a, b, c)};
}

Verdict c3() {
  auto r = reproduce_figure("fig2c");
  double amp = 0.0, dens = 0.0;
  for (const auto& kv : r.summary) {
    if (kv.first == "log10_max_abs_psi_T") amp = kv.second;
    if (kv.first == "log10_max_density_T") dens = kv.second;
  }
  return {std::abs(amp + 221.0) <= 2.0, fmt("log10 max|psi_T| = %.2f (log10 max|psi_T|^2 = %.2f)", amp, dens)};
}

Verdict c4() {
  double worst = 0.0;
  for (int m = 1; m <= 6; ++m) {
    auto pot = EckartPotential::dimensionless(u0_for_s(m));
    for (int j = 1; j <= 100; ++j) worst = std::max(worst, std::abs(std::abs(transmission_value(pot, 0.05 * j)) - 1.0));
  }
  return {worst < 1e-10, fmt("max ||T|-1| = %.2e over s = 1..6, 100 momenta", worst)};
}

Verdict c5() {
  double worst = 0.0;
  for (double u : {-861.0, -15.0, -3.7, -0.5, 0.05, 1.0, 30.0, 2485.0, 1e4})
    for (double p : {0.01, 0.3, 1.5, 7.0, 49.0, 333.0})
      worst = std::max(worst, transmission_symmetry_check(EckartPotential::dimensionless(u), p));
  return {worst < 1e-12, fmt("max |T(-p*) - T*(p)| = %.2e", worst)};
}

Verdict c6() {
  auto pot = EckartPotential::dimensionless(1.0);
  Complex te = transmission_value(pot, 1.5);
  double e[3];
  int k = 0;
  for (int n : {1, 4, 15}) e[k++] = std::abs(pole_sum_transmission(pot, 1.5, n).value - te) / std::abs(te);
  bool ok = e[2] < 1e-3 && e[0] > e[1] && e[1] > e[2];
  return {ok, fmt("relative error with 2, 8, 30 poles: %.2e, %.2e, %.2e", e[0], e[1], e[2])};
}

Verdict c7() {
  auto pot = EckartPotential::dimensionless(1e4);
  Complex r{};
  for (const auto& p : enumerate_poles(pot, 51))
    if (p.kind == PoleKind::I && p.n == 50) r = p.residue;
  double v = std::abs(2.0 * pi * r / pot.alpha + 1.0);
  return {v < 0.02, fmt("|2 pi Res(k_50)/alpha + 1| = %.3e", v)};
}

Verdict c8() {
  std::vector<double> g;
  for (int j = 0; j < 400; ++j) g.push_back(-5.0 + (j + 0.5) * 0.025);
  double worst = 0.0;
  for (auto [u, p] : std::vector<std::pair<double, double>>{{1.0, 1.5}, {1e4, 50.0}}) {
    auto pot = EckartPotential::dimensionless(u);
    worst = std::max(worst, rel_l2(eta_pole(pot, p, g).eta_smooth, eta_spectral(pot, p, g).eta_smooth));
  }
  return {worst < 1e-3, fmt("max relative L2 (pole vs spectral) = %.2e", worst)};
}

Verdict c9() {
  double d = com_delay_exact(EckartPotential::dimensionless(-15.0), {0.5, 0.1, -100.0}, 650.0);
  auto pot = EckartPotential::dimensionless(-15.0);
  GaussianPacket pk{0.5, 0.1, -100.0};
  auto g = default_grid(pot, pk, 650.0, 8192);
  double f = com_delay(pot, pk, g, 650.0);
  return {std::abs(d - 4.0768) <= 0.01 && std::abs(f - 4.0768) <= 0.01,
          fmt("delta x_COM = %.5f (momentum form), %.5f (field moment)", d, f)};
}

Verdict c10() {
  std::vector<std::pair<double, double>> pts{{-15.0, 0.5}, {-15.0, 2.0},  {-2.3, 0.7},  {-2.3, 3.0},  {-861.0, 5.0},
                                             {-861.0, 40.0}, {-2e4, 200.0}, {-0.3, 0.2},  {0.05, 0.5},  {0.05, 2.0},
                                             {1.0, 0.5},    {1.0, 1.5},    {0.1, 0.05},  {0.3, 1.0},   {2.0, 1.0},
                                             {30.0, 4.0},   {30.0, 9.0},   {100.0, 16.0}, {1e4, 150.0}, {1e5, 700.0}};
  double worst = 0.0;
  for (auto [u, p] : pts)
    worst = std::max(worst, transmission_oracle_report(EckartPotential::dimensionless(u), p).rel_error);
  double ss[2];
  int k = 0;
  for (auto [u, p, t] : std::vector<std::tuple<double, double, double>>{{-2e4, 200.0, 0.04}, {1e5, 700.0, 0.012}}) {
    Scenario sc;
    sc.pot = EckartPotential::dimensionless(u);
    sc.packet = {p, 6.67, -4.0};
    sc.t = t;
    auto reps = oracle_reports(sc, 1, true);
    ss[k++] = reps.back().rel_error;
  }
  bool ok = worst < 1e-6 && ss[0] < 1e-3 && ss[1] < 1e-3;
  return {ok, fmt("ODE max rel error %.2e at 20 points; split-step L2 %.2e (2a), %.2e (2b)", worst, ss[0], ss[1])};
}

Verdict c11() {
  auto a = reproduce_figure("fig5a");
  auto b = reproduce_figure("fig7");
  double ea = a.checks.front().value, eb = b.checks.front().value;
  auto count = [](const RunResult& r) {
    double c = 0.0, n = 0.0;
    for (const auto& kv : r.summary) {
      if (kv.first == "sweep_points_beyond_2pct") c = kv.second;
      if (kv.first == "sweep_points_compared") n = kv.second;
    }
    return std::make_pair(c, n);
  };
  auto [ca, na] = count(a);
  auto [cb, nb] = count(b);
  return {ea <= 0.02 && eb <= 0.02,
          fmt("worst rel. deviation %.3f (well, %.0f of %.0f beyond 2%%), ", ea, ca, na) +
              fmt("%.3f (barrier, %.0f of %.0f beyond 2%%)", eb, cb, nb)};
}

Verdict c12() {
  GaussianPacket pk{0.005, 0.001, -3000.0};
  const double t = 2e6, p0 = pk.p0;
  auto extreme = [&](double a, double b) {
    double best = 0.0, at = 0.0;
    for (int i = 0; i <= 120; ++i) {
      double s = a + (b - a) * i / 120.0;
      auto pot = EckartPotential::dimensionless(u0_for_s(s));
      double d = com_delay_exact(pot, pk, t) - filtered_velocity_shift(pot, pk) * t;
      if (std::abs(d) > std::abs(best)) {
        best = d;
        at = s;
      }
    }
    return std::make_pair(best, at);
  };
  auto [wv, ws] = extreme(1.0005, 1.03);
  auto [bv, bs] = extreme(-0.03, -0.0005);
  double q = 0.001, rb = 0.0, rs = 0.0;
  for (int i = 1; i <= 400; ++i) {
    double s = 1.0 + 0.02 * (i - 200.5) / 200.0;
    double r = effective_range(EckartPotential::dimensionless(u0_for_s(s)), q);
    if (r > rb) {
      rb = r;
      rs = s;
    }
  }
  auto near = [](double v, double ref) { return std::abs(v / ref - 1.0) <= 0.2; };
  bool ok = near(std::abs(wv), 0.5 / p0) && near(ws - 1.0, p0) && near(std::abs(bv), 0.5 / p0) &&
            near(std::abs(bs), p0) && near(rb, 1.0 / q) && near(std::abs(rs - 1.0), q);
  return {ok, fmt("well %.1f at s-1=%.4f, barrier %.1f at s=%.4f", wv, ws - 1.0, bv, bs) +
                  fmt(" (1/2p0 = %.0f); R peak %.0f at |s-1| = %.4f", 0.5 / p0, rb, std::abs(rs - 1.0))};
}

Verdict c13() {
  auto graded = [](double l, double h) {
    std::vector<double> pos;
    for (double x = 1e-8; x < 0.2; x *= 1.003) pos.push_back(x);
    for (double x = 0.2; x <= l; x += h) pos.push_back(x);
    std::vector<double> g;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
    g.push_back(0.0);
    g.insert(g.end(), pos.begin(), pos.end());
    return g;
  };
  double worst = 0.0;
  int used = 0;
  for (auto [u, p] : std::vector<std::pair<double, double>>{
           {1.0, 1.5}, {1.0, 0.7}, {-2.3, 0.7}, {-15.0, 1.0}, {0.05, 0.5}, {30.0, 7.0}, {-3.0, 2.0}}) {
    auto pot = EckartPotential::dimensionless(u);
    Complex t = transmission_value(pot, p);
    if (std::abs(t) <= 1e-6) continue;
    double gap = 1e300;
    for (const auto& pl : enumerate_poles(pot, 4)) gap = std::min(gap, std::abs(pl.position.imag()));
    Complex s = sum_rule(eta_spectral(pot, p, graded(std::max(40.0, 20.0 / gap), 0.002)));
    worst = std::max(worst, std::abs(s - t) / std::abs(t));
    ++used;
  }
  return {worst < 1e-3, fmt("max relative sum-rule defect %.2e over %.0f cases", worst, used)};
}

Verdict c14() {
  std::vector<double> g;
  for (int j = 0; j <= 64000; ++j) g.push_back(-8000.0 + 0.25 * j);
  double worst = 0.0;
  std::string cases;
  for (auto [e1, e2] : std::vector<std::pair<Complex, Complex>>{
           {{1.0, 0.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.5, 0.5}}, {{1.0, 0.0}, {-99.0 / 98.0, 0.0}}}) {
    auto d = double_slit_demo(e1, e2, 1e3, g);
    double want = ((e1 + 2.0 * e2) / (e1 + e2)).real();
    worst = std::max(worst, std::abs(d.mean_x / want - 1.0));
    cases += fmt(" %.3f/%.3f", d.mean_x, want);
  }
  return {worst <= 0.05, "pointer mean / broad limit:" + cases};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Verdict()>>> crit{
      {"s-parameter identities", c1},
      {"classical shift values", c2},
      {"tunnelling magnitude", c3},
      {"transparency at integer s", c4},
      {"symmetry T(-p*) = T*(p)", c5},
      {"pole-sum convergence", c6},
      {"residue asymptote", c7},
      {"eta route equivalence", c8},
      {"COM delay", c9},
      {"oracle equivalence", c10},
      {"broad-packet phase-time law", c11},
      {"near-threshold extremes", c12},
      {"sum rule", c13},
      {"broad pointer demo", c14}};
  int failed = 0;
  auto t_all = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < crit.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = crit[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("%s %2zu %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", i + 1, crit[i].first.c_str(),
                v.detail.c_str(), dt);
    std::fflush(stdout);
  }
  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all).count();
  std::printf("%d of %zu criteria pass [%.1fs]\n", static_cast<int>(crit.size()) - failed, crit.size(), total);
  return failed == 0 ? 0 : 1;
}
