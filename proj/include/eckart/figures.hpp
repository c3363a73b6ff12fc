#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "eckart/scenario.hpp"

namespace eckart {

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> v{"fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig3a", "fig3b",
                                          "fig4a", "fig4b", "fig5",  "fig5a", "fig6",  "fig7",  "fig8"};
  return v;
}

namespace detail {

inline Scenario preset(double u0_bar, double p0, double dp, double x0, double t, ToleranceProfile profile) {
  Scenario sc;
  sc.pot = EckartPotential::dimensionless(u0_bar);
  sc.packet = {p0, dp, x0};
  sc.t = t;
  sc.profile = profile;
  return sc;
}

inline double log10_peak(const WaveField& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return (std::log(m) + f.log_scale) / std::log(10.0);
}

// U0 for a dimensionless potential with real s
inline double u0_for_s(double s) { return -0.5 * s * (s + 1.0); }

inline void add_packets(RunResult& res, const Scenario& sc, const std::vector<double>& g, const WaveField& tr) {
  res.files.push_back({"packet_free.csv", field_csv(free_packet(sc.packet, g, sc.t, sc.pot.mu))});
  res.files.push_back({"packet_transmitted.csv", field_csv(tr)});
}

inline void fig2_packet(RunResult& res, const Scenario& sc, double shift, double shift_tol, bool real_part) {
  auto g = default_grid(sc.pot, sc.packet, sc.t, packet_points(sc));
  auto tr = transmitted_quadrature(sc.pot, sc.packet, g, sc.t);
  add_packets(res, sc, g, tr);
  Complex sh = classical_shift(sc.pot, sc.packet.p0) * sc.pot.alpha;
  res.checks.push_back(make_check(real_part ? "re_alpha_shift" : "alpha_shift", sh.real(), shift, shift_tol));
  res.summary.emplace_back("log10_max_abs_psi_T", log10_peak(tr));
}

inline void fig2_eta(RunResult& res, const Scenario& sc, double x_lo, double x_hi, std::size_t n) {
  auto xs = linspace(x_lo, x_hi, n);
  auto d = eta_spectral(sc.pot, sc.packet.p0, xs);
  auto avg = running_average(d, pi / sc.packet.p0);
  auto os = csv_stream();
  write_delay_csv(os, d, avg);
  res.files.push_back({"eta.csv", os.str()});
}

inline double sweep_agreement(RunResult& res, const std::vector<ComRow>& rows) {
  double worst = 0.0;
  std::size_t used = 0, bad = 0;
  for (const auto& r : rows) {
    if (!(std::abs(r.com) > 0.1)) continue;
    ++used;
    double e = std::abs(r.prediction - r.com) / std::abs(r.com);
    if (e > 0.02) ++bad;
    worst = std::max(worst, e);
  }
  res.summary.emplace_back("sweep_points_compared", static_cast<double>(used));
  res.summary.emplace_back("sweep_points_beyond_2pct", static_cast<double>(bad));
  return worst;
}

inline RunResult fig_sweep(double u_lo, double u_hi, ToleranceProfile profile, int threads) {
  RunResult res;
  auto sc = preset(-1.0, 0.005, 0.001, -3000.0, 2e6, profile);
  sc.u_min = u_lo;
  sc.u_max = u_hi;
  sc.u_points = profile == ToleranceProfile::strict ? 800 : 400;
  auto rows = com_sweep(sc, threads);
  res.files.push_back(com_sweep_csv(rows));
  double worst = sweep_agreement(res, rows);
  res.checks.push_back(make_check("phase_time_law_max_rel_error", worst, 0.0, 0.02));
  return res;
}

}  // namespace detail

inline RunResult reproduce_figure(const std::string& name, ToleranceProfile profile = ToleranceProfile::fast,
                                  int threads = 1) {
  const auto& names = figure_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw config_error("unknown figure '" + name + "'; valid names: " + list);
  }
  using detail::preset;
  RunResult res;
  Scenario sc;
  bool summary = true;

  if (name == "fig2a" || name == "fig2d") {
    sc = preset(-2e4, 200.0, 6.67, -4.0, 0.04, profile);
    if (name == "fig2a")
      detail::fig2_packet(res, sc, 0.6619, 5e-4, false);
    else
      detail::fig2_eta(res, sc, -1.0, 1.0, profile == ToleranceProfile::strict ? 8001 : 2001);
  } else if (name == "fig2b" || name == "fig2e") {
    sc = preset(1e5, 700.0, 6.67, -4.0, 0.012, profile);
    if (name == "fig2b")
      detail::fig2_packet(res, sc, -0.5392, 5e-4, false);
    else
      detail::fig2_eta(res, sc, -1.0, 1.0, profile == ToleranceProfile::strict ? 16001 : 4001);
  } else if (name == "fig2c" || name == "fig2f") {
    sc = preset(1e4, 50.0, 3.64, -4.0, 0.17, profile);
    if (name == "fig2c") {
      detail::fig2_packet(res, sc, 0.8515, 1e-3, true);
      double dp0 = filtered_velocity_shift(sc.pot, sc.packet) * sc.pot.mu;
      GaussianPacket shifted{sc.packet.p0 + dp0, sc.packet.dp, sc.packet.x0};
      auto g = default_grid(sc.pot, sc.packet, sc.t, detail::packet_points(sc));
      res.files.push_back({"packet_free_shifted.csv", detail::field_csv(free_packet(shifted, g, sc.t, sc.pot.mu))});
      double amp = res.summary.back().second;
      res.summary.emplace_back("delta_p0", dp0);
      res.summary.emplace_back("log10_max_density_T", 2.0 * amp);
      res.checks.push_back(make_check("log10_max_abs_psi_T_plus_221", amp + 221.0, 0.0, 2.0));
    } else {
      detail::fig2_eta(res, sc, -2.0, 2.0, profile == ToleranceProfile::strict ? 8001 : 2001);
    }
  } else if (name == "fig3a") {
    sc = preset(10.0, 1.0, 0.1, -100.0, 0.0, profile);
    res.files.push_back(pole_table_csv(sc.pot, 20));
  } else if (name == "fig3b") {
    sc = preset(detail::u0_for_s(2.25), 1.0, 0.1, -100.0, 0.0, profile);
    res.files.push_back(pole_table_csv(sc.pot, 20));
    res.checks.push_back(make_check("bound_states", bound_state_count(sc.pot).bound, 3.0, 0.0));
  } else if (name == "fig4a" || name == "fig4b") {
    bool well = name == "fig4a";
    sc = preset(well ? -861.0 : 2485.0, 1.0, 0.1, -100.0, 0.0, profile);
    auto poles = enumerate_poles(sc.pot, well ? 41 : 50);
    auto os = detail::csv_stream();
    write_pole_table(os, poles);
    res.files.push_back({"residues.csv", os.str()});
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& p : poles) top = std::max(top, p.log_residue.log_mag / std::log(10.0));
    res.summary.emplace_back("log10_max_abs_residue", top);
    if (well)
      res.checks.push_back(make_check("s", sc.pot.s().real(), 41.0, 1e-9));
    else
      res.checks.push_back(make_check("im_s", sc.pot.s().imag(), 70.50, 0.05));
  } else if (name == "fig5") {
    sc = preset(-15.0, 0.5, 0.1, -100.0, 650.0, profile);
    auto g = default_grid(sc.pot, sc.packet, sc.t, detail::packet_points(sc));
    auto tr = transmitted_quadrature(sc.pot, sc.packet, g, sc.t);
    auto fr = free_packet(sc.packet, g, sc.t, sc.pot.mu);
    auto os = detail::csv_stream();
    write_density_difference_csv(os, tr, fr);
    res.files.push_back({"density_difference.csv", os.str()});
    res.checks.push_back(make_check("com_delay", com_delay_exact(sc.pot, sc.packet, sc.t), 4.0768, 0.01));
  } else if (name == "fig5a") {
    res = detail::fig_sweep(-3.0, -3.0 / 400.0, profile, threads);
    summary = false;
  } else if (name == "fig7") {
    res = detail::fig_sweep(0.125 / 400.0, 0.125, profile, threads);
    summary = false;
  } else if (name == "fig6") {
    sc = preset(1.0, 1.5, 0.1, -100.0, 500.0, profile);
    auto g = default_grid(sc.pot, sc.packet, sc.t, detail::packet_points(sc));
    auto tr = transmitted_quadrature(sc.pot, sc.packet, g, sc.t);
    detail::add_packets(res, sc, g, tr);
    for (int n : {2, 8, 30}) {
      auto pf = transmitted_pole_form(sc.pot, sc.packet, g, sc.t, n);
      res.files.push_back({"packet_poles_" + std::to_string(n) + ".csv", detail::field_csv(pf)});
      res.summary.emplace_back("rel_l2_poles_" + std::to_string(n), relative_l2(pf, tr));
    }
    res.files.push_back(pole_table_csv(sc.pot, 25, 1e-8, "residues.csv"));
    sc.x_min = -20.0;
    sc.x_max = 5.0;
    sc.x_points = 1001;
    res.files.push_back(eta_csv(sc));
    res.checks.push_back(make_check("im_s", sc.pot.s().imag(), 1.3229, 1e-3));
    Complex te = transmission_value(sc.pot, sc.packet.p0);
    auto ps = pole_sum_transmission(sc.pot, sc.packet.p0, 15);
    res.checks.push_back(make_check("pole_sum_rel_error_30", std::abs(ps.value - te) / std::abs(te), 0.0, 1e-3));
  } else if (name == "fig8") {
    const double p0 = 0.001;
    auto os = detail::csv_stream();
    os << "# p0=" << p0 << "\n";
    os << "s,effective_range,approximation\n";
    double best = 0.0, at = 0.0;
    for (const auto& s : detail::linspace(0.9, 1.1, profile == ToleranceProfile::strict ? 4001 : 801)) {
      if (s == 1.0) continue;
      auto pot = EckartPotential::dimensionless(detail::u0_for_s(s));
      double r = effective_range(pot, p0);
      os << s << ',' << r << ',' << std::sqrt(2.0 / (p0 * std::abs(s - 1.0))) << '\n';
      if (r > best) {
        best = r;
        at = s;
      }
    }
    res.files.push_back({"effective_range.csv", os.str()});
    res.summary.emplace_back("peak_s_minus_1", at - 1.0);
    res.checks.push_back(make_check("peak_effective_range_p0", best * p0, 1.0, 0.2));
    res.checks.push_back(make_check("peak_abs_s_minus_1_over_p0", std::abs(at - 1.0) / p0, 1.0, 0.2));
    summary = false;
  }
  if (summary) {
    RunResult tmp;
    add_summary(tmp, sc);
    res.summary.insert(res.summary.begin(), tmp.summary.begin(), tmp.summary.end());
    res.notes.insert(res.notes.end(), tmp.notes.begin(), tmp.notes.end());
  }
  return res;
}

}  // namespace eckart
