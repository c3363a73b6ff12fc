#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eckart/delay.hpp"
#include "eckart/oracles.hpp"
#include "eckart/poles.hpp"
#include "eckart/potential.hpp"
#include "eckart/transmission.hpp"
#include "eckart/wavepacket.hpp"

namespace eckart {

// bad configuration or usage; maps to exit code 2
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ToleranceProfile { fast, strict };

inline ToleranceProfile parse_profile(const std::string& s) {
  if (s == "fast") return ToleranceProfile::fast;
  if (s == "strict") return ToleranceProfile::strict;
  throw config_error("tolerance profile must be 'fast' or 'strict', got '" + s + "'");
}

struct Scenario {
  EckartPotential pot;
  GaussianPacket packet{1.0, 0.1, -100.0};
  double t = 0.0;
  std::vector<std::string> computations;

  std::size_t packet_points = 0;  // 0: from the profile
  double p_min = 0.05, p_max = 5.0;
  std::size_t p_points = 200;
  double x_min = -5.0, x_max = 5.0;
  std::size_t x_points = 401;
  std::string eta_route = "spectral";
  double average_window = 0.0;  // 0: pi/p0
  int poles = 30;
  double u_min = 0.0, u_max = 0.0;
  std::size_t u_points = 0;
  ToleranceProfile profile = ToleranceProfile::fast;
  double merge_tol = 1e-8;  // in units of alpha
};

inline const std::vector<std::string>& known_computations() {
  static const std::vector<std::string> v{"transmission_sweep", "pole_table", "eta",
                                          "packet", "com_sweep", "oracle"};
  return v;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class ConfigReader {
 public:
  explicit ConfigReader(const boost::property_tree::ptree& pt) : pt_(pt) {}

  bool has(const std::string& key) const { return static_cast<bool>(pt_.get_optional<std::string>(key)); }

  std::string text(const std::string& key) const {
    auto v = pt_.get_optional<std::string>(key);
    if (!v) throw config_error(key + ": missing");
    return trim(*v);
  }

  double real(const std::string& key) const {
    std::string v = text(key);
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      throw config_error(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size()) throw config_error(key + ": expected a number, got '" + v + "'");
    if (!std::isfinite(d)) throw config_error(key + ": must be finite");
    return d;
  }

  double real(const std::string& key, double def) const { return has(key) ? real(key) : def; }

  std::size_t count(const std::string& key, std::size_t def) const {
    if (!has(key)) return def;
    double d = real(key);
    if (d < 1.0 || d != std::floor(d)) throw config_error(key + ": expected a positive integer");
    return static_cast<std::size_t>(d);
  }

 private:
  const boost::property_tree::ptree& pt_;
};

}  // namespace detail

// [scenario] u0_bar | (u0, alpha, mu); p0, dp, x0, t; computations = a, b
// [grid] packet_points, p_min, p_max, p_points, x_min, x_max, x_points, eta_route, average_window, poles,
//        u_min, u_max, u_points
// [tolerances] profile, merge_tol
inline Scenario parse_scenario(std::istream& in, const std::string& source = "<config>") {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(in, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw config_error(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::map<std::string, std::vector<std::string>> allowed{
      {"scenario", {"u0_bar", "u0", "alpha", "mu", "p0", "dp", "x0", "t", "computations"}},
      {"grid",
       {"packet_points", "p_min", "p_max", "p_points", "x_min", "x_max", "x_points", "eta_route", "average_window",
        "poles", "u_min", "u_max", "u_points"}},
      {"tolerances", {"profile", "merge_tol"}}};
  for (const auto& sec : pt) {
    auto it = allowed.find(sec.first);
    if (it == allowed.end()) throw config_error(source + ": unknown section [" + sec.first + "]");
    for (const auto& kv : sec.second)
      if (std::find(it->second.begin(), it->second.end(), kv.first) == it->second.end())
        throw config_error(source + ": unknown key " + sec.first + "." + kv.first);
  }
  detail::ConfigReader r(pt);
  Scenario sc;
  try {
    bool bar = r.has("scenario.u0_bar");
    bool dim = r.has("scenario.u0") || r.has("scenario.alpha") || r.has("scenario.mu");
    if (bar && dim) throw config_error("scenario: u0_bar and u0/alpha/mu are mutually exclusive");
    if (bar) {
      sc.pot = EckartPotential::dimensionless(r.real("scenario.u0_bar"));
    } else if (dim) {
      sc.pot = EckartPotential{r.real("scenario.u0"), r.real("scenario.alpha"), r.real("scenario.mu")};
      if (!(sc.pot.alpha > 0.0)) throw config_error("scenario.alpha: must be positive");
      if (!(sc.pot.mu > 0.0)) throw config_error("scenario.mu: must be positive");
    } else {
      throw config_error("scenario: need u0_bar or u0, alpha, mu");
    }
    sc.packet.p0 = r.real("scenario.p0", sc.packet.p0);
    sc.packet.dp = r.real("scenario.dp", sc.packet.dp);
    sc.packet.x0 = r.real("scenario.x0", sc.packet.x0);
    sc.t = r.real("scenario.t", sc.t);
    if (!(sc.packet.p0 > 0.0)) throw config_error("scenario.p0: must be positive");
    if (!(sc.packet.dp > 0.0)) throw config_error("scenario.dp: must be positive");
    if (!(sc.packet.x0 < 0.0)) throw config_error("scenario.x0: must be negative");
    if (sc.t < 0.0) throw config_error("scenario.t: must be >= 0");

    std::string list = r.has("scenario.computations") ? r.text("scenario.computations") : "";
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (item.empty()) continue;
      const auto& k = known_computations();
      if (std::find(k.begin(), k.end(), item) == k.end())
        throw config_error("scenario.computations: unknown computation '" + item + "'");
      sc.computations.push_back(item);
    }
    if (sc.computations.empty()) throw config_error("scenario.computations: empty computation list");

    sc.packet_points = r.count("grid.packet_points", 0);
    sc.p_min = r.real("grid.p_min", sc.p_min);
    sc.p_max = r.real("grid.p_max", sc.p_max);
    sc.p_points = r.count("grid.p_points", sc.p_points);
    if (!(sc.p_min > 0.0 && sc.p_max > sc.p_min)) throw config_error("grid: need 0 < p_min < p_max");
    sc.x_min = r.real("grid.x_min", sc.x_min);
    sc.x_max = r.real("grid.x_max", sc.x_max);
    sc.x_points = r.count("grid.x_points", sc.x_points);
    if (!(sc.x_max > sc.x_min)) throw config_error("grid: need x_min < x_max");
    if (r.has("grid.eta_route")) sc.eta_route = r.text("grid.eta_route");
    if (sc.eta_route != "spectral" && sc.eta_route != "pole")
      throw config_error("grid.eta_route: must be 'spectral' or 'pole'");
    sc.average_window = r.real("grid.average_window", 0.0);
    sc.poles = static_cast<int>(r.count("grid.poles", 30));
    sc.u_min = r.real("grid.u_min", 0.0);
    sc.u_max = r.real("grid.u_max", 0.0);
    sc.u_points = r.count("grid.u_points", 0);
    if (std::find(sc.computations.begin(), sc.computations.end(), "com_sweep") != sc.computations.end() &&
        (sc.u_points == 0 || !(sc.u_max > sc.u_min)))
      throw config_error("grid: com_sweep needs u_min < u_max and u_points");
    if (r.has("tolerances.profile")) sc.profile = parse_profile(r.text("tolerances.profile"));
    sc.merge_tol = r.real("tolerances.merge_tol", sc.merge_tol);
    if (!(sc.merge_tol > 0.0)) throw config_error("tolerances.merge_tol: must be positive");
  } catch (const config_error& e) {
    throw config_error(source + ": " + e.what());
  }
  return sc;
}

struct Artifact {
  std::string name;
  std::string content;
};

struct Check {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

inline Check make_check(std::string name, double value, double expected, double tol, std::string note = {}) {
  return {std::move(name), value, expected, tol, std::abs(value - expected) <= tol, std::move(note)};
}

struct RunResult {
  std::vector<Artifact> files;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

// index-parallel loop; each job writes only its own slot
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  int w = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (w == 1) {
    for (std::size_t j = 0; j < n; ++j) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (;;) {
        std::size_t j = next++;
        if (j >= n || failed) return;
        try {
          body(j);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

namespace detail {

inline std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j)
    g[j] = n == 1 ? a : a + (b - a) * static_cast<double>(j) / static_cast<double>(n - 1);
  return g;
}

inline std::string field_csv(const WaveField& f) {
  auto os = csv_stream();
  write_field_csv(os, f);
  return os.str();
}

inline std::size_t packet_points(const Scenario& sc) {
  if (sc.packet_points) return sc.packet_points;
  return sc.profile == ToleranceProfile::strict ? 4096 : 1024;
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace detail

inline Artifact transmission_sweep_csv(const Scenario& sc, int threads, const std::string& name = "transmission.csv") {
  auto ps = detail::linspace(sc.p_min, sc.p_max, sc.p_points);
  std::vector<Complex> lt(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t j) {
    lt[j] = sc.pot.is_free() ? Complex{} : ln_transmission(sc.pot, ps[j]);
  });
  auto os = detail::csv_stream();
  os << "# U0=" << sc.pot.u0 << " alpha=" << sc.pot.alpha << " mu=" << sc.pot.mu << "\n";
  os << "p,re_T,im_T,abs_T,ln_abs_T,arg_T\n";
  for (std::size_t j = 0; j < ps.size(); ++j) {
    Complex t = std::exp(lt[j]);
    os << ps[j] << ',' << t.real() << ',' << t.imag() << ',' << std::abs(t) << ',' << lt[j].real() << ','
       << wrap_phase(lt[j].imag()) << '\n';
  }
  return {name, os.str()};
}

inline Artifact pole_table_csv(const EckartPotential& pot, int n, double merge_tol = 1e-8,
                               const std::string& name = "poles.csv") {
  auto os = detail::csv_stream();
  if (pot.is_free()) {
    os << "n,kind,order,re_k,im_k,re_res,im_res,log10_abs_res\n";
  } else {
    PoleOptions opt;
    opt.merge_tol = merge_tol;
    write_pole_table(os, enumerate_poles(pot, n, opt));
  }
  return {name, os.str()};
}

inline DelayDistribution eta_for(const Scenario& sc, const std::vector<double>& xs) {
  if (sc.eta_route == "pole") return eta_pole(sc.pot, sc.packet.p0, xs);
  return eta_spectral(sc.pot, sc.packet.p0, xs);
}

inline Artifact eta_csv(const Scenario& sc, const std::string& name = "eta.csv") {
  auto xs = detail::linspace(sc.x_min, sc.x_max, sc.x_points);
  auto d = eta_for(sc, xs);
  double y = sc.average_window > 0.0 ? sc.average_window : pi / sc.packet.p0;
  auto avg = running_average(d, y);
  auto os = detail::csv_stream();
  write_delay_csv(os, d, avg);
  return {name, os.str()};
}

struct ComRow {
  double u0, s_re, s_im, com, prediction, model, dv0;
};

inline std::vector<ComRow> com_sweep(const Scenario& sc, int threads) {
  auto us = detail::linspace(sc.u_min, sc.u_max, sc.u_points);
  std::vector<ComRow> rows(us.size());
  parallel_for(us.size(), threads, [&](std::size_t j) {
    EckartPotential pot{us[j], sc.pot.alpha, sc.pot.mu};
    ComRow r{us[j], pot.s().real(), pot.s().imag(), 0.0, 0.0, detail::nan(), 0.0};
    r.com = com_delay_exact(pot, sc.packet, sc.t);
    auto pt = phase_time_and_broad_com(pot, sc.packet, sc.t);
    r.prediction = pt.com_prediction;
    r.dv0 = filtered_velocity_shift(pot, sc.packet);
    if (!pot.is_free() && std::abs(pot.s().imag()) < 1e-12) {
      int m = static_cast<int>(std::lround(pot.s().real()));
      if (m >= 0) {
        NearThresholdModel model(pot, m);
        if (model.in_validity_window(sc.packet.p0)) r.model = model.com_delay(sc.packet.p0) + r.dv0 * sc.t;
      }
    }
    rows[j] = r;
  });
  return rows;
}

inline Artifact com_sweep_csv(const std::vector<ComRow>& rows, const std::string& name = "com_sweep.csv") {
  auto os = detail::csv_stream();
  os << "u0,re_s,im_s,com_delay,phase_time_prediction,near_threshold_model,delta_v0\n";
  for (const auto& r : rows)
    os << r.u0 << ',' << r.s_re << ',' << r.s_im << ',' << r.com << ',' << r.prediction << ',' << r.model << ','
       << r.dv0 << '\n';
  return {name, os.str()};
}

// oracle cross-checks for the scenario: ODE at momenta across the packet, split-step unless deep tunnelling
inline std::vector<OracleReport> oracle_reports(const Scenario& sc, int threads, bool with_split_step) {
  std::vector<double> ps;
  for (int j = -3; j <= 3; ++j) {
    double p = sc.packet.p0 + j * sc.packet.dp;
    if (p > 0.0) ps.push_back(p);
  }
  std::vector<OracleReport> out(ps.size());
  parallel_for(ps.size(), threads, [&](std::size_t j) { out[j] = transmission_oracle_report(sc.pot, ps[j]); });
  if (with_split_step) {
    // x > 0 only: the evolved state also carries the reflected packet
    std::vector<double> g;
    for (double x : default_grid(sc.pot, sc.packet, sc.t, 512))
      if (x > 0.0) g.push_back(x);
    if (g.size() < 32) throw config_error("oracle: the transmitted packet has not reached x > 0 at t");
    auto q = transmitted_quadrature(sc.pot, sc.packet, g, sc.t);
    auto run = split_step_run(sc.pot, sc.packet, g, sc.t);
    OracleReport r;
    r.quantity = "psi_T relative L2";
    r.primary = {};
    r.oracle = {};
    r.abs_error = relative_l2(run.field, q);
    r.rel_error = r.abs_error;
    std::ostringstream res;
    res.precision(6);
    res << "N=" << run.n_points << " dt=" << run.dt << " steps=" << run.steps;
    r.resolution = res.str();
    out.push_back(r);
  }
  return out;
}

inline bool deep_tunnelling(const Scenario& sc) {
  if (sc.pot.is_free()) return false;
  return ln_transmission(sc.pot, sc.packet.p0).real() < std::log(1e-8);
}

inline void add_summary(RunResult& res, const Scenario& sc) {
  const auto& pot = sc.pot;
  const auto& pk = sc.packet;
  res.summary.emplace_back("re_s", pot.s().real());
  res.summary.emplace_back("im_s", pot.s().imag());
  if (pot.is_free()) {
    for (const char* k : {"re_shift", "im_shift", "com_delay", "tau_phase", "delta_v0", "effective_range"})
      res.summary.emplace_back(k, 0.0);
    return;
  }
  try {
    Complex sh = classical_shift(pot, pk.p0);
    res.summary.emplace_back("re_shift", sh.real());
    res.summary.emplace_back("im_shift", sh.imag());
  } catch (const std::exception& e) {
    res.notes.push_back(std::string("classical shift unavailable: ") + e.what());
    res.summary.emplace_back("re_shift", detail::nan());
    res.summary.emplace_back("im_shift", detail::nan());
  }
  res.summary.emplace_back("com_delay", com_delay_exact(pot, pk, sc.t));
  auto pt = phase_time_and_broad_com(pot, pk, sc.t);
  res.summary.emplace_back("tau_phase", pt.tau_phase);
  res.summary.emplace_back("delta_v0", filtered_velocity_shift(pot, pk));
  double r = detail::nan();
  try {
    r = effective_range(pot, pk.p0);
  } catch (const std::exception& e) {
    res.notes.push_back(std::string("effective range unavailable: ") + e.what());
  }
  res.summary.emplace_back("effective_range", r);
}

inline RunResult run_scenario(const Scenario& sc, int threads = 1) {
  RunResult res;
  for (const auto& c : sc.computations) {
    if (c == "transmission_sweep") {
      res.files.push_back(transmission_sweep_csv(sc, threads));
    } else if (c == "pole_table") {
      res.files.push_back(pole_table_csv(sc.pot, sc.poles, sc.merge_tol));
    } else if (c == "eta") {
      res.files.push_back(eta_csv(sc));
    } else if (c == "packet") {
      auto g = default_grid(sc.pot, sc.packet, sc.t, detail::packet_points(sc));
      auto fr = free_packet(sc.packet, g, sc.t, sc.pot.mu);
      auto tr = transmitted_quadrature(sc.pot, sc.packet, g, sc.t);
      res.files.push_back({"packet_free.csv", detail::field_csv(fr)});
      res.files.push_back({"packet_transmitted.csv", detail::field_csv(tr)});
      auto os = detail::csv_stream();
      write_density_difference_csv(os, tr, fr);
      res.files.push_back({"density_difference.csv", os.str()});
    } else if (c == "com_sweep") {
      res.files.push_back(com_sweep_csv(com_sweep(sc, threads)));
    } else if (c == "oracle") {
      bool split = sc.profile == ToleranceProfile::strict && !deep_tunnelling(sc);
      if (!split) res.notes.push_back("split-step oracle skipped (fast profile or deep tunnelling)");
      auto os = detail::csv_stream();
      write_oracle_header(os);
      for (const auto& r : oracle_reports(sc, threads, split)) write_oracle_row(os, r);
      res.files.push_back({"oracle.csv", os.str()});
    }
  }
  add_summary(res, sc);
  return res;
}

// oracle verification; every report must meet the profile tolerance
inline RunResult verify_scenario(const Scenario& sc, int threads = 1) {
  RunResult res;
  bool split = !deep_tunnelling(sc);
  if (!split) res.notes.push_back("split-step oracle skipped: deep tunnelling is below double-precision evolution noise");
  auto reports = oracle_reports(sc, threads, split);
  auto os = detail::csv_stream();
  write_oracle_header(os);
  for (const auto& r : reports) {
    write_oracle_row(os, r);
    bool field = r.quantity.rfind("psi_T", 0) == 0;
    double tol = field ? 1e-3 : 1e-6;
    res.checks.push_back(make_check(r.quantity, r.rel_error, 0.0, tol));
  }
  res.files.push_back({"oracle.csv", os.str()});
  add_summary(res, sc);
  return res;
}

inline std::string summary_csv(const RunResult& res) {
  auto os = detail::csv_stream();
  os << "key,value\n";
  for (const auto& kv : res.summary) os << kv.first << ',' << kv.second << '\n';
  if (!res.checks.empty()) {
    os << "# checks\n";
    os << "check,value,expected,tolerance,status\n";
    for (const auto& c : res.checks)
      os << c.name << ',' << c.value << ',' << c.expected << ',' << c.tolerance << ',' << (c.pass ? "PASS" : "FAIL")
         << '\n';
  }
  return os.str();
}

}  // namespace eckart
