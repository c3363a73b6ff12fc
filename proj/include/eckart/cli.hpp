#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eckart/figures.hpp"
#include "eckart/scenario.hpp"

namespace eckart {

inline constexpr const char* out_dir_env = "ECKART_OUT_DIR";

inline std::string default_out_dir() {
  const char* e = std::getenv(out_dir_env);
  return (e && *e) ? std::string(e) : std::string("eckart_out");
}

// single writer for all artifacts of a run
inline void write_artifacts(const std::filesystem::path& dir, const RunResult& res) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw config_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw config_error("cannot write '" + (dir / name).string() + "'");
    f << content;
  };
  for (const auto& a : res.files) put(a.name, a.content);
  put("summary.csv", summary_csv(res));
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error(path + ": cannot open");
  return parse_scenario(in, path);
}

// exit codes: 0 ok, 2 configuration or usage, 3 numerical failure or failed check
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Wave packet scattering on Eckart potentials: batch runner"};
  app.require_subcommand(1);
  std::string out_dir = default_out_dir();
  std::string profile_text;
  int threads = 1;
  app.add_option("--out-dir", out_dir, std::string("output directory (default: $") + out_dir_env + " or ./eckart_out)");
  app.add_option("--tolerance-profile", profile_text, "fast or strict")->check(CLI::IsMember({"fast", "strict"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));

  std::string config, figure;
  auto* run = app.add_subcommand("run", "run the computations listed in a scenario file");
  run->add_option("config", config, "scenario file")->required();
  auto* fig = app.add_subcommand("figure", "reproduce a figure preset");
  fig->add_option("name", figure, "preset name")->required();
  auto* ver = app.add_subcommand("verify", "cross-check a scenario against the oracles");
  ver->add_option("config", config, "scenario file")->required();
  for (auto* sub : {run, fig, ver}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunResult res;
    if (*fig) {
      auto prof = profile_text.empty() ? ToleranceProfile::fast : parse_profile(profile_text);
      res = reproduce_figure(figure, prof, threads);
    } else {
      Scenario sc = load_scenario(config);
      if (!profile_text.empty()) sc.profile = parse_profile(profile_text);
      res = *run ? run_scenario(sc, threads) : verify_scenario(sc, threads);
    }
    write_artifacts(out_dir, res);
    for (const auto& n : res.notes) err << "note: " << n << "\n";
    for (const auto& c : res.checks)
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << " (expected " << c.expected << " +- "
          << c.tolerance << ")\n";
    out << "wrote " << res.files.size() + 1 << " files to " << out_dir << "\n";
    return res.all_pass() ? 0 : 3;
  } catch (const config_error& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    err << "numerical error [" << e.module() << "]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace eckart
