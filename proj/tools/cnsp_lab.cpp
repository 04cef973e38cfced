// Experiment driver: cnsp_lab run <config> [--set section.key=value]... [--out DIR] [--threads N]
// Exit codes: 0 all checks pass, 1 check failure, 2 config error, 3 numerical abort.

#include "cnsp/config.hpp"
#include "cnsp/experiments.hpp"
#include "cnsp/kernels.hpp"
#include "cnsp/manifest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef CNSP_VERSION
#define CNSP_VERSION "unknown"
#endif

using namespace cnsp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_summary(std::ostream& os, const ExperimentConfig& cfg, const ExperimentResult& res) {
  os << "experiment: " << to_string(cfg.experiment) << '\n';
  for (const auto& w : res.warnings) os << "WARNING " << w << '\n';
  for (const auto& c : res.checks) os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  if (res.aborted) os << "ABORT " << res.abort_reason << '\n';
  for (const auto& [k, v] : res.fitted) os << "fitted " << k << " = " << v << '\n';
  os << "result: " << (res.aborted ? "abort" : res.all_pass() ? "pass" : "fail") << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressible Navier-Stokes-Poisson experiment driver"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-experiments", list, "print the experiment names and exit");
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  std::string config_path, out_dir;
  std::vector<std::string> sets;
  int threads = 0;
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--set", sets, "override, section.key=value")->take_all();
  run->add_option("--out", out_dir, "output directory (overrides output.directory)");
  run->add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& n : experiment_names()) std::cout << n << '\n';
    return 0;
  }
  if (!*run) {
    std::cerr << app.help();
    return 2;
  }
  if (threads > 0) kernels::set_threads(threads);

  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.version = CNSP_VERSION;
  man.threads = kernels::threads();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  ExperimentConfig cfg;
  try {
    cfg = parse_config(read_file(config_path), sets);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    if (!out_dir.empty()) {
      ArtifactWriter w(out_dir);
      man.status = "config_error";
      man.message = e.what();
      man.wall_seconds = elapsed();
      write_manifest(w.dir(), man);
    }
    return 2;
  }
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  man.config = config_echo(cfg);

  ArtifactWriter writer(cfg.output.directory);
  ExperimentResult res;
  int code = 0;
  try {
    res = run_experiment(cfg, writer);
    code = res.aborted ? 3 : res.all_pass() ? 0 : 1;
    man.status = res.aborted ? "abort" : res.all_pass() ? "pass" : "fail";
    man.message = res.abort_reason;
  } catch (const std::invalid_argument& e) {
    res.aborted = true;
    res.abort_reason = e.what();
    man.status = "config_error";
    man.message = e.what();
    code = 2;
  } catch (const std::exception& e) {
    res.aborted = true;
    res.abort_reason = e.what();
    man.status = "error";
    man.message = e.what();
    code = 1;
  }
  {
    auto f = writer.open("summary.txt");
    write_summary(f, cfg, res);
  }
  write_summary(std::cout, cfg, res);
  man.fitted = res.fitted;
  man.files = writer.files();
  man.wall_seconds = elapsed();
  write_manifest(writer.dir(), man);
  return code;
}
