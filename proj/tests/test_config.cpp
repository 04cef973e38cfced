#include "cnsp/config.hpp"
#include "cnsp/experiments.hpp"
#include "cnsp/manifest.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace cnsp;

namespace {

std::vector<std::string> errors_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e.errors;
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p.string();
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

} // namespace

TEST_CASE("empty document gives the defaults") {
  auto c = parse_config("");
  CHECK(c.experiment == Experiment::green_verify);
  CHECK(c.grid.dim == 2);
  CHECK(c.grid.n == 128);
  CHECK(c.grid.L == doctest::Approx(64.0 * M_PI));
  CHECK(c.params.kappa == 1.0);
  CHECK(c.params.gamma == 1.0);
  CHECK(c.params.mu1 == 1.0);
  CHECK(c.params.mu2 == 0.0);
  CHECK(c.resolved_j0() == -1);
  CHECK(c.model_params().mu_bar() == 2.0);
}

TEST_CASE("values and overrides") {
  auto c = parse_config("experiment = linear_decay\n# comment\ngrid.L = 64pi  # box\nparams.kappa = 0\n",
                        {"grid.n=256", "decay.sigmas = -0.5, 0, 0.5"});
  CHECK(c.experiment == Experiment::linear_decay);
  CHECK(c.grid.L == doctest::Approx(64.0 * M_PI));
  CHECK(c.grid.n == 256);
  CHECK(c.params.kappa == 0.0);
  CHECK(c.decay.sigmas == std::vector<double>{-0.5, 0.0, 0.5});
  CHECK(parse_real("0.5*pi") == doctest::Approx(M_PI / 2));
  CHECK(parse_real("pi") == doctest::Approx(M_PI));
  CHECK(parse_real("1e-3") == 1e-3);
  CHECK_THROWS(parse_real("abc"));
}

TEST_CASE("config errors are collected") {
  auto e = errors_of("grid.n = 100\n");
  REQUIRE(e.size() == 1);
  CHECK(any_contains(e, "n must be a power of two"));

  e = errors_of("foo.bar = 1\ngrid.n = 100\nparams.kappa = x\nnot a line\n");
  CHECK(e.size() == 4);
  CHECK(any_contains(e, "unknown key 'foo.bar'"));
  CHECK(any_contains(e, "params.kappa"));
  CHECK(any_contains(e, "n must be a power of two"));

  e = errors_of("", {"grid.dim=5"});
  CHECK(any_contains(e, "grid.dim"));
  e = errors_of("partition.j0 = 10\n");
  CHECK(any_contains(e, "partition.j0"));
  e = errors_of("profile.sigma1 = 0.5\n");
  CHECK(any_contains(e, "profile"));
}

TEST_CASE("config echo round trips") {
  auto c = parse_config("experiment = kernel_bounds\nparams.mu2 = 0.25\nprofile.anchor = a\n"
                        "profile.sigma1 = -1.5\n");
  std::ostringstream doc;
  for (const auto& [k, v] : config_echo(c))
    if (k != "experiment.name") doc << k << " = " << v << '\n';
  doc << "experiment = kernel_bounds\n";
  auto c2 = parse_config(doc.str());
  CHECK(config_echo(c2) == config_echo(c));
}

TEST_CASE("negative kappa is accepted with a warning") {
  auto c = parse_config("experiment = linear_decay\nparams.kappa = -1\ngrid.n = 32\ngrid.L = 16pi\n"
                        "stepper.t_end = 2\n");
  ArtifactWriter w(temp_dir("cnsp_kappa_neg"));
  auto res = run_experiment(c, w);
  CHECK(any_contains(res.warnings, "kappa"));
  CHECK_FALSE(res.all_pass());
}

TEST_CASE("sha256") {
  auto dir = temp_dir("cnsp_sha");
  std::filesystem::create_directories(dir);
  auto p = dir + "/abc.txt";
  std::ofstream(p) << "abc";
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS(sha256_file(dir + "/missing"));
}

TEST_CASE("manifest lists every artifact with its checksum, runs are reproducible") {
  auto c = parse_config("experiment = green_verify\ngreen.samples = 300\n");
  std::vector<std::map<std::string, std::string>> mans;
  for (int rep = 0; rep < 2; ++rep) {
    auto dir = temp_dir("cnsp_manifest_" + std::to_string(rep));
    ArtifactWriter w(dir);
    auto res = run_experiment(c, w);
    CHECK(res.all_pass());
    RunManifest m;
    m.config = config_echo(c);
    m.version = "test";
    m.status = "pass";
    m.fitted = res.fitted;
    m.files = w.files();
    write_manifest(dir, m);
    auto kv = read_kv(dir + "/manifest.txt");
    for (const auto& f : w.files()) {
      REQUIRE(kv.count("file." + f));
      CHECK(kv["file." + f] == sha256_file(dir + "/" + f));
    }
    CHECK(kv["config.green.samples"] == "300");
    mans.push_back(kv);
  }
  CHECK(mans[0]["file.green_verify.csv"] == mans[1]["file.green_verify.csv"]);
}
