#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("seuler_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SEULER_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST(CliModulus, ZeroRhoTableMatchesClosedForm) {
  const auto cfg = write_config("zero.json", R"({"modulus": {"family": "zero"}})");
  const auto out = scratch() / "zero";
  ASSERT_EQ(run("modulus --config " + cfg.string() + " --out " + out.string()), 0);
  std::ifstream in(out / "rho_table.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,rho_m");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double t = std::stod(line.substr(0, comma));
    const double rho = std::stod(line.substr(comma + 1));
    EXPECT_NEAR(rho, std::exp(-std::exp(t)), 1e-8) << t;
    ++rows;
  }
  EXPECT_EQ(rows, 101);
  EXPECT_TRUE(fs::exists(out / "modulus_table.csv"));
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(CliModulus, BorderlineClassification) {
  const double a_lo = M_PI / 2 - 0.1, a_hi = M_PI / 2 + 0.1;
  for (const auto& [a, expected] : {std::pair{a_lo, "divergent"}, std::pair{a_hi, "convergent"}}) {
    const auto cfg = write_config("cl.json", json{{"modulus", {{"family", "capped_log"}, {"a", a}}}}.dump());
    const auto out = scratch() / "cl";
    ASSERT_EQ(run("modulus --config " + cfg.string() + " --out " + out.string()), 0);
    EXPECT_EQ(read_json(out / "classification.json").at("divergence_class"), expected) << a;
  }
}

TEST(CliModulus, ConfigErrorsExitTwo) {
  const auto bad = write_config("bad.json", R"({"modulus": {)");
  EXPECT_EQ(run("modulus --config " + bad.string() + " --out " + (scratch() / "bad").string()), 2);
  const auto neg = write_config("neg.json", R"({"modulus": {"family": "linear", "C": -1}})");
  EXPECT_EQ(run("modulus --config " + neg.string() + " --out " + (scratch() / "neg").string()), 2);
  EXPECT_EQ(run("modulus --out " + (scratch() / "none").string()), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(CliDomain, TriangleAnglesAndSymmetry) {
  const auto cfg = write_config(
      "tri.json", R"({"domain": {"construction": "modulus_domain", "beta_tilde": {"modulus": {"family": "zero"}}}})");
  const auto out = scratch() / "tri";
  ASSERT_EQ(run("domain --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rep = read_json(out / "domain_report.json");
  for (double a : rep.at("polygon").at("interior_angles")) EXPECT_NEAR(a, M_PI / 3, 0.01);
  for (double r : rep.at("polygon").at("side_ratios")) EXPECT_NEAR(r, 1.0, 0.005);
  EXPECT_NE(slurp(out / "boundary.svg").find("<svg"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "boundary.csv"));
}

TEST(CliDomain, PerturbedTriangleIsSymmetric) {
  const auto cfg = write_config("pt.json", R"({"domain": {"construction": "modulus_domain",
      "beta_tilde": {"modulus": {"family": "capped_log", "a": 0.39269908169872414}, "r0": 0.25}}, "trace": {"n": 256}})");
  const auto out = scratch() / "pt";
  ASSERT_EQ(run("domain --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_LT(read_json(out / "domain_report.json").at("symmetry_residual").get<double>(), 1e-8);
}

TEST(CliDomain, RejectsLargeR0) {
  const auto cfg = write_config("r06.json", R"({"domain": {"construction": "modulus_domain",
      "beta_tilde": {"modulus": {"family": "capped_log", "a": 0.39269908169872414}, "r0": 0.6}}})");
  EXPECT_EQ(run("domain --config " + cfg.string() + " --out " + (scratch() / "r06").string()), 2);
}

TEST(CliSimulate, CachedRerunIsByteIdentical) {
  const auto cfg = write_config("sim.json", R"({"domain": {"construction": "disc"},
      "field": {"kind": "odd_half", "c": 1.0},
      "grid": {"levels": 8, "sub": 2, "n_phi": 1},
      "velocity": {"rel_tol": 1e-5},
      "trajectory": {"horizon": 2.0, "eps_stop": 1e-3},
      "verify": "none"})");
  const auto cache = scratch() / "cache";
  const auto a = scratch() / "sim_a", b = scratch() / "sim_b";
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + a.string() + " --cache " + cache.string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + b.string() + " --cache " + cache.string()), 0);
  EXPECT_EQ(std::distance(fs::directory_iterator(cache), fs::directory_iterator{}), 1);
  for (const char* f : {"trajectory.csv", "bound_report.json", "manifest.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto rep = read_json(a / "bound_report.json");
  EXPECT_EQ(rep.at("max_abs_im").get<double>(), 0.0);
  EXPECT_LT(rep.at("final_d").get<double>(), 0.5);
}

TEST(CliSimulate, CoverageExhaustedIsFlagged) {
  const auto cfg = write_config("short.json", R"({"domain": {"construction": "disc"},
      "field": {"kind": "odd_half", "c": 1.0},
      "grid": {"levels": 2, "sub": 2, "n_phi": 1},
      "velocity": {"rel_tol": 1e-5},
      "trajectory": {"horizon": 10.0, "eps_stop": 1e-4},
      "verify": "none"})");
  const auto out = scratch() / "short";
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + out.string() + " --cache " +
                (scratch() / "cache").string()),
            0);
  const auto rep = read_json(out / "bound_report.json");
  EXPECT_TRUE(rep.at("partial").get<bool>());
  EXPECT_EQ(rep.at("terminated"), "error");
  EXPECT_NE(rep.at("message").get<std::string>().find("coverage"), std::string::npos);
}

TEST(CliVerify, FoldingPassesAndIsSeeded) {
  const auto cfg = write_config("fold.json", R"({"instances": [{"theta_star": 0.3, "delta": 0.4,
      "atoms": [[-0.1, 0.5], [0.7, 0.5]], "alpha": 2.0, "p": 1.0, "cap_radius": 0.4}], "random": 2})");
  const auto a = scratch() / "fold_a", b = scratch() / "fold_b";
  ASSERT_EQ(run("verify folding --config " + cfg.string() + " --out " + a.string() + " --seed 9"), 0);
  ASSERT_EQ(run("verify folding --config " + cfg.string() + " --out " + b.string() + " --seed 9"), 0);
  EXPECT_EQ(slurp(a / "folding_report.json"), slurp(b / "folding_report.json"));
  const auto rep = read_json(a / "folding_report.json");
  EXPECT_TRUE(rep.at("pass").get<bool>());
  EXPECT_EQ(rep.at("random").at("seed").get<int>(), 9);
  EXPECT_TRUE(rep.at("instances")[0].at("chain").at("pass").get<bool>());
}

TEST(CliVerify, FoldingRejectsDivergentInstance) {
  const auto cfg = write_config("div.json", R"({"instances": [{"theta_star": 0.0, "delta": 0.4,
      "atoms": [[0.1, 1.0]], "alpha": 2.5, "p": 1.2}]})");
  EXPECT_EQ(run("verify folding --config " + cfg.string() + " --out " + (scratch() / "div").string()), 2);
}

TEST(CliVerify, Lemma31OnDisc) {
  const auto cfg = write_config("l31.json", R"({"domain": {"construction": "disc"}, "distances": [0.1, 0.01]})");
  const auto out = scratch() / "l31";
  ASSERT_EQ(run("verify lemma31 --config " + cfg.string() + " --out " + out.string()), 0);
  const auto rep = read_json(out / "lemma31_report.json");
  EXPECT_TRUE(rep.at("pass").get<bool>());
  EXPECT_EQ(rep.at("samples").size(), 2u);
  const auto bad = write_config("l31bad.json", R"({"domain": {"construction": "disc"}, "distances": [0.7]})");
  EXPECT_EQ(run("verify lemma31 --config " + bad.string() + " --out " + (scratch() / "l31bad").string()), 2);
}

TEST(CliManifest, RecordsConfigHashAndSeed) {
  const auto cfg = write_config("m.json", R"({"modulus": {"family": "linear", "C": 2.0}})");
  const auto out = scratch() / "man";
  ASSERT_EQ(run("modulus --config " + cfg.string() + " --out " + out.string() + " --seed 17"), 0);
  const auto m = read_json(out / "manifest.json");
  EXPECT_EQ(m.at("seed").get<int>(), 17);
  EXPECT_EQ(m.at("config").at("modulus").at("C").get<double>(), 2.0);
  EXPECT_EQ(m.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_EQ(m.at("command"), "modulus");
}
