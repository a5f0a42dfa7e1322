// seuler: tabulate moduli, build domains, run trajectories and verify the
// kernel and folding inequalities.  Each subcommand reads a JSON config and
// writes its artifacts plus manifest.json into --out.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "seuler/analysis.hpp"
#include "seuler/boundary.hpp"
#include "seuler/domains.hpp"
#include "seuler/dynamics.hpp"
#include "seuler/serialize.hpp"
#include "seuler/velocity_grid.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace seuler;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kPass = 0, kFail = 1, kConfig = 2 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  double quad_tol = 1e-6;
  std::string cache = ".seuler-cache";
};

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

json read_config(const std::string& path) {
  if (path.empty()) throw ConfigError("--config is required");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

/// The object under `key`, or the whole document when it has `marker`.
json section(const json& cfg, const char* key, const char* marker) {
  if (cfg.contains(key)) return cfg.at(key);
  if (cfg.contains(marker)) return cfg;
  throw ConfigError(std::string("config needs a \"") + key + "\" object");
}

class Output {
 public:
  Output(const Globals& g, std::string command, json config)
      : g_(g), command_(std::move(command)), config_(std::move(config)) {
    fs::create_directories(g_.out);
  }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream os(fs::path(g_.out) / name);
    if (!os) throw std::runtime_error("cannot write " + (fs::path(g_.out) / name).string());
    return os;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  void manifest(int exit_code) {
    json m = {{"tool", "seuler"},
              {"version", kVersion},
              {"command", command_},
              {"config", config_},
              {"config_hash", fnv1a(config_.dump())},
              {"seed", g_.seed},
              {"quad_tol", g_.quad_tol},
              {"outputs", files_},
              {"exit_code", exit_code}};
    std::ofstream(fs::path(g_.out) / "manifest.json") << m.dump(2) << '\n';
  }

 private:
  const Globals& g_;
  std::string command_;
  json config_;
  std::vector<std::string> files_;
};

std::ostream& csv(std::ostream& os) { return os << std::setprecision(17); }

// ---------------------------------------------------------------------------

int cmd_modulus(const Globals& g) {
  const json cfg = read_config(g.config);
  const auto m = section(cfg, "modulus", "family").get<Modulus>();
  const json tab = cfg.value("table", json::object());
  const json rho = cfg.value("rho", json::object());
  const double r_min = tab.value("r_min", 1e-8);
  const int nr = tab.value("n", 161);
  const double t_min = rho.value("t_min", -2.0), t_max = rho.value("t_max", 3.0);
  const int nt = rho.value("n", 101);
  if (!(r_min > 0.0 && r_min < 1.0) || nr < 2 || nt < 2 || !(t_max > t_min)) {
    throw ConfigError("table needs 0 < r_min < 1, n >= 2 and rho needs t_min < t_max, n >= 2");
  }
  Output out(g, "modulus", cfg);
  const RateFunctions rf(m);
  const auto cls = rf.classify();

  auto mt = out.open("modulus_table.csv");
  csv(mt) << "r,m,q_m,Q_m\n";
  for (int i = 0; i < nr; ++i) {
    const double r = std::exp(std::log(r_min) * (1.0 - double(i) / (nr - 1)));
    mt << r << ',' << m(r) << ',' << rf.q(r) << ',' << rf.Q(r) << '\n';
  }

  const double total = rf.total_inverse_q_integral();
  const double sup = std::isfinite(total) ? std::log(total) : std::numeric_limits<double>::infinity();
  auto rt = out.open("rho_table.csv");
  csv(rt) << "t,rho_m\n";
  for (int i = 0; i < nt; ++i) {
    const double t = t_min + (t_max - t_min) * i / (nt - 1);
    if (t >= sup) break;
    rt << t << ',' << rf.rho(t) << '\n';
  }

  const auto vr = validate_modulus(m, 64);
  json c = {{"modulus", m},
            {"divergence_class", to_string(cls.divergence)},
            {"dini_class", to_string(cls.dini)},
            {"numeric_heuristic", cls.numeric_heuristic},
            {"inverse_q_integral", std::isfinite(total) ? json(total) : json(nullptr)},
            {"rho_t_sup", std::isfinite(sup) ? json(sup) : json(nullptr)},
            {"validation", {{"pass", vr.pass}, {"failure", vr.failure}, {"worst_violation", vr.worst_violation}}}};
  out.write_json("classification.json", c);
  out.manifest(kPass);
  std::cout << "modulus " << to_string(m.family()) << ": " << to_string(cls.divergence) << ", "
            << to_string(cls.dini) << '\n';
  return kPass;
}

// ---------------------------------------------------------------------------

std::vector<cplx> probe_points(double rmax, int n) {
  std::vector<cplx> pts;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx z(-1.0 + 2.0 * (i + 0.5) / n, -1.0 + 2.0 * (j + 0.5) / n);
      if (std::abs(z) <= rmax) pts.push_back(z);
    }
  }
  return pts;
}

int cmd_domain(const Globals& g) {
  const json cfg = read_config(g.config);
  const auto spec = section(cfg, "domain", "construction").get<DomainSpec>();
  const json tr = cfg.value("trace", json::object());
  const auto dom = build_domain(spec);
  Output out(g, "domain", cfg);

  const auto trace = trace_boundary(dom, tr.value("n", 1024), tr.value("eps", 1e-4), tr.value("richardson", true));
  {
    auto os = out.open("boundary.csv");
    write_trace_csv(os, trace);
  }
  {
    auto os = out.open("boundary.svg");
    write_trace_svg(os, trace);
  }

  const auto probes = probe_points(0.95, 12);
  double sym = 0.0;
  for (const auto& z : probes) sym = std::max(sym, std::abs(dom.map_s(std::conj(z)) - std::conj(dom.map_s(z))));
  json rep = {{"domain", spec},
              {"symmetry_residual", sym},
              {"holomorphy_residual", dom.holomorphy_residual(probes)},
              {"area", signed_area(trace)}};
  try {
    const auto d = delta_report(dom);
    rep["delta"] = {{"delta", d.delta},
                    {"window_delta", d.window_delta},
                    {"cap", d.cap},
                    {"max_window_mass", d.max_window_mass}};
  } catch (const ConstructionError& e) {
    rep["delta"] = {{"error", e.what()}};
  }
  std::vector<double> corners;
  for (const auto& a : dom.decomposition().beta().atoms()) corners.push_back(a.theta);
  if (corners.size() >= 3) {
    const auto fit = fit_polygon(trace, corners);
    std::vector<double> ratios;
    for (double s : fit.side_lengths) ratios.push_back(s / fit.side_lengths.front());
    json verts = json::array();
    for (const auto& v : fit.vertices) verts.push_back({v.real(), v.imag()});
    rep["polygon"] = {{"corners", corners},
                      {"vertices", verts},
                      {"interior_angles", fit.interior_angles},
                      {"side_lengths", fit.side_lengths},
                      {"side_ratios", ratios}};
  }
  out.write_json("domain_report.json", rep);
  out.manifest(kPass);
  std::cout << "domain " << spec.construction << ": symmetry residual " << sym << '\n';
  return kPass;
}

// ---------------------------------------------------------------------------

VelocityGrid cached_field(const Globals& g, const json& domain, const ConformalDomain& dom, const VorticityField& w,
                          const GridSpec& spec, const VelocityOptions& opt, std::string& key) {
  key = fnv1a(domain.dump()) + "-" + fnv1a(json{{"field", w}, {"velocity", opt}}.dump()) + "-" +
        fnv1a(json(spec).dump());
  const fs::path file = fs::path(g.cache) / ("field-" + key + ".csv");
  if (std::ifstream in(file); in) {
    std::cerr << "field cache hit " << file.string() << '\n';
    return VelocityGrid::read_components(spec, in);
  }
  std::cerr << "precomputing field on " << VelocityGrid(spec).n_nodes() << " nodes\n";
  std::size_t shown = 0;
  auto progress = [&](std::size_t n, std::size_t total) {
    if (n * 20 / total > shown) {
      shown = n * 20 / total;
      std::cerr << "  " << n << "/" << total << '\n';
    }
  };
  auto grid = precompute_field(dom, w, spec, opt, g.jobs, progress);
  fs::create_directories(g.cache);
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp);
    grid.write_components(os);
  }
  fs::rename(tmp, file);
  return grid;
}

int cmd_simulate(const Globals& g) {
  const json cfg = read_config(g.config);
  if (!cfg.contains("domain") || !cfg.contains("field")) throw ConfigError("simulate needs \"domain\" and \"field\"");
  const auto spec = cfg.at("domain").get<DomainSpec>();
  const auto w = cfg.at("field").get<VorticityField>();
  const auto gs = cfg.value("grid", json::object()).get<GridSpec>();
  const auto vopt = cfg.value("velocity", json::object()).get<VelocityOptions>();
  const auto topt = cfg.value("trajectory", json::object()).get<TrajectoryOptions>();
  const json z0 = cfg.value("zeta0", json::array({0.5, 0.0}));
  if (!z0.is_array() || z0.size() != 2) throw ConfigError("zeta0 must be [re, im]");
  const cplx zeta0(z0[0].get<double>(), z0[1].get<double>());
  std::vector<std::string> checks;
  const json vj = cfg.value("verify", json("auto"));
  const Modulus m = spec.modulus.value_or(Modulus::zero());
  const bool divergent = classify(m).divergence == DivergenceClass::divergent;
  if (vj.is_string() && vj.get<std::string>() == "auto") {
    checks = divergent ? std::vector<std::string>{"lower", "upper"} : std::vector<std::string>{"arrival"};
  } else if (vj.is_array()) {
    checks = vj.get<std::vector<std::string>>();
  } else if (!(vj.is_string() && vj.get<std::string>() == "none")) {
    throw ConfigError("verify must be \"auto\", \"none\" or a list of lower/upper/arrival");
  }
  for (const auto& c : checks) {
    if (c != "lower" && c != "upper" && c != "arrival") throw ConfigError("unknown check \"" + c + "\"");
  }

  const auto dom = build_domain(spec);
  (void)VelocityGrid(gs);  // validates the grid spec before any output
  Output out(g, "simulate", cfg);
  std::string key;
  const auto grid = cached_field(g, cfg.at("domain"), dom, w, gs, vopt, key);
  const auto rec = integrate_trajectory(grid, zeta0, topt);
  {
    auto os = out.open("trajectory.csv");
    write_trajectory_csv(os, rec);
  }

  double max_im = 0.0;
  for (const auto& p : rec.positions) max_im = std::max(max_im, std::abs(p.imag()));
  json rep = {{"field_cache_key", key},
              {"samples", rec.size()},
              {"terminated", to_string(rec.terminated)},
              {"partial", rec.terminated == Termination::error},
              {"final_t", rec.times.back()},
              {"final_d", rec.d.back()},
              {"max_abs_im", max_im},
              {"sup_norm", w.sup_norm()},
              {"divergence_class", to_string(classify(m).divergence)}};
  if (!rec.message.empty()) rep["message"] = rec.message;
  bool pass = true;
  json reports = json::object();
  for (const auto& c : checks) {
    try {
      BoundReport r = c == "lower"   ? verify_lower_bound(rec, m, w.sup_norm())
                      : c == "upper" ? verify_upper_bound(rec, m)
                                     : verify_arrival(rec, m);
      pass = pass && r.pass;
      reports[c] = r;
    } catch (const DomainError& e) {
      pass = false;
      reports[c] = {{"pass", false}, {"error", e.what()}};
    }
  }
  rep["reports"] = reports;
  rep["pass"] = pass;
  out.write_json("bound_report.json", rep);
  const int code = pass ? kPass : kFail;
  out.manifest(code);
  std::cout << "simulate: " << rec.size() << " samples, " << to_string(rec.terminated) << ", d = " << rec.d.back()
            << (checks.empty() ? "" : pass ? ", PASS" : ", FAIL") << '\n';
  return code;
}

// ---------------------------------------------------------------------------

int cmd_lemma31(const Globals& g) {
  const json cfg = read_config(g.config);
  const auto spec = section(cfg, "domain", "construction").get<DomainSpec>();
  const Modulus m = cfg.contains("modulus") ? cfg.at("modulus").get<Modulus>() : spec.modulus.value_or(Modulus::zero());
  const auto vopt = cfg.value("velocity", json::object()).get<VelocityOptions>();
  std::vector<cplx> xis;
  if (cfg.contains("xi")) {
    for (const auto& p : cfg.at("xi")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("xi entries are [re, im] pairs");
      xis.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  } else {
    const auto dist = cfg.value("distances", std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});
    const auto angles = cfg.value("angles", std::vector<double>{0.0});
    for (double a : angles) {
      for (double d : dist) xis.push_back(std::polar(1.0 - d, a));
    }
  }
  if (xis.empty()) throw ConfigError("no xi samples");
  for (const auto& xi : xis) {
    const double r = std::abs(xi);
    if (r < 0.5 || 1.0 - r < 1e-4 * (1.0 - 1e-9)) throw ConfigError("xi samples need |xi| in [1/2, 1 - 1e-4]");
  }
  const auto dom = build_domain(spec);
  Output out(g, "verify lemma31", cfg);
  const auto rep = check_lemma31(dom, m, xis, vopt, g.jobs);
  out.write_json("lemma31_report.json", rep);
  const int code = rep.pass ? kPass : kFail;
  out.manifest(code);
  std::cout << "lemma31: max ratio " << rep.max_ratio << ", median " << rep.median_ratio << ", C_fit " << rep.C_fit
            << (rep.pass ? ", PASS" : ", FAIL") << '\n';
  return code;
}

int cmd_folding(const Globals& g) {
  const json cfg = read_config(g.config);
  std::vector<FoldingInstance> listed;
  if (cfg.contains("instances")) listed = cfg.at("instances").get<std::vector<FoldingInstance>>();
  const int n_random = cfg.value("random", 0);
  const bool chain = cfg.value("chain", true);
  if (listed.empty() && n_random <= 0) throw ConfigError("folding needs \"instances\" or \"random\": n");
  for (const auto& in : listed) validate(in);
  if (!(g.quad_tol > 0.0 && g.quad_tol < 1e-2)) throw ConfigError("--quad-tol must lie in (0, 1e-2)");
  Output out(g, "verify folding", cfg);

  bool pass = true;
  json entries = json::array();
  for (const auto& in : listed) {
    json e = {{"instance", in}};
    try {
      const auto v = check_folding_inequality(in, g.quad_tol);
      e["verdict"] = v;
      pass = pass && v.pass;
      if (chain) {
        const auto c = check_monotone_chain(in, g.quad_tol);
        e["chain"] = c;
        pass = pass && c.pass;
      }
    } catch (const std::runtime_error& err) {
      e["error"] = err.what();
      pass = false;
    }
    entries.push_back(e);
  }
  json rep = {{"quad_tol", g.quad_tol}, {"instances", entries}};
  if (n_random > 0) {
    const auto suite = run_folding_suite(n_random, g.seed, g.quad_tol, g.jobs);
    json rs = json::array();
    for (std::size_t i = 0; i < suite.instances.size(); ++i) {
      rs.push_back({{"instance", suite.instances[i]}, {"verdict", suite.verdicts[i]}});
    }
    rep["random"] = {{"seed", suite.seed}, {"count", n_random}, {"results", rs}, {"pass", suite.pass}};
    pass = pass && suite.pass;
  }
  rep["pass"] = pass;
  out.write_json("folding_report.json", rep);
  const int code = pass ? kPass : kFail;
  out.manifest(code);
  std::cout << "folding: " << listed.size() << " listed, " << std::max(n_random, 0) << " random"
            << (pass ? ", PASS" : ", FAIL") << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-distance experiments for planar Euler flows in rough domains"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomised suites")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker cap")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--quad-tol", g.quad_tol, "quadrature tolerance")->check(CLI::PositiveNumber)->capture_default_str();

  int code = kPass;
  auto wrap = [&](int (*fn)(const Globals&)) { return [&, fn] { code = fn(g); }; };
  app.add_subcommand("modulus", "tabulate m, q_m, Q_m and rho_m; classify")->fallthrough()->callback(wrap(cmd_modulus));
  app.add_subcommand("domain", "trace a domain boundary and report residuals")
      ->fallthrough()
      ->callback(wrap(cmd_domain));
  auto* sim = app.add_subcommand("simulate", "precompute the field, integrate a trajectory, check rate bounds");
  sim->fallthrough()->callback(wrap(cmd_simulate));
  sim->add_option("--cache", g.cache, "field cache directory")->capture_default_str();
  auto* verify = app.add_subcommand("verify", "check an inequality");
  verify->fallthrough()->require_subcommand(1);
  verify->add_subcommand("lemma31", "kernel bound near the boundary")->fallthrough()->callback(wrap(cmd_lemma31));
  verify->add_subcommand("folding", "folding inequality and monotone chain")->fallthrough()->callback(wrap(cmd_folding));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ConstructionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  }
  return code;
}
