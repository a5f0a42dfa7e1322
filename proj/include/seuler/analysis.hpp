#pragma once

// Folding of atomic boundary measures toward a window centre and the
// weighted kernel inequality that the folds monotonically improve.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "seuler/errors.hpp"
#include "seuler/measure.hpp"
#include "seuler/modulus.hpp"
#include "seuler/quadrature.hpp"

namespace seuler {

using cplx = std::complex<double>;

enum class FoldSide { left, right };

namespace detail {

inline double fold_tol(double delta) { return 1e-12 * std::max(1.0, delta); }

inline BoundaryMeasure merged(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.theta < b.theta; });
  std::vector<Atom> out;
  for (const auto& a : atoms) {
    if (a.mass == 0.0) continue;
    if (!out.empty() && std::abs(out.back().theta - a.theta) <= 1e-15) {
      out.back().mass += a.mass;
    } else {
      out.push_back(a);
    }
  }
  return BoundaryMeasure(std::move(out));
}

/// Atom offsets theta - theta* wrapped into (-pi, pi].
inline std::vector<double> offsets(const BoundaryMeasure& beta, double theta_star) {
  std::vector<double> out;
  for (const auto& a : beta.atoms()) out.push_back(wrap_angle(a.theta - theta_star));
  return out;
}

inline void check_support(const BoundaryMeasure& beta, double theta_star, double delta, const char* what) {
  if (beta.has_density() || beta.uniform_density() != 0.0) {
    throw DomainError(std::string(what) + ": only atomic measures can be folded");
  }
  for (double o : offsets(beta, theta_star)) {
    if (std::abs(o) > 2.0 * delta + fold_tol(delta)) {
      throw DomainError(std::string(what) + ": atom at offset " + std::to_string(o) +
                        " lies outside [theta* - 2 delta, theta* + 2 delta]");
    }
  }
}

}  // namespace detail

/// Reflects the atoms in [theta*-2delta, theta*-delta) across theta*-delta
/// (left), or those in (theta*+delta, theta*+2delta] across theta*+delta
/// (right).  Coincident atoms are merged.
inline BoundaryMeasure fold_once(const BoundaryMeasure& beta, double theta_star, double delta, FoldSide side) {
  if (!(delta > 0.0 && delta <= 0.5 * kPi)) throw DomainError("fold_once: delta must lie in (0, pi/2]");
  detail::check_support(beta, theta_star, delta, "fold_once");
  std::vector<Atom> out;
  for (const auto& a : beta.atoms()) {
    double o = wrap_angle(a.theta - theta_star);
    if (side == FoldSide::left && o < -delta) o = -2.0 * delta - o;
    if (side == FoldSide::right && o > delta) o = 2.0 * delta - o;
    out.push_back({wrap_angle(theta_star + o), a.mass});
  }
  return detail::merged(std::move(out));
}

/// Width of the atoms' support, measured as offsets from theta*.
inline double support_width(const BoundaryMeasure& beta, double theta_star) {
  const auto o = detail::offsets(beta, theta_star);
  if (o.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(o.begin(), o.end());
  return *hi - *lo;
}

/// beta^0, beta^1, ...: left and right folds with delta halving after each
/// pair, until the support is narrower than 1e-9.  The last element is the
/// limit, a single atom of mass beta(I) at theta*.
inline std::vector<BoundaryMeasure> fold_sequence(const BoundaryMeasure& beta, double theta_star, double delta) {
  detail::check_support(beta, theta_star, delta, "fold_sequence");
  std::vector<BoundaryMeasure> seq{detail::merged(beta.atoms())};
  double dl = delta;
  while (support_width(seq.back(), theta_star) >= 1e-9) {
    seq.push_back(fold_once(seq.back(), theta_star, dl, FoldSide::left));
    seq.push_back(fold_once(seq.back(), theta_star, dl, FoldSide::right));
    dl *= 0.5;
  }
  double mass = 0.0;
  for (const auto& a : beta.atoms()) mass += a.mass;
  seq.push_back(BoundaryMeasure({{wrap_angle(theta_star), mass}}));
  return seq;
}

// ---------------------------------------------------------------------------
// Folding instances

enum class FKind { boundary_decay };           // (1 - |z|)^{5/6}
enum class GKind { zero, truncated_inverse };  // min{1/|xi - z|, 2/(1 - |xi|)}
enum class HKind { power };                    // s^{-p}

inline constexpr double kFExponent = 5.0 / 6.0;

struct FoldingInstance {
  double theta_star = 0.0;
  double delta = 0.5;
  BoundaryMeasure beta;
  double alpha = 2.0;
  FKind f = FKind::boundary_decay;
  GKind g = GKind::zero;
  double xi_radius = 0.8;  // |xi| for the truncated inverse
  HKind h = HKind::power;
  double p = 1.0;
  double cap_radius = 0.5;  // H = B(e^{i theta*}, cap_radius) cap D

  double f_value(cplx z) const { return std::pow(std::max(0.0, 1.0 - std::abs(z)), kFExponent); }

  double g_value(cplx z) const {
    if (g == GKind::zero) return 0.0;
    const cplx xi = std::polar(xi_radius, theta_star);
    const double dist = std::abs(xi - z);
    const double cap = 2.0 / (1.0 - xi_radius);
    return dist * cap <= 1.0 ? cap : 1.0 / dist;
  }

  double h_value(double s) const { return std::pow(s, -p); }

  double beta_mass() const {
    double m = 0.0;
    for (const auto& a : beta.atoms()) m += a.mass;
    return m;
  }
};

inline const char* to_string(GKind g) { return g == GKind::zero ? "zero" : "truncated_inverse"; }

/// Throws ConstructionError if the instance breaks the lemma's hypotheses
/// or makes the integrals diverge.
inline void validate(const FoldingInstance& in) {
  auto fail = [](const std::string& msg) { throw ConstructionError("folding instance: " + msg); };
  if (!(in.delta > 0.0 && in.delta <= 0.5 * kPi)) fail("delta must lie in (0, pi/2]");
  if (!(in.alpha >= 1.0)) fail("alpha must be >= 1");
  if (!(in.p > 0.0)) fail("p must be positive");
  if (!(in.cap_radius > 0.0 && in.cap_radius <= 2.0)) fail("cap radius must lie in (0, 2]");
  if (in.g == GKind::truncated_inverse && !(in.xi_radius >= 0.0 && in.xi_radius < 1.0)) {
    fail("|xi| must lie in [0, 1)");
  }
  if (in.beta.atoms().empty() || !in.beta.is_nonnegative() || !(in.beta_mass() > 0.0)) {
    fail("beta must be a non-zero positive atomic measure");
  }
  try {
    detail::check_support(in.beta, in.theta_star, in.delta, "folding instance");
  } catch (const DomainError& e) {
    throw ConstructionError(e.what());
  }
  // Near an atom the integrand behaves like r^{5/6 - p alpha} in two dimensions.
  const double sum = in.p * in.alpha - kFExponent;
  if (sum >= 2.0) {
    fail("p * alpha - 5/6 = " + std::to_string(sum) + " >= 2; the integrals diverge at the atoms");
  }
}

/// Sampled check of the monotonicity hypotheses on f, g and h.
inline bool hypotheses_hold(const FoldingInstance& in, int n = 200, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double r = U(rng);
    const double a = kPi * U(rng), b = a * U(rng);
    const cplx z = std::polar(r, in.theta_star + (U(rng) < 0.5 ? a : -a));
    const cplx zp = std::polar(r, in.theta_star + (U(rng) < 0.5 ? b : -b));
    if (in.f_value(zp) < in.f_value(z) * (1 - 1e-12) || in.g_value(zp) < in.g_value(z) * (1 - 1e-12)) return false;
    const double s = 3.0 * U(rng) + 1e-6, t = s * (1.0 + U(rng));
    if (in.h_value(t) > in.h_value(s)) return false;
  }
  return true;
}

namespace detail {

// Breakpoints on [lo, hi] refined geometrically toward each singular point:
// p +- D 2^{-i} for i = 1..levels, where D is the gap to the next point.
inline std::vector<double> graded_breaks(double lo, double hi, std::vector<double> sing, double finest) {
  std::vector<double> pts{lo, hi};
  for (double& p : sing) p = std::clamp(p, lo, hi);
  std::sort(sing.begin(), sing.end());
  sing.erase(std::unique(sing.begin(), sing.end()), sing.end());
  for (std::size_t k = 0; k < sing.size(); ++k) {
    const double p = sing[k];
    pts.push_back(p);
    const double left = (k > 0 ? p - sing[k - 1] : p - lo);
    const double right = (k + 1 < sing.size() ? sing[k + 1] - p : hi - p);
    for (double D : {-left, right}) {
      for (double h = 0.5 * D; std::abs(h) >= finest; h *= 0.5) pts.push_back(p + h);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline std::size_t folding_order(double tol) {
  return static_cast<std::size_t>(std::clamp(std::ceil(-std::log10(tol)) + 6.0, 8.0, 24.0));
}

}  // namespace detail

/// int_H f [g + (1/beta(I)) int h(|e^{i theta} - z|) d mu]^alpha dz for an
/// atomic mu.  Polar coordinates z = (1 - t) e^{i(theta* + w)}; composite
/// Gauss on cells graded toward t = 0 and, at each t, toward every atom.
inline double folding_integral(const FoldingInstance& in, const BoundaryMeasure& mu, double tol = 1e-6) {
  const double norm = 1.0 / in.beta_mass();
  std::vector<double> off, wt;
  for (const auto& a : mu.atoms()) {
    off.push_back(wrap_angle(a.theta - in.theta_star));
    wt.push_back(a.mass * norm);
  }
  const double rho = in.cap_radius;
  const bool has_g = in.g == GKind::truncated_inverse;
  const double xr = in.xi_radius, gc = 0.5 * (1.0 - in.xi_radius);  // g is flat inside |z - xi| < gc
  const auto rule = quad::gauss_legendre(detail::folding_order(tol));
  const std::size_t n = rule.nodes.size();

  auto extent = [rho](double t) {
    const double r = 1.0 - t;
    if (r <= 0.0) return 0.0;
    return std::acos(std::clamp((1.0 + r * r - rho * rho) / (2.0 * r), -1.0, 1.0));
  };
  auto integrand = [&](double t, double w) {
    // |e^{iu} - (1-t)|^2 = t^2 + 4 (1-t) sin^2(u/2).
    double G = 0.0;
    if (has_g) {
      const double dist = std::abs(xr - std::polar(1.0 - t, w));
      G = dist <= gc ? 1.0 / gc : 1.0 / dist;
    }
    for (std::size_t k = 0; k < off.size(); ++k) {
      const double sn = std::sin(0.5 * (w - off[k]));
      const double d2 = t * t + 4.0 * (1.0 - t) * sn * sn;
      G += wt[k] * std::pow(d2, -0.5 * in.p);
    }
    return std::pow(t, kFExponent) * std::pow(G, in.alpha) * (1.0 - t);
  };
  auto over_w = [&](double t) {
    const double W = extent(t);
    if (W <= 0.0) return 0.0;
    std::vector<double> sing(off.begin(), off.end());
    std::vector<double> soft;
    if (has_g) {
      const double r = 1.0 - t;
      const double c = (r * r + xr * xr - gc * gc) / (2.0 * r * xr);
      if (c > -1.0 && c < 1.0) {
        soft.push_back(std::acos(c));
        soft.push_back(-std::acos(c));
      }
    }
    auto pts = detail::graded_breaks(-W, W, sing, 0.5 * t);
    if (has_g) {
      const auto around_xi = detail::graded_breaks(-W, W, {0.0}, 0.25 * gc);
      pts.insert(pts.end(), around_xi.begin(), around_xi.end());
    }
    for (double sp : soft) {
      if (sp > -W && sp < W) pts.push_back(sp);
    }
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < pts.size(); ++c) {
      const double a = pts[c], b = pts[c + 1];
      if (!(b > a)) continue;
      const double m = 0.5 * (a + b), h = 0.5 * (b - a);
      double part = 0.0;
      for (std::size_t q = 0; q < n; ++q) part += rule.weights[q] * integrand(t, m + h * rule.nodes[q]);
      acc += h * part;
    }
    return acc;
  };
  const double T = std::min(rho, 1.0);
  std::vector<double> tsing{0.0};
  if (rho <= 1.0) tsing.push_back(T);  // extent closes like a square root
  if (rho > 1.0 && rho < 2.0) tsing.push_back(2.0 - rho);
  if (has_g) {
    for (double r : {xr - gc, xr, xr + gc}) {
      if (1.0 - r > 0.0 && 1.0 - r < T) tsing.push_back(1.0 - r);
    }
    // where the flat disc meets the cap boundary
    const double x = (1.0 - xr * xr - rho * rho + gc * gc) / (2.0 * (1.0 - xr));
    const double y2 = rho * rho - (x - 1.0) * (x - 1.0);
    if (y2 >= 0.0) {
      const double tc = 1.0 - std::hypot(x, std::sqrt(y2));
      if (tc > 0.0 && tc < T) tsing.push_back(tc);
    }
  }
  auto tpts = detail::graded_breaks(0.0, T, tsing, 1e-13 * T);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < tpts.size(); ++c) {
    const double a = tpts[c], b = tpts[c + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b), h = 0.5 * (b - a);
    double part = 0.0;
    for (std::size_t q = 0; q < n; ++q) part += rule.weights[q] * over_w(m + h * rule.nodes[q]);
    total += h * part;
  }
  return total;
}

struct FoldingVerdict {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double scale = 0.0;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const FoldingVerdict& v) {
  j = {{"lhs", v.lhs}, {"rhs", v.rhs}, {"margin", v.margin}, {"scale", v.scale}, {"pass", v.pass}};
}

/// lhs with beta itself, rhs with all of beta's mass at theta*.  PASS if
/// rhs - lhs >= -3 quad_tol max(lhs, rhs).
inline FoldingVerdict check_folding_inequality(const FoldingInstance& in, double quad_tol = 1e-6) {
  validate(in);
  FoldingVerdict v;
  const BoundaryMeasure dirac({{wrap_angle(in.theta_star), in.beta_mass()}});
  v.lhs = folding_integral(in, in.beta, quad_tol);
  v.rhs = folding_integral(in, dirac, quad_tol);
  v.margin = v.rhs - v.lhs;
  v.scale = std::max(v.lhs, v.rhs);
  v.pass = v.margin >= -3.0 * quad_tol * v.scale;
  return v;
}

struct ChainReport {
  std::vector<double> integrals;
  std::vector<double> support_widths;
  double worst_step = 0.0;  // most negative increment relative to the scale
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const ChainReport& c) {
  j = {{"integrals", c.integrals}, {"support_widths", c.support_widths}, {"worst_step", c.worst_step},
       {"pass", c.pass}};
}

/// Integrals along fold_sequence; PASS if each step is non-decreasing to
/// within 3 quad_tol of the scale.
inline ChainReport check_monotone_chain(const FoldingInstance& in, double quad_tol = 1e-6) {
  validate(in);
  ChainReport rep;
  for (const auto& mu : fold_sequence(in.beta, in.theta_star, in.delta)) {
    rep.integrals.push_back(folding_integral(in, mu, quad_tol));
    rep.support_widths.push_back(support_width(mu, in.theta_star));
  }
  const double scale = *std::max_element(rep.integrals.begin(), rep.integrals.end());
  for (std::size_t i = 1; i < rep.integrals.size(); ++i) {
    rep.worst_step = std::min(rep.worst_step, (rep.integrals[i] - rep.integrals[i - 1]) / scale);
  }
  rep.pass = rep.worst_step >= -3.0 * quad_tol;
  return rep;
}

/// A random instance from the catalogue, with p alpha <= 2.
inline FoldingInstance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  FoldingInstance in;
  in.theta_star = wrap_angle(kPi * (2.0 * U(rng) - 1.0));
  in.delta = 0.05 + (0.5 * kPi - 0.05) * U(rng);
  const int n = 1 + static_cast<int>(8 * U(rng));
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({wrap_angle(in.theta_star + in.delta * (4.0 * U(rng) - 2.0)), 0.1 + 0.9 * U(rng)});
  }
  in.beta = BoundaryMeasure(std::move(atoms));
  in.alpha = 1.0 + (8.0 / 3.0 - 1.0) * U(rng);
  in.g = U(rng) < 0.5 ? GKind::zero : GKind::truncated_inverse;
  in.xi_radius = 0.5 + 0.45 * U(rng);
  in.p = (0.1 + 0.9 * U(rng)) * std::min(17.0 / 6.0, 2.0 / in.alpha);
  in.cap_radius = 0.1 + 1.9 * U(rng);
  return in;
}

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<FoldingInstance> instances;
  std::vector<FoldingVerdict> verdicts;
  bool pass = false;
};

/// n seeded random instances, checked `jobs` at a time.
inline SuiteReport run_folding_suite(int n, std::uint64_t seed, double quad_tol = 1e-6, unsigned jobs = 1) {
  SuiteReport rep;
  rep.seed = seed;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) rep.instances.push_back(random_instance(rng));
  rep.verdicts.resize(rep.instances.size());
  jobs = std::max(1u, jobs);
  for (std::size_t b = 0; b < rep.instances.size(); b += jobs) {
    std::vector<std::future<void>> fut;
    for (std::size_t i = b; i < std::min(rep.instances.size(), b + jobs); ++i) {
      fut.push_back(std::async(std::launch::async,
                               [&, i] { rep.verdicts[i] = check_folding_inequality(rep.instances[i], quad_tol); }));
    }
    for (auto& f : fut) f.get();
  }
  rep.pass = std::all_of(rep.verdicts.begin(), rep.verdicts.end(), [](const auto& v) { return v.pass; });
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const FoldingInstance& in) {
  auto atoms = nlohmann::json::array();
  for (const auto& a : in.beta.atoms()) atoms.push_back({a.theta, a.mass});
  j = {{"theta_star", in.theta_star}, {"delta", in.delta},        {"atoms", atoms},
       {"alpha", in.alpha},           {"f", "boundary_decay"},     {"g", to_string(in.g)},
       {"h", "power"},                {"p", in.p},                 {"cap_radius", in.cap_radius}};
  if (in.g == GKind::truncated_inverse) j["xi_radius"] = in.xi_radius;
}

inline void from_json(const nlohmann::json& j, FoldingInstance& in) {
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConstructionError(std::string("folding JSON: \"") + key + "\" must be a number");
    return j.at(key).get<double>();
  };
  if (!j.is_object() || !j.contains("atoms") || !j.at("atoms").is_array()) {
    throw ConstructionError("folding JSON: object with an \"atoms\" array of [theta, mass] pairs expected");
  }
  in = FoldingInstance{};
  in.theta_star = num("theta_star", 0.0);
  in.delta = num("delta", in.delta);
  in.alpha = num("alpha", in.alpha);
  in.p = num("p", in.p);
  in.cap_radius = num("cap_radius", in.cap_radius);
  in.xi_radius = num("xi_radius", in.xi_radius);
  const auto f = j.value("f", std::string("boundary_decay"));
  const auto g = j.value("g", std::string("zero"));
  const auto h = j.value("h", std::string("power"));
  if (f != "boundary_decay") throw ConstructionError("folding JSON: unknown f \"" + f + "\"");
  if (h != "power") throw ConstructionError("folding JSON: unknown h \"" + h + "\"");
  if (g == "zero") {
    in.g = GKind::zero;
  } else if (g == "truncated_inverse") {
    in.g = GKind::truncated_inverse;
  } else {
    throw ConstructionError("folding JSON: unknown g \"" + g + "\"");
  }
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) {
    if (!a.is_array() || a.size() != 2) throw ConstructionError("folding JSON: atoms are [theta, mass] pairs");
    atoms.push_back({a[0].get<double>(), a[1].get<double>()});
  }
  in.beta = BoundaryMeasure(std::move(atoms));
}

}  // namespace seuler
