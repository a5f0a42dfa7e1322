#pragma once

// Particle trajectories in disc coordinates and the boundary-approach bounds
// they are checked against.  Everything is expressed through l = ln d,
// d = 1 - |zeta|, so distances far below machine epsilon stay exact.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "seuler/errors.hpp"
#include "seuler/modulus.hpp"
#include "seuler/velocity.hpp"
#include "seuler/velocity_grid.hpp"

namespace seuler {

enum class Termination { horizon, boundary_eps, error };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::boundary_eps: return "boundary_eps";
    case Termination::error: return "error";
  }
  return "?";
}

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<cplx> positions;
  std::vector<double> d;
  std::vector<double> log_d;
  std::vector<double> phi;
  std::vector<double> rate;  // d'/d from the field at each sample
  Termination terminated = Termination::horizon;
  std::string message;
  std::size_t rejected = 0;

  std::size_t size() const { return times.size(); }

  void push(double t, double l, double ph, double a) {
    times.push_back(t);
    log_d.push_back(l);
    phi.push_back(ph);
    const double dd = std::exp(l);
    d.push_back(dd);
    positions.push_back(std::polar(1.0 - dd, ph));
    rate.push_back(a);
  }
};

/// Rates (dl/dt, dphi/dt) at (l, phi).
using RateField = std::function<std::array<double, 2>(double, double)>;

inline RateField grid_rates(const VelocityGrid& grid) {
  return [&grid](double l, double ph) -> std::array<double, 2> {
    const auto [a, t] = grid.components_at(l, ph);
    return {a, t / (1.0 - std::exp(l))};
  };
}

/// Direct quadrature at every stage; only for short runs and tests.
inline RateField direct_rates(BiotSavart& bs) {
  return [&bs](double l, double ph) -> std::array<double, 2> {
    const double d = std::exp(l);
    const auto f = bs.evaluate(std::polar(1.0 - d, ph));
    return {f.dprime_direct / d, f.tangential / (1.0 - d)};
  };
}

struct TrajectoryOptions {
  double horizon = 10.0;
  double eps_stop = 1e-6;
  double tol = 1e-8;
  std::size_t max_steps = 2000000;
  double first_step = 0.0;  // 0: chosen from the step ceiling
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP54 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive Dormand-Prince integration of dzeta/dt in (ln d, phi) with local
/// error `tol` and the ceiling dt <= 0.1 d / |v|.  Stops at the horizon or
/// when d < eps_stop; a failed field lookup ends the record with
/// terminated = error and the lookup's message.
inline TrajectoryRecord integrate_trajectory(const RateField& field, cplx zeta0, const TrajectoryOptions& opt) {
  if (!(std::abs(zeta0) < 1.0 - opt.eps_stop)) {
    throw DomainError("integrate_trajectory: |zeta0| must be < 1 - eps_stop");
  }
  if (opt.tol < 1e-10 || opt.tol > 1e-4) throw DomainError("integrate_trajectory: tol must lie in [1e-10, 1e-4]");
  if (!(opt.horizon > 0.0)) throw DomainError("integrate_trajectory: horizon must be positive");
  using D = detail::DP54;
  TrajectoryRecord rec;
  double t = 0.0;
  std::array<double, 2> y{std::log(1.0 - std::abs(zeta0)), std::arg(zeta0)};
  const double l_stop = std::log(opt.eps_stop);
  auto f = [&](const std::array<double, 2>& s) { return field(s[0], s[1]); };
  auto ceiling = [](const std::array<double, 2>& s, const std::array<double, 2>& k) {
    // |v|/d in these coordinates: sqrt(a^2 + (r phi'/d)^2).
    const double d = std::exp(s[0]);
    const double speed = std::hypot(k[0], (1.0 - d) * k[1] / d);
    return speed > 0.0 ? 0.1 / speed : std::numeric_limits<double>::infinity();
  };
  std::array<double, 2> k1;
  try {
    k1 = f(y);
  } catch (const DomainError& e) {
    rec.terminated = Termination::error;
    rec.message = e.what();
    return rec;
  }
  rec.push(t, y[0], y[1], k1[0]);
  double h = opt.first_step > 0.0 ? opt.first_step : std::min(opt.horizon, ceiling(y, k1));
  if (!std::isfinite(h)) h = opt.horizon;
  std::size_t steps = 0;
  while (t < opt.horizon) {
    if (++steps > opt.max_steps) {
      rec.terminated = Termination::error;
      rec.message = "step limit reached";
      return rec;
    }
    h = std::min({h, ceiling(y, k1), opt.horizon - t});
    std::array<double, 2> k2, k3, k4, k5, k6, k7, yn;
    try {
      auto at = [&](std::initializer_list<std::pair<double, const std::array<double, 2>*>> terms) {
        std::array<double, 2> s = y;
        for (const auto& [c, k] : terms) {
          s[0] += h * c * (*k)[0];
          s[1] += h * c * (*k)[1];
        }
        return s;
      };
      k2 = f(at({{D::a21, &k1}}));
      k3 = f(at({{D::a31, &k1}, {D::a32, &k2}}));
      k4 = f(at({{D::a41, &k1}, {D::a42, &k2}, {D::a43, &k3}}));
      k5 = f(at({{D::a51, &k1}, {D::a52, &k2}, {D::a53, &k3}, {D::a54, &k4}}));
      k6 = f(at({{D::a61, &k1}, {D::a62, &k2}, {D::a63, &k3}, {D::a64, &k4}, {D::a65, &k5}}));
      yn = at({{D::b1, &k1}, {D::b3, &k3}, {D::b4, &k4}, {D::b5, &k5}, {D::b6, &k6}});
      k7 = f(yn);
    } catch (const DomainError& e) {
      // A stage left the grid; retry smaller unless the step is already tiny.
      if (h < 1e-12 * std::max(1.0, t)) {
        rec.terminated = Termination::error;
        rec.message = e.what();
        return rec;
      }
      h *= 0.25;
      ++rec.rejected;
      continue;
    }
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] + D::e6 * k6[i] +
                            D::e7 * k7[i]);
      const double sc = opt.tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      ++rec.rejected;
      continue;
    }
    t = (opt.horizon - t - h <= 1e-14 * opt.horizon) ? opt.horizon : t + h;
    y = yn;
    k1 = k7;
    rec.push(t, y[0], y[1], k1[0]);
    if (y[0] < l_stop) {
      rec.terminated = Termination::boundary_eps;
      return rec;
    }
    h *= err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
  }
  rec.terminated = Termination::horizon;
  return rec;
}

inline TrajectoryRecord integrate_trajectory(const VelocityGrid& grid, cplx zeta0, const TrajectoryOptions& opt) {
  return integrate_trajectory(grid_rates(grid), zeta0, opt);
}

inline void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << "t,re,im,d\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rec.size(); ++i) {
    os << rec.times[i] << ',' << rec.positions[i].real() << ',' << rec.positions[i].imag() << ',' << rec.d[i]
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// Comparison ODE

enum class ComparisonForm {
  plain,     // d' = -c q_m(d)
  weighted,  // d' = -c q_m(d) int_d^1 ds/q_m
};

struct ComparisonCurve {
  ComparisonForm form = ComparisonForm::plain;
  double c = 1.0;
  std::vector<double> times;
  std::vector<double> log_d;
  std::vector<double> d;
  double arrival_time = std::numeric_limits<double>::quiet_NaN();  // convergent class only
};

/// Exact solution by inversion of t(d).  The convergent class uses the plain
/// form, whose arrival time is t* = (1/c) int_0^{d0} ds/q_m; the divergent
/// class uses the weighted form, for which y = ln int_d^1 ds/q_m grows as
/// y(d0) + c t.
inline ComparisonCurve comparison_ode(const Modulus& m, double c, double d0, double horizon, int n_samples = 200) {
  if (!(d0 > 0.0 && d0 < 1.0)) throw DomainError("comparison_ode: d0 must lie in (0, 1)");
  if (!(c > 0.0)) throw DomainError("comparison_ode: c must be positive");
  if (!(horizon > 0.0) || n_samples < 1) throw DomainError("comparison_ode: horizon and n_samples must be positive");
  const RateFunctions rf(m);
  ComparisonCurve out;
  out.c = c;
  const double u0 = std::log(1.0 / d0);
  const double g0 = rf.inverse_q_integral_u(u0);
  const bool convergent = rf.classify().divergence == DivergenceClass::convergent;
  double t_end = horizon;
  double total = std::numeric_limits<double>::infinity();
  if (convergent) {
    out.form = ComparisonForm::plain;
    total = rf.total_inverse_q_integral();
    out.arrival_time = (total - g0) / c;
    t_end = std::min(horizon, out.arrival_time);
  } else {
    out.form = ComparisonForm::weighted;
  }
  for (int i = 0; i <= n_samples; ++i) {
    const double t = t_end * i / n_samples;
    double l;
    if (convergent) {
      const double g = g0 + c * t;
      l = (g >= total) ? -std::numeric_limits<double>::infinity() : -rf.rho_log_inverse(std::log(g));
    } else {
      l = -rf.rho_log_inverse(std::log(g0) + c * t);
    }
    if (i == 0) l = -u0;
    out.times.push_back(t);
    out.log_d.push_back(l);
    out.d.push_back(std::exp(l));
  }
  return out;
}

/// A comparison curve as a trajectory on the positive real axis.
inline TrajectoryRecord as_record(const ComparisonCurve& cc) {
  TrajectoryRecord rec;
  for (std::size_t i = 0; i < cc.times.size(); ++i) {
    if (!std::isfinite(cc.log_d[i])) {
      rec.terminated = Termination::boundary_eps;
      return rec;
    }
    rec.push(cc.times[i], cc.log_d[i], 0.0, std::numeric_limits<double>::quiet_NaN());
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Bound verification in y = ln int_d^1 ds/q_m coordinates

struct BoundReport {
  std::string bound;  // lower | upper | arrival
  double C_fit = 0.0;
  double c0_fit = 0.0;
  double c_fit = 0.0;
  double margin = 0.0;
  double margin_at_500 = 0.0;  // lower bound only, with the paper's constant
  double c_origin = 0.0;       // upper bound only: min over the tail of (y + 1e-3)/t
  std::size_t tail_samples = 0;
  bool pass = false;
  bool inconclusive = false;
  std::string note;
  std::vector<double> y;
};

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  j = {{"bound", r.bound},   {"C_fit", r.C_fit},   {"c0_fit", r.c0_fit},      {"c_fit", r.c_fit},
       {"margin", r.margin}, {"pass", r.pass},     {"inconclusive", r.inconclusive},
       {"tail_samples", r.tail_samples}};
  if (r.bound == "lower") j["margin_at_500"] = r.margin_at_500;
  if (r.bound == "upper") j["c_origin"] = r.c_origin;
  if (!r.note.empty()) j["note"] = r.note;
}

inline std::vector<double> transformed_curve(const TrajectoryRecord& rec, const Modulus& m) {
  const RateFunctions rf(m);
  std::vector<double> y(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) y[i] = rf.y_of_log_distance(rec.log_d[i]);
  return y;
}

namespace detail {

inline void require_divergent(const Modulus& m, const char* what) {
  if (RateFunctions(m).classify().divergence != DivergenceClass::divergent) {
    throw DomainError(std::string(what) + ": modulus is in the convergent class; the bound form does not apply");
  }
}

}  // namespace detail

/// Smallest (C_fit, c0_fit) with y(t) <= C_fit sup_norm t + c0_fit on every
/// sample, anchored at c0_fit = y(0).  PASS if C_fit <= 500 and the bound
/// holds to 1e-3.
inline BoundReport verify_lower_bound(const TrajectoryRecord& rec, const Modulus& m, double sup_norm) {
  detail::require_divergent(m, "verify_lower_bound");
  if (rec.size() == 0) throw DomainError("verify_lower_bound: empty record");
  BoundReport r;
  r.bound = "lower";
  r.y = transformed_curve(rec, m);
  r.c0_fit = r.y[0];
  double slope = 0.0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    const double dt = rec.times[i] - rec.times[0];
    if (dt > 0.0) slope = std::max(slope, (r.y[i] - r.c0_fit) / dt);
  }
  if (sup_norm > 0.0) {
    r.C_fit = slope / sup_norm;
  } else {
    r.C_fit = 0.0;
    if (slope > 0.0) r.note = "y grows under a zero field";
  }
  r.margin = std::numeric_limits<double>::infinity();
  r.margin_at_500 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double dt = rec.times[i] - rec.times[0];
    r.margin = std::min(r.margin, r.C_fit * sup_norm * dt + r.c0_fit - r.y[i]);
    r.margin_at_500 = std::min(r.margin_at_500, 500.0 * sup_norm * dt + r.c0_fit - r.y[i]);
  }
  r.tail_samples = rec.size();
  r.pass = r.C_fit <= 500.0 && r.margin >= -1e-3;
  return r;
}

/// Largest c_fit with y(t) >= y(t_s) + c_fit (t - t_s) over the tail half
/// t >= t_s = t_end / 2 (samples within 5% of the tail length after t_s are
/// not used for the slope).  PASS if c_fit > 0.
inline BoundReport verify_upper_bound(const TrajectoryRecord& rec, const Modulus& m, std::size_t min_tail = 100) {
  detail::require_divergent(m, "verify_upper_bound");
  BoundReport r;
  r.bound = "upper";
  if (rec.size() < 2) {
    r.inconclusive = true;
    r.note = "record too short";
    return r;
  }
  r.y = transformed_curve(rec, m);
  const double t_end = rec.times.back();
  const double t_s = rec.times.front() + 0.5 * (t_end - rec.times.front());
  std::size_t s = 0;
  while (s < rec.size() && rec.times[s] < t_s) ++s;
  r.tail_samples = rec.size() - s;
  if (r.tail_samples < min_tail) {
    r.inconclusive = true;
    r.note = "fewer than " + std::to_string(min_tail) + " samples in the tail half";
    return r;
  }
  const double ts = rec.times[s];
  const double ys = r.y[s];
  const double skip = 0.05 * (t_end - ts);
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = s + 1; i < rec.size(); ++i) {
    const double dt = rec.times[i] - ts;
    if (dt >= skip && dt > 0.0) c = std::min(c, (r.y[i] - ys) / dt);
  }
  if (!std::isfinite(c)) c = 0.0;
  r.c_fit = std::max(c, 0.0);
  r.c0_fit = ys - r.c_fit * ts;
  r.c_origin = std::numeric_limits<double>::infinity();
  for (std::size_t i = s; i < rec.size(); ++i) {
    if (rec.times[i] > 0.0) r.c_origin = std::min(r.c_origin, (r.y[i] + 1e-3) / rec.times[i]);
  }
  r.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = s; i < rec.size(); ++i) {
    r.margin = std::min(r.margin, r.y[i] - (ys + r.c_fit * (rec.times[i] - ts)));
  }
  r.pass = r.c_fit > 0.0 && r.margin >= -1e-3;
  return r;
}

/// Finite-time arrival in the convergent class: c_fit is the largest c with
/// -d'(t) >= c q_m(d(t)) over the tail half, using the field's d'; the
/// margin checks the same inequality with d' from finite differences of the
/// recorded d.  PASS if the run reached eps_stop, c_fit > 0 and the margin
/// is at least -5% (relative).
inline BoundReport verify_arrival(const TrajectoryRecord& rec, const Modulus& m) {
  BoundReport r;
  r.bound = "arrival";
  const RateFunctions rf(m);
  if (rec.size() < 3) {
    r.inconclusive = true;
    r.note = "record too short";
    return r;
  }
  const double t_end = rec.times.back();
  const double t_s = rec.times.front() + 0.5 * (t_end - rec.times.front());
  std::size_t s = 1;
  while (s + 1 < rec.size() && rec.times[s] < t_s) ++s;
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = s; i < rec.size(); ++i) {
    const double q = std::exp(rec.log_d[i] + rf.log_Q_u(-rec.log_d[i]));
    c = std::min(c, -rec.rate[i] * rec.d[i] / q);
  }
  r.c_fit = c;
  r.margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = std::max<std::size_t>(s, 1); i + 1 < rec.size(); ++i) {
    // d' = d (ln d)' by a three-point difference on the uneven time grid.
    const double h0 = rec.times[i] - rec.times[i - 1], h1 = rec.times[i + 1] - rec.times[i];
    const double dl = (rec.log_d[i + 1] - rec.log_d[i]) * h0 / (h1 * (h0 + h1)) +
                      (rec.log_d[i] - rec.log_d[i - 1]) * h1 / (h0 * (h0 + h1));
    const double q = std::exp(rec.log_d[i] + rf.log_Q_u(-rec.log_d[i]));
    r.margin = std::min(r.margin, (-dl * rec.d[i] - c * q) / (c * q));
    ++r.tail_samples;
  }
  const bool arrived = rec.terminated == Termination::boundary_eps;
  if (!arrived) r.note = "run did not reach eps_stop";
  r.pass = arrived && r.c_fit > 0.0 && r.margin >= -0.05;
  return r;
}

// ---------------------------------------------------------------------------
// Two-path check of the normal rate

struct DprimeCheck {
  cplx zeta;
  double direct = 0.0;
  double integrand = 0.0;
  double rel = 0.0;
};

inline std::vector<DprimeCheck> check_dprime_integrand(const ConformalDomain& dom, const VorticityField& w,
                                                       const std::vector<cplx>& zetas,
                                                       const VelocityOptions& opt = {}) {
  BiotSavart bs(dom, w, opt);
  std::vector<DprimeCheck> out;
  for (cplx z : zetas) {
    if (z == cplx(0.0)) throw DomainError("check_dprime_integrand: zeta = 0 has no normal direction");
    const auto f = bs.evaluate(z);
    const double scale = std::max(std::abs(f.dprime_direct), std::abs(f.dprime));
    out.push_back({z, f.dprime_direct, f.dprime, scale > 0.0 ? std::abs(f.dprime - f.dprime_direct) / scale : 0.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weighted kernel integral against Q_m(1 - |xi|) (int ds/(s Q_m) + C_T)

struct Lemma31Sample {
  cplx xi;
  double dist = 0.0;  // 1 - |xi|
  double lhs = 0.0;
  double Q = 0.0;
  double F = 0.0;     // int_dist^1 ds/(s Q_m(s))
  double ratio = 0.0; // lhs / (Q (F + 1))
  double error = 0.0;
  bool ok = true;
  std::string message;
};

struct Lemma31Report {
  std::vector<Lemma31Sample> samples;
  double C_fit = 0.0;
  double C_T_fit = 0.0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const Lemma31Sample& s) {
  j = {{"re", s.xi.real()}, {"im", s.xi.imag()}, {"dist", s.dist}, {"lhs", s.lhs}, {"Q", s.Q},
       {"F", s.F},          {"ratio", s.ratio},  {"error", s.error}, {"ok", s.ok}};
  if (!s.message.empty()) j["message"] = s.message;
}

inline void to_json(nlohmann::json& j, const Lemma31Report& r) {
  j = {{"samples", r.samples},           {"C_fit", r.C_fit},         {"C_T_fit", r.C_T_fit},
       {"max_ratio", r.max_ratio},       {"median_ratio", r.median_ratio}, {"pass", r.pass}};
}

/// (1/det(xi)) int_D (1-|z|) |Im(conj(xi) z)| / (|xi-z|^2 ||z|^2 xi - z|^2) det(z) dz.
inline double lemma31_lhs(BiotSavart& bs, cplx xi, double* err = nullptr) {
  auto fn = [xi](cplx z, double det) {
    const double num = (1.0 - std::abs(z)) * std::abs(std::imag(std::conj(xi) * z));
    const double den = std::norm(xi - z) * std::norm(std::norm(z) * xi - z);
    return KernelSample{cplx(0.0), den > 0.0 ? num / den * det : 0.0};
  };
  double e = 0.0;
  const double v = bs.integrate_with(xi, fn, false, &e).n;
  const double det = bs.domain().det_ds(xi);
  if (err) *err = e / det;
  return v / det;
}

/// Evaluates the left side per xi (concurrently, `jobs` workers) and fits
/// lhs/Q = C F + C C_T by least squares.  PASS if the largest ratio is within
/// twice the median and C_fit < 500.
inline Lemma31Report check_lemma31(const ConformalDomain& dom, const Modulus& m, const std::vector<cplx>& xis,
                                   const VelocityOptions& opt = {}, unsigned jobs = 1) {
  for (cplx xi : xis) {
    const double r = std::abs(xi);
    if (r < 0.5 || 1.0 - r < 1e-4 * (1.0 - 1e-9)) throw DomainError("check_lemma31: |xi| must lie in [1/2, 1 - 1e-4]");
  }
  const RateFunctions rf(m);
  Lemma31Report rep;
  rep.samples.resize(xis.size());
  auto work = [&](std::size_t i) {
    Lemma31Sample& s = rep.samples[i];
    s.xi = xis[i];
    s.dist = 1.0 - std::abs(s.xi);
    s.Q = rf.Q(s.dist);
    s.F = rf.inverse_q_integral(s.dist);
    try {
      BiotSavart bs(dom, VorticityField::constant(1.0), opt);
      s.lhs = lemma31_lhs(bs, s.xi, &s.error);
      s.ok = std::isfinite(s.lhs);
      if (!s.ok) s.message = "non-finite quadrature result";
    } catch (const std::exception& e) {
      s.ok = false;
      s.message = e.what();
    }
    s.ratio = s.lhs / (s.Q * (s.F + 1.0));
  };
  jobs = std::max(1u, jobs);
  for (std::size_t b = 0; b < xis.size(); b += jobs) {
    std::vector<std::future<void>> fut;
    for (std::size_t i = b; i < std::min(xis.size(), b + jobs); ++i) fut.push_back(std::async(std::launch::async, work, i));
    for (auto& f : fut) f.get();
  }
  std::vector<double> ratios;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& s : rep.samples) {
    if (!s.ok) continue;
    ratios.push_back(s.ratio);
    const double y = s.lhs / s.Q;
    sx += s.F;
    sy += y;
    sxx += s.F * s.F;
    sxy += s.F * y;
    ++n;
  }
  if (ratios.empty()) return rep;
  std::sort(ratios.begin(), ratios.end());
  const std::size_t h = ratios.size() / 2;
  rep.median_ratio = ratios.size() % 2 ? ratios[h] : 0.5 * (ratios[h - 1] + ratios[h]);
  rep.max_ratio = ratios.back();
  const double den = n * sxx - sx * sx;
  if (n >= 2 && std::abs(den) > 1e-300) {
    rep.C_fit = (n * sxy - sx * sy) / den;
    const double b = (sy - rep.C_fit * sx) / n;
    rep.C_T_fit = rep.C_fit != 0.0 ? b / rep.C_fit : 0.0;
  } else {
    rep.C_fit = sy / std::max(sx, 1e-300);
  }
  const bool all_ok = std::all_of(rep.samples.begin(), rep.samples.end(), [](const auto& s) { return s.ok; });
  rep.pass = all_ok && rep.max_ratio <= 2.0 * rep.median_ratio && rep.C_fit < 500.0;
  return rep;
}

}  // namespace seuler
