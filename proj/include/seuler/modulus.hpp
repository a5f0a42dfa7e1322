#pragma once

// Moduli of continuity m : [0, 2*pi] -> [0, inf) and the rate functions
//
//   q_m(s) = s * exp((2/pi) * int_s^1 m(r)/r dr),   Q_m(s) = q_m(s) / s,
//   rho_m  = inverse of y -> ln int_y^1 ds / q_m(s).
//
// Everything below the public surface is written in the logarithmic variable
// u = ln(1/s), which keeps q_m and the integrals representable far below the
// double-precision underflow threshold of s itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "seuler/errors.hpp"
#include "seuler/quadrature.hpp"

namespace seuler {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ModulusFamily { zero, linear, capped_log, iterated_log, tabulated };

inline const char* to_string(ModulusFamily f) {
  switch (f) {
    case ModulusFamily::zero: return "zero";
    case ModulusFamily::linear: return "linear";
    case ModulusFamily::capped_log: return "capped_log";
    case ModulusFamily::iterated_log: return "iterated_log";
    case ModulusFamily::tabulated: return "tabulated";
  }
  return "?";
}

using Knot = std::pair<double, double>;

class Modulus {
 public:
  Modulus() = default;

  static Modulus zero() { return Modulus{}; }

  static Modulus linear(double slope) {
    if (!(slope >= 0.0) || !std::isfinite(slope)) {
      throw ConstructionError("linear modulus: slope must be finite and >= 0");
    }
    Modulus m;
    m.family_ = ModulusFamily::linear;
    m.param_ = slope;
    return m;
  }

  /// m(r) = a / ln(1/r) for r <= e^-2, a/2 beyond.
  static Modulus capped_log(double a) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw ConstructionError("capped_log modulus: a must be finite and > 0");
    }
    Modulus m;
    m.family_ = ModulusFamily::capped_log;
    m.param_ = a;
    m.depth_ = 2;
    return m;
  }

  /// For r <= r*:  m(r) = a / (L1 ... L_{k-1}) + (pi/2) sum_{j=1}^{k-2} 1/(L1 ... Lj)
  /// with L_j the j-fold logarithm of 1/r; constant m(r*) beyond r*, where
  /// L_{k-1}(1/r*) = 2.  Depth k = 2 coincides with capped_log.  Depth 4 would
  /// put r* near e^-1618, below the double range, so k is limited to {2, 3}.
  static Modulus iterated_log(int k, double a) {
    if (k < 2 || k > 3) {
      throw ConstructionError("iterated_log modulus: depth k must be 2 or 3 (k >= 4 underflows)");
    }
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ConstructionError("iterated_log modulus: a must be finite and >= 0");
    }
    Modulus m;
    m.family_ = ModulusFamily::iterated_log;
    m.param_ = a;
    m.depth_ = k;
    return m;
  }

  /// Piecewise-linear interpolant of (r, m(r)) knots, constant past the last
  /// knot.  A (0, 0) knot is prepended when missing.  Monotonicity and
  /// concavity are NOT enforced here; see validate_modulus.
  static Modulus tabulated(std::vector<Knot> knots) {
    if (knots.empty()) throw ConstructionError("tabulated modulus: no knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      const auto [r, v] = knots[i];
      if (!std::isfinite(r) || !std::isfinite(v) || r < 0.0 || r > kTwoPi + 1e-12) {
        throw ConstructionError("tabulated modulus: knot outside [0, 2pi]");
      }
      if (i > 0 && !(r > knots[i - 1].first)) {
        throw ConstructionError("tabulated modulus: knots must be strictly ascending in r");
      }
    }
    if (knots.front().first > 0.0) knots.insert(knots.begin(), Knot{0.0, 0.0});
    if (knots.front().second != 0.0) {
      throw ConstructionError("tabulated modulus: m(0) must be 0");
    }
    Modulus m;
    m.family_ = ModulusFamily::tabulated;
    m.knots_ = std::move(knots);
    m.build_cumulative();
    return m;
  }

  ModulusFamily family() const { return family_; }
  double slope() const { return param_; }
  double a() const { return param_; }
  int depth() const { return depth_; }
  const std::vector<Knot>& knots() const { return knots_; }

  /// Cap point u* = ln(1/r*) of the logarithmic families.
  double cap_u() const {
    if (family_ == ModulusFamily::capped_log) return 2.0;
    if (family_ == ModulusFamily::iterated_log) return depth_ == 2 ? 2.0 : std::exp(2.0);
    return 0.0;
  }

  double operator()(double r) const {
    if (!(r >= 0.0) || r > kTwoPi * (1.0 + 1e-12)) {
      throw DomainError("modulus evaluated outside [0, 2pi]: r = " + std::to_string(r));
    }
    if (r == 0.0) return 0.0;
    switch (family_) {
      case ModulusFamily::zero: return 0.0;
      case ModulusFamily::linear: return param_ * r;
      case ModulusFamily::capped_log:
      case ModulusFamily::iterated_log: return log_family_value(std::log(1.0 / r));
      case ModulusFamily::tabulated: return table_value(r);
    }
    return 0.0;
  }

  /// Value as a function of u = ln(1/r), usable where r underflows.
  double value_u(double u) const {
    switch (family_) {
      case ModulusFamily::zero: return 0.0;
      case ModulusFamily::linear: return param_ * std::exp(-u);
      case ModulusFamily::capped_log:
      case ModulusFamily::iterated_log: return log_family_value(u);
      case ModulusFamily::tabulated: return table_value(std::exp(-u));
    }
    return 0.0;
  }

  /// Lambda(u) = int_{e^-u}^1 m(r)/r dr for u >= 0, in closed form.
  double log_integral(double u) const {
    if (u <= 0.0) return 0.0;
    switch (family_) {
      case ModulusFamily::zero: return 0.0;
      case ModulusFamily::linear: return -param_ * std::expm1(-u);
      case ModulusFamily::capped_log: return capped_log_integral(u);
      case ModulusFamily::iterated_log:
        return depth_ == 2 ? capped_log_integral(u) : iterated3_integral(u);
      case ModulusFamily::tabulated: return table_log_integral(std::exp(-u));
    }
    return 0.0;
  }

  /// Points in u where the integrands built on this modulus have kinks.
  std::vector<double> u_breaks() const {
    std::vector<double> out;
    if (family_ == ModulusFamily::capped_log || family_ == ModulusFamily::iterated_log) {
      out.push_back(cap_u());
    } else if (family_ == ModulusFamily::tabulated) {
      for (const auto& [r, v] : knots_) {
        if (r > 0.0 && r < 1.0) out.push_back(std::log(1.0 / r));
      }
    }
    return out;
  }

  /// True when concavity holds by construction (zero, linear, capped_log) or
  /// the knot slopes are non-increasing (tabulated).  The depth-3 iterated
  /// family is checked numerically.
  bool is_concave() const {
    switch (family_) {
      case ModulusFamily::zero:
      case ModulusFamily::linear:
      case ModulusFamily::capped_log: return true;
      case ModulusFamily::iterated_log: return numerically_concave();
      case ModulusFamily::tabulated: {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < knots_.size(); ++i) {
          const double s = (knots_[i].second - knots_[i - 1].second) /
                           (knots_[i].first - knots_[i - 1].first);
          if (s > prev * (1.0 + 1e-9) + 1e-12) return false;
          prev = s;
        }
        return true;
      }
    }
    return false;
  }

 private:
  double log_family_value(double u) const {
    const double uc = std::max(u, cap_u());
    if (depth_ == 2) return param_ / uc;
    const double l2 = std::log(uc);
    return param_ / (uc * l2) + 0.5 * kPi / uc;
  }

  double capped_log_integral(double u) const {
    const double a = param_;
    if (u <= 2.0) return 0.5 * a * u;
    return a + a * std::log(0.5 * u);
  }

  double iterated3_integral(double u) const {
    const double uc = std::exp(2.0);
    const double mstar = log_family_value(uc);
    if (u <= uc) return mstar * u;
    return mstar * uc + param_ * (std::log(std::log(u)) - std::log(2.0)) +
           0.5 * kPi * (std::log(u) - 2.0);
  }

  double table_value(double r) const {
    if (r >= knots_.back().first) return knots_.back().second;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), r,
                               [](double x, const Knot& k) { return x < k.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (r - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
  }

  // int_x^y (alpha + beta r)/r dr on one linear piece (alpha = 0 through the origin).
  double piece_integral(std::size_t i, double x, double y) const {
    if (y <= x) return 0.0;
    const double r0 = knots_[i].first;
    const double r1 = knots_[i + 1].first;
    const double beta = (knots_[i + 1].second - knots_[i].second) / (r1 - r0);
    const double alpha = knots_[i].second - beta * r0;
    if (x == 0.0) return beta * y;
    return (alpha == 0.0 ? 0.0 : alpha * std::log(y / x)) + beta * (y - x);
  }

  // cum_[i] = int_{r_i}^{1} m(r)/r dr for knots r_i < 1.
  void build_cumulative() {
    cum_.assign(knots_.size(), 0.0);
    for (std::size_t i = knots_.size(); i-- > 0;) {
      const double r = knots_[i].first;
      if (r == 0.0 || r >= 1.0) continue;
      if (i + 1 < knots_.size()) {
        const double next = knots_[i + 1].first;
        cum_[i] = piece_integral(i, r, std::min(next, 1.0)) + (next < 1.0 ? cum_[i + 1] : 0.0);
      } else {
        cum_[i] = knots_.back().second * std::log(1.0 / r);
      }
    }
  }

  double table_log_integral(double s) const {
    if (s >= 1.0) return 0.0;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                               [](double x, const Knot& k) { return x < k.first; });
    if (it == knots_.end()) return knots_.back().second * std::log(1.0 / s);
    const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    const double rhi = knots_[hi].first;
    if (rhi >= 1.0) return piece_integral(hi - 1, s, 1.0);
    return piece_integral(hi - 1, s, rhi) + cum_[hi];
  }

  bool numerically_concave() const {
    // Second differences on a grid uniform in ln r plus a uniform grid.
    std::vector<double> rs;
    for (double u = 60.0; u > 0.0; u -= 0.05) rs.push_back(std::exp(-u));
    for (int i = 1; i <= 400; ++i) rs.push_back(kTwoPi * i / 400.0);
    std::sort(rs.begin(), rs.end());
    for (std::size_t i = 1; i + 1 < rs.size(); ++i) {
      const double x0 = rs[i - 1], x1 = rs[i], x2 = rs[i + 1];
      const double s1 = ((*this)(x1) - (*this)(x0)) / (x1 - x0);
      const double s2 = ((*this)(x2) - (*this)(x1)) / (x2 - x1);
      if (s2 > s1 * (1.0 + 1e-7) + 1e-12) return false;
    }
    return true;
  }

  ModulusFamily family_ = ModulusFamily::zero;
  double param_ = 0.0;
  int depth_ = 0;
  std::vector<Knot> knots_;
  std::vector<double> cum_;
};

inline double eval_modulus(const Modulus& m, double r) { return m(r); }

enum class DivergenceClass { divergent, convergent };
enum class DiniClass { dini, non_dini };

inline const char* to_string(DivergenceClass c) {
  return c == DivergenceClass::divergent ? "divergent" : "convergent";
}
inline const char* to_string(DiniClass c) { return c == DiniClass::dini ? "dini" : "non_dini"; }

struct Classification {
  DivergenceClass divergence = DivergenceClass::divergent;
  DiniClass dini = DiniClass::dini;
  bool numeric_heuristic = false;
};

/// Dyadic increments of a monotone integral together with the power-law
/// exponent they decay with.  Used to classify tabulated moduli and to
/// cross-check the analytic rule on the closed-form families.
struct DivergenceTrend {
  std::vector<int> k;
  std::vector<double> increments;       // int over [2^-k, 2^-(k-1)]
  std::vector<double> local_exponents;  // p_k from consecutive increments
  double exponent = 0.0;                // p_k extrapolated to k -> inf
  bool geometric = false;               // increments decay geometrically
  bool converges = false;
};

class RateFunctions {
 public:
  explicit RateFunctions(Modulus m) : m_(std::move(m)) {}

  const Modulus& modulus() const { return m_; }

  /// (2/pi) * int_{e^-u}^1 m(r)/r dr = ln Q_m(e^-u).
  double log_Q_u(double u) const { return (2.0 / kPi) * m_.log_integral(u); }

  double Q(double s) const {
    check_unit(s, "Q_m");
    return std::exp(log_Q_u(std::log(1.0 / s)));
  }

  double q(double s) const {
    check_unit(s, "q_m");
    return s * std::exp(log_Q_u(std::log(1.0 / s)));
  }

  /// F(u) = int_{e^-u}^1 ds / q_m(s) = int_0^u exp(-ln Q_m(e^-v)) dv.
  double inverse_q_integral_u(double u) const {
    if (u <= 0.0) return 0.0;
    auto g = [this](double v) { return std::exp(-log_Q_u(v)); };
    quad::Options opt;
    opt.rel_tol = 1e-12;
    opt.max_segments = 20000;
    return quad::integrate(g, 0.0, u, breaks_below(u), opt).value;
  }

  /// int_s^1 ds'/q_m(s'); equals int_s^1 ds'/(s' Q_m(s')).
  double inverse_q_integral(double s) const {
    check_unit(s, "inverse_q_integral");
    return inverse_q_integral_u(std::log(1.0 / s));
  }

  /// The transformed distance y = ln int_d^1 ds/q_m(s).
  double y_of_distance(double d) const { return std::log(inverse_q_integral(d)); }
  double y_of_log_distance(double log_d) const { return std::log(inverse_q_integral_u(-log_d)); }

  Classification classify() const {
    Classification c;
    switch (m_.family()) {
      case ModulusFamily::zero:
      case ModulusFamily::linear:
        c.divergence = DivergenceClass::divergent;
        c.dini = DiniClass::dini;
        break;
      case ModulusFamily::capped_log:
      case ModulusFamily::iterated_log:
        c.divergence = m_.a() <= 0.5 * kPi ? DivergenceClass::divergent : DivergenceClass::convergent;
        c.dini = (m_.family() == ModulusFamily::iterated_log && m_.a() == 0.0 && m_.depth() == 2)
                     ? DiniClass::dini
                     : DiniClass::non_dini;
        break;
      case ModulusFamily::tabulated: {
        c.numeric_heuristic = true;
        c.divergence = inverse_q_trend().converges ? DivergenceClass::convergent
                                                   : DivergenceClass::divergent;
        c.dini = dini_trend().converges ? DiniClass::dini : DiniClass::non_dini;
        break;
      }
    }
    return c;
  }

  /// int_0^1 ds/q_m(s); +inf in the divergent class.
  double total_inverse_q_integral() const {
    if (classify().divergence == DivergenceClass::divergent) {
      return std::numeric_limits<double>::infinity();
    }
    auto g = [this](double v) { return std::exp(-log_Q_u(v)); };
    quad::Options opt;
    opt.rel_tol = 1e-11;
    opt.max_segments = 20000;
    const double u0 = std::max(1.0, cap_or_last_break());
    const double head = quad::integrate(g, 0.0, u0, breaks_below(u0), opt).value;
    const double tail = quad::integrate_to_infinity(g, u0, opt).value;
    return head + tail;
  }

  /// rho_m(t): the y in (0,1) with ln int_y^1 ds/q_m = t.  Bisection in
  /// u = ln(1/y) until the residual of the defining equation is below 1e-12.
  double rho(double t) const { return std::exp(-rho_log_inverse(t)); }

  /// u = ln(1/rho_m(t)); stays finite when rho_m(t) itself underflows.
  double rho_log_inverse(double t) const {
    if (!std::isfinite(t)) throw DomainError("rho_m: t must be finite");
    const auto cls = classify().divergence;
    if (cls == DivergenceClass::convergent) {
      const double sup = std::log(total_inverse_q_integral());
      if (t >= sup) {
        throw UnrepresentableError("rho_m: t = " + std::to_string(t) +
                                   " is at or above the finite supremum " + std::to_string(sup) +
                                   " of ln int_y^1 ds/q_m (convergent class)");
      }
    }
    auto residual = [&](double u) { return std::log(inverse_q_integral_u(u)) - t; };
    double lo = 0.0;
    double hi = 1.0;
    while (residual(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw UnrepresentableError("rho_m: bracket exceeded the double range");
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
      mid = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
      const double r = residual(mid);
      if (std::abs(r) < 1e-12) break;
      if (r < 0.0) lo = mid; else hi = mid;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }
    return mid;
  }

  /// Dyadic increments of int_eps^1 ds/q_m over eps = 2^-k.
  DivergenceTrend inverse_q_trend(int kmax = 40) const {
    return trend(kmax, [this](double ua, double ub) {
      auto g = [this](double v) { return std::exp(-log_Q_u(v)); };
      quad::Options opt;
      opt.rel_tol = 1e-12;
      return quad::integrate(g, ua, ub, m_.u_breaks(), opt).value;
    });
  }

  /// Dyadic increments of int_eps^1 m(r)/r dr over eps = 2^-k.
  DivergenceTrend dini_trend(int kmax = 40) const {
    return trend(kmax, [this](double ua, double ub) {
      return m_.log_integral(ub) - m_.log_integral(ua);
    });
  }

 private:
  static void check_unit(double s, const char* what) {
    if (!(s > 0.0) || s > 1.0) {
      throw DomainError(std::string(what) + ": argument must lie in (0, 1]");
    }
  }

  double cap_or_last_break() const {
    const auto b = m_.u_breaks();
    return b.empty() ? 0.0 : *std::max_element(b.begin(), b.end());
  }

  std::vector<double> breaks_below(double u) const {
    std::vector<double> out;
    for (double b : m_.u_breaks()) {
      if (b < u) out.push_back(b);
    }
    return out;
  }

  template <typename Increment>
  static DivergenceTrend trend(int kmax, Increment&& inc) {
    DivergenceTrend tr;
    const double ln2 = std::log(2.0);
    for (int k = 1; k <= kmax; ++k) {
      tr.k.push_back(k);
      tr.increments.push_back(inc((k - 1) * ln2, k * ln2));
    }
    // Local exponent p_k from  inc_k ~ A (k - 1/2)^-p.
    std::vector<double> inv_k;
    for (std::size_t i = 0; i + 1 < tr.increments.size(); ++i) {
      const double a = tr.increments[i];
      const double b = tr.increments[i + 1];
      const double k = tr.k[i];
      double p = 0.0;
      if (a > 0.0 && b > 0.0) p = -std::log(b / a) / std::log((k + 0.5) / (k - 0.5));
      tr.local_exponents.push_back(p);
      inv_k.push_back(1.0 / k);
    }
    // Geometric decay: ratio stays below 0.9 over the upper half.
    const std::size_t n = tr.increments.size();
    bool geometric = n >= 4;
    for (std::size_t i = n / 2; i + 1 < n; ++i) {
      const double a = tr.increments[i];
      const double b = tr.increments[i + 1];
      if (!(a > 0.0) || b / a > 0.9) geometric = false;
    }
    if (n >= 4 && tr.increments[n / 2] == 0.0) geometric = true;  // identically zero tail
    tr.geometric = geometric;
    // Least-squares fit p_k = p + c/k over the upper half, intercept = p.
    const std::size_t m = tr.local_exponents.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t i = m / 2; i < m; ++i) {
      const double x = inv_k[i];
      const double y = tr.local_exponents[i];
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++cnt;
    }
    if (cnt >= 2) {
      const double denom = cnt * sxx - sx * sx;
      const double slope = denom != 0.0 ? (cnt * sxy - sx * sy) / denom : 0.0;
      tr.exponent = (sy - slope * sx) / cnt;
    }
    // Power-law tails converge iff p > 1; exponents within 0.02 of the
    // borderline are treated as divergent (p = 1 needs log corrections).
    tr.converges = tr.geometric || tr.exponent > 1.02;
    return tr;
  }

  Modulus m_;
};

inline double q_m(const Modulus& m, double s) { return RateFunctions(m).q(s); }
inline double Q_m(const Modulus& m, double s) { return RateFunctions(m).Q(s); }
inline double rho_m(const Modulus& m, double t) { return RateFunctions(m).rho(t); }
inline Classification classify(const Modulus& m) { return RateFunctions(m).classify(); }

/// m~(r) = m(min(C r^gamma, 2pi)).  Closed families map to themselves where
/// the transform is exact (zero; linear with gamma = 1, C <= 1); otherwise
/// a tabulated modulus on a geometric knot grid reaching down to 1e-40.
inline Modulus compose_arc_length(const Modulus& m, double C, double gamma) {
  if (!(C > 0.0) || !(gamma > 0.0)) {
    throw ConstructionError("compose_arc_length: C and gamma must be positive");
  }
  if (m.family() == ModulusFamily::zero) return Modulus::zero();
  if (m.family() == ModulusFamily::linear && gamma == 1.0 && C <= 1.0) {
    return Modulus::linear(m.slope() * C);
  }
  std::vector<Knot> knots{{0.0, 0.0}};
  const double u_max = 40.0 * std::log(10.0);
  const int per_unit = 128;
  const int n = static_cast<int>(u_max * per_unit);
  const double u_min = -std::log(kTwoPi);
  for (int i = n; i >= 0; --i) {
    const double u = u_min + (u_max - u_min) * i / n;
    const double r = std::min(std::exp(-u), kTwoPi);
    // ln(1/(C r^gamma)) = gamma*u - ln C; keep it in log form.
    const double uu = gamma * u - std::log(C);
    const double val = (uu <= -std::log(kTwoPi)) ? m(kTwoPi) : m.value_u(uu);
    if (r > knots.back().first) knots.emplace_back(r, val);
  }
  return Modulus::tabulated(std::move(knots));
}

struct ModulusReport {
  bool pass = true;
  std::string failure;  // "m(0)", "monotone", "subadditive" or empty
  double worst_a = 0.0;
  double worst_b = 0.0;
  double worst_violation = 0.0;
};

/// Checks m(0) = 0, monotonicity on n grid points and subadditivity on n^2
/// random pairs (fixed seed).  Returns the worst violating pair.
inline ModulusReport validate_modulus(const Modulus& m, int n_samples, std::uint64_t seed = 0x5eed) {
  ModulusReport rep;
  const double tol = 1e-12;
  if (std::abs(m(0.0)) > tol) {
    rep.pass = false;
    rep.failure = "m(0)";
    rep.worst_violation = std::abs(m(0.0));
    return rep;
  }
  const int n = std::max(2, n_samples);
  // Monotonicity: half the points uniform, half geometric toward 0.
  std::vector<double> grid;
  for (int i = 0; i <= n / 2; ++i) grid.push_back(kTwoPi * i / (n / 2));
  for (int i = 1; i <= n - n / 2; ++i) grid.push_back(kTwoPi * std::pow(2.0, -0.5 * i));
  if (m.family() == ModulusFamily::tabulated) {
    for (const auto& [r, v] : m.knots()) grid.push_back(r);
  }
  std::sort(grid.begin(), grid.end());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double drop = m(grid[i - 1]) - m(grid[i]);
    if (drop > tol && drop > rep.worst_violation) {
      rep.pass = false;
      rep.failure = "monotone";
      rep.worst_a = grid[i - 1];
      rep.worst_b = grid[i];
      rep.worst_violation = drop;
    }
  }
  if (!rep.pass) return rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const long pairs = static_cast<long>(n) * n;
  for (long i = 0; i < pairs; ++i) {
    // Log-uniform magnitudes so small arguments get sampled too.
    const double a = kTwoPi * std::pow(uni(rng), 4.0);
    const double b = (kTwoPi - a) * std::pow(uni(rng), 4.0);
    const double excess = m(a + b) - m(a) - m(b);
    if (excess > tol * (1.0 + m(a + b)) && excess > rep.worst_violation) {
      rep.pass = false;
      rep.failure = "subadditive";
      rep.worst_a = a;
      rep.worst_b = b;
      rep.worst_violation = excess;
    }
  }
  return rep;
}

}  // namespace seuler
