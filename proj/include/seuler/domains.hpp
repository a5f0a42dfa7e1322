#pragma once

// Named decompositions (disc, triangle, square), the perturbed-triangle
// construction realising a concave modulus, and the delta selection.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "seuler/conformal.hpp"
#include "seuler/errors.hpp"
#include "seuler/measure.hpp"
#include "seuler/modulus.hpp"

namespace seuler {

struct DomainSpec {
  std::string construction = "raw";  // raw | modulus_domain | disc | triangle | square
  std::vector<Atom> atoms;
  double uniform_density = 0.0;
  std::optional<Modulus> modulus;
  double r0 = 0.25;
};

/// beta~ = 0, d(beta) = d(theta): S is the identity shifted so that S(1) = 0.
inline ConformalDomain disc_domain() {
  return ConformalDomain(TangentDecomposition(BoundaryMeasure({}, 1.0), std::nullopt));
}

/// Equilateral triangle: S'(z) = (1 + z^3)^{-2/3}.
inline ConformalDomain triangle_domain() {
  const double w = kTwoPi / 3.0;
  return ConformalDomain(TangentDecomposition(
      BoundaryMeasure({{kPi, w}, {kPi / 3.0, w}, {-kPi / 3.0, w}}), std::nullopt));
}

/// Square: four atoms of mass pi/2 at +-pi/4, +-3pi/4.
inline ConformalDomain square_domain() {
  const double w = kPi / 2.0;
  return ConformalDomain(TangentDecomposition(
      BoundaryMeasure({{kPi / 4, w}, {3 * kPi / 4, w}, {-kPi / 4, w}, {-3 * kPi / 4, w}}), std::nullopt));
}

/// Perturbed isosceles triangle whose beta~ attains the concave modulus m at
/// theta = 0:
///   beta~_T(theta) = pi/2 - sgn(theta)/2 * m(2 min(|theta|, r0)),
///   d(beta) = (2pi/3 + m(2 r0)) delta_pi + (2pi/3)(delta_{pi/3} + delta_{-pi/3}).
inline ConformalDomain construct_modulus_domain(const Modulus& m, double r0) {
  if (!(r0 > 0.0) || r0 > 0.5) {
    throw ConstructionError("construct_modulus_domain: r0 must lie in (0, 1/2], got " + std::to_string(r0));
  }
  const double m2 = m(2.0 * r0);
  if (m2 > kPi / 6.0 + 1e-15) {
    throw ConstructionError("construct_modulus_domain: m(2 r0) = " + std::to_string(m2) +
                            " exceeds pi/6 = " + std::to_string(kPi / 6.0));
  }
  if (!m.is_concave()) {
    throw ConstructionError("construct_modulus_domain: modulus must be concave");
  }
  const double w = kTwoPi / 3.0;
  BoundaryMeasure beta({{kPi, w + m2}, {kPi / 3.0, w}, {-kPi / 3.0, w}});
  std::optional<ContinuousPart> tilde;
  if (m.family() != ModulusFamily::zero) {
    ContinuousPart cp;
    cp.value = [m, r0](double t) {
      const double s = (t > 0.0) ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
      return 0.5 * kPi - 0.5 * s * m(2.0 * std::min(std::abs(t), r0));
    };
    cp.lo = -r0;
    cp.hi = r0;
    cp.modulus = m;
    cp.singular = {0.0};
    const auto ub = m.u_breaks();
    if (ub.size() <= 64) {
      for (double u : ub) {
        const double t = 0.5 * std::exp(-u);
        if (t < r0) cp.breaks.insert(cp.breaks.end(), {-t, t});
      }
    }
    tilde = std::move(cp);
  }
  return ConformalDomain(TangentDecomposition(std::move(beta), std::move(tilde)));
}

inline ConformalDomain build_domain(const DomainSpec& spec) {
  if (spec.construction == "disc") return disc_domain();
  if (spec.construction == "triangle") return triangle_domain();
  if (spec.construction == "square") return square_domain();
  if (spec.construction == "modulus_domain") {
    return construct_modulus_domain(spec.modulus.value_or(Modulus::zero()), spec.r0);
  }
  if (spec.construction == "raw") {
    if (spec.modulus && spec.modulus->family() != ModulusFamily::zero) {
      throw ConstructionError("raw domains carry no beta~; use construction \"modulus_domain\"");
    }
    return ConformalDomain(TangentDecomposition(BoundaryMeasure(spec.atoms, spec.uniform_density), std::nullopt));
  }
  throw ConstructionError("unknown domain construction \"" + spec.construction + "\"");
}

/// beta of the closed arc [a, b] (b - a < 2pi), wrapping around -pi/pi.
inline double closed_arc_mass(const BoundaryMeasure& beta, double a, double b) {
  double total = 0.0;
  for (const auto& at : beta.atoms()) {
    for (int k = -1; k <= 1; ++k) {
      const double t = at.theta + k * kTwoPi;
      if (t >= a && t <= b) total += at.mass;
    }
  }
  total += beta.uniform_density() * (b - a);
  if (beta.has_density()) {
    for (int k = -1; k <= 1; ++k) {
      const double lo = std::max(a, -kPi + k * kTwoPi);
      const double hi = std::min(b, kPi + k * kTwoPi);
      if (hi > lo) total += beta.mass(lo - k * kTwoPi, hi - k * kTwoPi) - beta.uniform_density() * (hi - lo);
    }
  }
  return total;
}

struct DeltaReport {
  double delta = 0.0;
  double window_delta = 0.0;  // largest delta passing the window test
  double cap = 0.0;           // ln 2 / (1000 (1 + m(2 pi)))
  double max_window_mass = 0.0;
};

/// Halving search for delta: every window [theta - 2 delta, theta + 2 delta]
/// carries beta-mass <= 4pi/3, delta <= ln2/(1000(1 + m(2pi))), and
/// m(2 delta) <= ln2/300.
inline DeltaReport delta_report(const ConformalDomain& dom) {
  const auto& beta = dom.decomposition().beta();
  const Modulus m = dom.decomposition().modulus();
  const double limit = 4.0 * kPi / 3.0;
  for (const auto& a : beta.atoms()) {
    if (a.mass > limit) {
      throw ConstructionError("delta_for_domain: atom of mass " + std::to_string(a.mass) + " at theta = " +
                              std::to_string(a.theta) + " exceeds 4pi/3; no admissible delta");
    }
  }
  auto worst_window = [&](double d) {
    double worst = 0.0;
    const int n = 2048;
    for (int i = 0; i < n; ++i) {
      const double t = -kPi + kTwoPi * i / n;
      worst = std::max(worst, closed_arc_mass(beta, t - 2 * d, t + 2 * d));
    }
    for (const auto& a : beta.atoms()) {
      worst = std::max(worst, closed_arc_mass(beta, a.theta, a.theta + 4 * d));
      worst = std::max(worst, closed_arc_mass(beta, a.theta - 4 * d, a.theta));
    }
    return worst;
  };
  DeltaReport rep;
  double d = kPi / 2.0;
  while (worst_window(d) > limit) d *= 0.5;
  rep.window_delta = d;
  rep.max_window_mass = worst_window(d);
  rep.cap = std::log(2.0) / (1000.0 * (1.0 + m(kTwoPi)));
  d = std::min(d, rep.cap);
  while (m(2.0 * d) > std::log(2.0) / 300.0) d *= 0.5;
  rep.delta = d;
  return rep;
}

inline double delta_for_domain(const ConformalDomain& dom) { return delta_report(dom).delta; }

}  // namespace seuler
