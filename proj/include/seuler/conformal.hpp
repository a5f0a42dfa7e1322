#pragma once

// The inverse Riemann map S : D -> Omega built from a tangent decomposition,
//
//   S'(z) = S'(0) exp( -(1/pi) int_(-pi,pi] ln(1 - z e^{-i theta}) d(beta + beta~)(theta) ),
//
// with the principal logarithm (Re(1 - z e^{-i theta}) > 0 on the disc).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "seuler/errors.hpp"
#include "seuler/measure.hpp"
#include "seuler/quadrature.hpp"

namespace seuler {

using cplx = std::complex<double>;

/// A finite union of intervals (a, b] inside (-pi, pi].
using AngleSet = std::vector<std::pair<double, double>>;

inline AngleSet full_circle() { return {{-kPi, kPi}}; }

class ConformalDomain {
 public:
  ConformalDomain() = default;
  explicit ConformalDomain(TangentDecomposition dec, cplx sprime0 = 1.0)
      : dec_(std::move(dec)), sprime0_(sprime0) {
    if (sprime0_ == cplx(0.0)) throw ConstructionError("S'(0) must be nonzero");
    for (const auto& a : dec_.beta().atoms()) {
      if (a.mass != 0.0) atom_angles_.push_back(a.theta);
    }
    if (dec_.has_tilde()) build_tilde_series();
  }

  const TangentDecomposition& decomposition() const { return dec_; }
  cplx sprime0() const { return sprime0_; }
  const std::vector<double>& atom_angles() const { return atom_angles_; }

  /// ln S'(z); the branch is the sum of principal logarithms.
  cplx log_sprime(cplx z) const {
    check_inside(z, "sprime");
    cplx acc = 0.0;
    for (const auto& a : dec_.beta().atoms()) {
      acc += a.mass * std::log(1.0 - z * std::polar(1.0, -a.theta));
    }
    if (dec_.beta().has_density()) acc += density_log_integral(z);
    if (dec_.has_tilde()) acc += tilde_log_integral(z);
    return std::log(sprime0_) - acc / kPi;
  }

  cplx sprime(cplx z) const { return std::exp(log_sprime(z)); }

  double log_det_ds(cplx z) const { return 2.0 * log_sprime(z).real(); }
  double det_ds(cplx z) const { return std::exp(log_det_ds(z)); }

  /// (2/pi) int_A ln|e^{i theta} - z| d(beta)(theta).
  double I_integral(cplx z, const AngleSet& A) const {
    check_inside(z, "I_integral");
    const auto& b = dec_.beta();
    double total = 0.0;
    for (const auto& [lo, hi] : A) {
      if (!(hi > lo)) continue;
      for (const auto& a : b.atoms()) {
        if (a.theta > lo && a.theta <= hi) total += a.mass * std::log(std::abs(std::polar(1.0, a.theta) - z));
      }
      const bool full = lo <= -kPi && hi >= kPi;
      auto lnk = [z](double t) { return std::log(std::abs(std::polar(1.0, t) - z)); };
      if (b.uniform_density() != 0.0 && !full) {
        total += b.uniform_density() * quad::integrate(lnk, lo, hi, breaks_for(z, lo, hi), tight()).value;
      }
      if (b.has_density()) {
        auto f = [&](double t) { return lnk(t) * b.extra_density()(t); };
        auto br = breaks_for(z, lo, hi);
        br.insert(br.end(), b.density_breaks().begin(), b.density_breaks().end());
        total += quad::integrate(f, lo, hi, br, tight()).value;
      }
    }
    return 2.0 / kPi * total;
  }

  /// (2/pi) int_A Im(z / (e^{i theta} - z)) (beta~(theta) - beta~(theta*)) d theta
  /// with the periodic beta~ = beta~_T - kappa*theta.
  double J_integral(cplx z, const AngleSet& A, double theta_star) const {
    check_inside(z, "J_integral");
    if (!dec_.has_tilde()) return 0.0;
    const double ref = dec_.beta_tilde_periodic(theta_star);
    auto f = [&](double t) {
      const cplx k = z / (std::polar(1.0, t) - z);
      return k.imag() * (dec_.beta_tilde_periodic(t) - ref);
    };
    double total = 0.0;
    for (const auto& [lo, hi] : A) {
      if (!(hi > lo)) continue;
      auto br = breaks_for(z, lo, hi);
      const auto& tp = dec_.tilde();
      br.insert(br.end(), {tp.lo, tp.hi, 0.0, wrap_angle(theta_star)});
      br.insert(br.end(), tp.breaks.begin(), tp.breaks.end());
      br.insert(br.end(), tp.singular.begin(), tp.singular.end());
      total += quad::integrate(f, lo, hi, br, tight()).value;
    }
    return 2.0 / kPi * total;
  }

  /// det DS(0) * exp(-I(z) - J(z)); an independent path to det_ds.
  double det_ds_split(cplx z) const {
    const double arg = std::arg(z);
    return std::norm(sprime0_) * std::exp(-I_integral(z, full_circle()) - J_integral(z, full_circle(), arg));
  }

  /// S(z) = int_1^z S'(xi) d xi along the chord, base point S(1) = 0.  The
  /// chord is reparametrised with a quintic smoothstep, which flattens the
  /// integrable corner singularities sitting at both chord ends.  When an
  /// atom sits at theta = 0 the base point moves inward by 1e-9 and
  /// `perturbed` is set.
  cplx map_s(cplx z, bool* perturbed = nullptr) const {
    check_inside(z, "map_s");
    cplx base = 1.0;
    bool moved = false;
    for (double t : atom_angles_) {
      if (std::abs(t) < 1e-12) {
        base = 1.0 - 1e-9;
        moved = true;
      }
    }
    if (perturbed) *perturbed = moved;
    const cplx chord = z - base;
    if (std::abs(chord) == 0.0) return 0.0;
    auto f = [&](double u) {
      const double tau = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
      const double dtau = 30.0 * u * u * (1.0 - u) * (1.0 - u);
      if (dtau == 0.0) return cplx(0.0);
      const cplx xi = base + tau * chord;
      if (std::abs(xi) >= 1.0) return cplx(0.0);
      return sprime(xi) * dtau;
    };
    quad::Options opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-13;
    opt.max_segments = 2000;
    auto res = quad::integrate(f, 0.0, 1.0, {0.5}, opt);
    return chord * res.value;
  }

  /// Damped Newton inversion of map_s, seeded from a coarse polar grid.
  cplx inverse_map(cplx w, double tol = 1e-10) const {
    cplx best = 0.0;
    double best_err = std::abs(map_s(0.0) - w);
    for (int i = 1; i <= 9; ++i) {
      for (int j = 0; j < 24; ++j) {
        const cplx z = std::polar(0.1 * i, kTwoPi * j / 24.0);
        const double e = std::abs(map_s(z) - w);
        if (e < best_err) {
          best_err = e;
          best = z;
        }
      }
    }
    cplx z = best;
    for (int it = 0; it < 60; ++it) {
      const cplx r = map_s(z) - w;
      if (std::abs(r) < tol) return z;
      cplx step = r / sprime(z);
      double lambda = 1.0;
      while (std::abs(z - lambda * step) >= 1.0 - 1e-12 && lambda > 1e-8) lambda *= 0.5;
      z -= lambda * step;
    }
    throw ConvergenceError("inverse_map: Newton iteration did not converge", std::abs(map_s(z) - w));
  }

  /// max |d S'/dx + i d S'/dy| / max(1, |S'|) over the given points, by central
  /// differences with step h.
  double holomorphy_residual(const std::vector<cplx>& pts, double h = 1e-4) const {
    double worst = 0.0;
    const cplx ih(0.0, h);
    for (const auto& z : pts) {
      const cplx dx = (sprime(z + h) - sprime(z - h)) / (2.0 * h);
      const cplx dy = (sprime(z + ih) - sprime(z - ih)) / (2.0 * h);
      const cplx dbar = dx + cplx(0.0, 1.0) * dy;
      worst = std::max(worst, std::abs(dbar) / std::max(1.0, std::abs(sprime(z))));
    }
    return worst;
  }

 private:
  static void check_inside(cplx z, const char* what) {
    if (!(std::abs(z) < 1.0)) {
      throw DomainError(std::string(what) + ": |z| must be < 1");
    }
  }

  static quad::Options tight() {
    quad::Options o;
    o.rel_tol = 1e-10;
    o.abs_tol = 1e-12;
    o.max_segments = 4000;
    return o;
  }

  static std::vector<double> breaks_for(cplx z, double lo, double hi) {
    std::vector<double> br;
    if (std::abs(z) > 0.0) {
      const double a = std::arg(z);
      if (a > lo && a < hi) br.push_back(a);
      // Two flanking points at the kernel width sharpen the initial partition.
      const double w = 1.0 - std::abs(z);
      for (double s : {-1.0, 1.0}) {
        const double b = a + s * std::max(w, 1e-14);
        if (b > lo && b < hi) br.push_back(b);
      }
    }
    return br;
  }

  cplx density_log_integral(cplx z) const {
    const auto& b = dec_.beta();
    auto f = [&](double t) { return std::log(1.0 - z * std::polar(1.0, -t)) * b.extra_density()(t); };
    auto br = breaks_for(z, -kPi, kPi);
    br.insert(br.end(), b.density_breaks().begin(), b.density_breaks().end());
    return quad::integrate(f, -kPi, kPi, br, tight()).value;
  }

  // Taylor coefficients of int L d(beta~) = -sum_n c_n z^n / n, with
  // c_n = int e^{-i n theta} d(beta~), used inside |z| <= kSeriesRadius.
  static constexpr double kSeriesRadius = 0.95;

  void build_tilde_series() {
    const auto& tp = dec_.tilde();
    const int n_terms = static_cast<int>(std::ceil(std::log(1e-16) / std::log(kSeriesRadius)));
    const double c0 = tp.value(std::clamp(0.0, tp.lo, tp.hi));
    quad::Options opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-15;
    opt.max_segments = 20000;
    std::vector<double> br = tp.breaks;
    br.insert(br.end(), tp.singular.begin(), tp.singular.end());
    series_.assign(n_terms + 1, 0.0);
    for (int n = 1; n <= n_terms; ++n) {
      // By parts: [e^{-in t}(b - c0)] + i n int e^{-in t}(b(t) - c0) dt.
      const cplx edge = std::polar(1.0, -n * tp.hi) * (tp.value(tp.hi) - c0) -
                        std::polar(1.0, -n * tp.lo) * (tp.value(tp.lo) - c0);
      auto f = [&](double t) { return std::polar(1.0, -n * t) * (tp.value(t) - c0); };
      // Break the support into pieces of about one oscillation.
      std::vector<double> pts = br;
      const int pieces = std::max(1, static_cast<int>((tp.hi - tp.lo) * n / kPi));
      for (int k = 1; k < pieces; ++k) pts.push_back(tp.lo + (tp.hi - tp.lo) * k / pieces);
      const cplx integral = quad::integrate(f, tp.lo, tp.hi, pts, opt).value;
      series_[n] = -(edge + cplx(0.0, n) * integral) / static_cast<double>(n);
    }
  }

  // int_[lo,hi] L d(beta~) with L = ln(1 - z e^{-i theta}), by parts:
  //   [L (beta~ - c)]_lo^hi - int L' (beta~ - c),   L' = i z / (e^{i theta} - z),
  // where c = beta~(arg z) clamped to the support.
  cplx tilde_log_integral(cplx z) const {
    if (!series_.empty() && std::abs(z) <= kSeriesRadius) {
      cplx acc = 0.0;
      for (std::size_t n = series_.size() - 1; n >= 1; --n) acc = (acc + series_[n]) * z;
      return acc;
    }
    const auto& tp = dec_.tilde();
    const double tz = std::clamp(std::abs(z) > 0.0 ? std::arg(z) : 0.0, tp.lo, tp.hi);
    const double c = tp.value(tz);
    auto L = [&](double t) { return std::log(1.0 - z * std::polar(1.0, -t)); };
    const cplx boundary = L(tp.hi) * (tp.value(tp.hi) - c) - L(tp.lo) * (tp.value(tp.lo) - c);
    auto f = [&](double t) {
      return cplx(0.0, 1.0) * z / (std::polar(1.0, t) - z) * (tp.value(t) - c);
    };
    std::vector<double> kernel_pts = breaks_for(z, tp.lo, tp.hi);
    kernel_pts.push_back(tz);
    kernel_pts.insert(kernel_pts.end(), tp.breaks.begin(), tp.breaks.end());
    std::vector<double> cuts{tp.lo, tp.hi};
    for (double b : tp.singular) {
      if (b > tp.lo && b < tp.hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cplx total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double p = cuts[i], q = cuts[i + 1];
      const bool at_p = i > 0, at_q = i + 2 < cuts.size();
      if (!at_p && !at_q) {
        std::vector<double> pts;
        for (double k : kernel_pts) pts.push_back(k);
        total += quad::integrate(f, p, q, pts, tight()).value;
        continue;
      }
      // Grade geometrically toward singular points: theta = e +- h e^{-s}.
      const double mid = 0.5 * (p + q);
      for (int side = 0; side < 2; ++side) {
        const bool toward_p = side == 0;
        if (toward_p ? !at_p : !at_q) continue;
        const double e = toward_p ? p : q;
        const double far = (at_p && at_q) ? mid : (toward_p ? q : p);
        const double h = std::abs(far - e);
        const double dir = far > e ? 1.0 : -1.0;
        const double s_max = std::log(h / kGradeFloor);
        auto g = [&](double s) {
          const double off = h * std::exp(-s);
          return f(e + dir * off) * off;
        };
        std::vector<double> pts;
        for (double k : kernel_pts) {
          const double off = (k - e) * dir;
          if (off > 0.0 && off < h) pts.push_back(std::log(h / off));
        }
        total += quad::integrate(g, 0.0, s_max, pts, tight()).value;
      }
    }
    return boundary - total;
  }

  static constexpr double kGradeFloor = 1e-16;

  TangentDecomposition dec_;
  cplx sprime0_ = 1.0;
  std::vector<double> atom_angles_;
  std::vector<cplx> series_;
};

}  // namespace seuler
