#pragma once

// Biot-Savart velocity of a stationary vorticity field in disc coordinates,
//
//   dzeta/dt = i / (2 pi det(zeta)) int_D K(zeta, z) w(z) det(z) dz,
//   K(zeta, z) = (zeta - z)/|zeta - z|^2 - |z|^2 (|z|^2 zeta - z)/||z|^2 zeta - z|^2,
//
// and the rate of change d' of the boundary distance d = 1 - |zeta|.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seuler/conformal.hpp"
#include "seuler/errors.hpp"
#include "seuler/quadrature.hpp"
#include "seuler/vorticity.hpp"

namespace seuler {

/// Kernel pair accumulated by the cubature: k carries K w det, n carries the
/// normal-rate kernel N w det.
struct KernelSample {
  cplx k{};
  double n = 0.0;

  KernelSample& operator+=(const KernelSample& o) {
    k += o.k;
    n += o.n;
    return *this;
  }
  friend KernelSample operator+(KernelSample a, const KernelSample& b) { return a += b; }
  friend KernelSample operator-(const KernelSample& a, const KernelSample& b) { return {a.k - b.k, a.n - b.n}; }
  friend KernelSample operator*(const KernelSample& a, double s) { return {a.k * s, a.n * s}; }
};

inline double magnitude(const KernelSample& s) { return std::abs(s.k) + std::abs(s.n); }

/// K(zeta, z) in the form that stays finite at z = 0.
inline cplx bs_kernel(cplx zeta, cplx z) {
  const cplx a = (zeta - z) / std::norm(zeta - z);
  const double r = std::abs(z);
  if (r == 0.0) return a;
  const double r2 = r * r;
  return a - (r2 * zeta - z) / std::norm(r * zeta - z / r);
}

/// N(zeta, z) = (zeta . z^perp) |z|^2 (1 - |z|^2) / (|zeta - z|^2 ||z|^2 zeta - z|^2).
inline double normal_kernel(cplx zeta, cplx z) {
  const double r = std::abs(z);
  if (r == 0.0) return 0.0;
  const double dot_perp = -std::imag(std::conj(zeta) * z);
  return dot_perp * (1.0 - r * r) / (std::norm(zeta - z) * std::norm(r * zeta - z / r));
}

/// True when det(conj z) = det(z), sampled.
inline bool is_conjugation_symmetric(const ConformalDomain& dom) {
  for (int i = 0; i < 24; ++i) {
    const cplx z = std::polar(0.2 + 0.75 * ((i * 7) % 24) / 24.0, 0.13 + 2.9 * i / 24.0);
    const double a = dom.log_det_ds(z);
    const double b = dom.log_det_ds(std::conj(z));
    if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) return false;
  }
  return true;
}

struct FieldValue {
  cplx v{};                    // dzeta/dt
  double dprime = 0.0;         // normal-kernel form of d'
  double dprime_direct = 0.0;  // -Re(conj(zeta^) v)
  double tangential = 0.0;     // Re(conj(i zeta^) v)
  double error = 0.0;          // estimated absolute error of v
  std::size_t evals = 0;
};

struct VelocityOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  bool use_symmetry = true;
  bool cache_det = true;
  int ball_order = 20;  // Gauss points per radial segment in the ball
};

class BiotSavart {
 public:
  BiotSavart(const ConformalDomain& dom, VorticityField w, VelocityOptions opt = {})
      : dom_(&dom), w_(std::move(w)), opt_(opt), symmetric_domain_(is_conjugation_symmetric(dom)) {
    const auto& dec = dom.decomposition();
    for (const auto& a : dec.beta().atoms()) boundary_marks_.push_back(a.theta);
    if (dec.has_tilde()) {
      boundary_marks_.push_back(dec.tilde().lo);
      boundary_marks_.push_back(dec.tilde().hi);
      for (double b : dec.tilde().breaks) boundary_marks_.push_back(b);
    }
    fine_ = quad::gauss_legendre(opt_.ball_order);
  }

  const ConformalDomain& domain() const { return *dom_; }
  const VorticityField& field() const { return w_; }
  const VelocityOptions& options() const { return opt_; }

  /// True when evaluations on the real axis fold the integral onto a half.
  bool folds_real_axis() const { return opt_.use_symmetry && symmetric_domain_ && w_.parity() != 0; }

  FieldValue evaluate(cplx zeta) {
    const double r = std::abs(zeta);
    if (!(r < 1.0)) throw DomainError("velocity: |zeta| must be < 1");
    FieldValue out;
    if (w_.is_zero()) return out;
    const cplx zh = r > 0.0 ? zeta / r : cplx(1.0, 0.0);
    const bool fold = folds_real_axis() && zeta.imag() == 0.0;
    const int p = w_.parity();
    double err = 0.0;
    auto fn = [&](cplx z, double det) { return sample(zeta, z, det, fold, p); };
    const KernelSample s = integrate_with(zeta, fn, fold, &err);
    const double det = dom_->det_ds(zeta);
    const cplx i(0.0, 1.0);
    out.v = i * s.k / (kTwoPi * det);
    out.error = err / (kTwoPi * det);
    out.dprime = r > 0.0 ? (1.0 - r * r) / (kTwoPi * r * det) * s.n : 0.0;
    out.dprime_direct = -std::real(std::conj(zh) * out.v);
    out.tangential = std::real(std::conj(i * zh) * out.v);
    out.evals = evals_;
    return out;
  }

  /// int_D fn(z, det(z)) dz with the ball/outer split about zeta.  With
  /// `fold`, only Im z on one side of the real axis is visited and fn must
  /// already return the symmetrised value.  Points where the field vanishes
  /// are skipped.
  template <typename Fn>
  KernelSample integrate_with(cplx zeta, Fn&& fn, bool fold, double* err_out = nullptr) {
    const double r = std::abs(zeta);
    if (!(r < 1.0)) throw DomainError("cubature: |zeta| must be < 1");
    const double d = 1.0 - r;
    const cplx zh = r > 0.0 ? zeta / r : cplx(1.0, 0.0);
    if (zh != column_) {
      column_ = zh;
      cache_.clear();
    }
    evals_ = 0;
    double err = 0.0;
    const KernelSample s = ball(zeta, d, fold, fn, err) + outer(zeta, zh, d, fold, fn, err);
    if (err_out) *err_out = err;
    return s;
  }

  std::size_t last_evals() const { return evals_; }

 private:
  KernelSample sample(cplx zeta, cplx z, double det, bool fold, int p) const {
    const double wv = w_(z);
    if (wv == 0.0) return {};
    const cplx k = bs_kernel(zeta, z);
    const double n = normal_kernel(zeta, z);
    const double f = wv * det;
    if (!fold) return {k * f, n * f};
    // F(z) + F(conj z) with K(zeta, conj z) = conj K, N(zeta, conj z) = -N.
    return {(k + static_cast<double>(p) * std::conj(k)) * f, n * (1.0 - p) * f};
  }

  // B(zeta, d/2) in polar coordinates about zeta; the radial Jacobian
  // cancels the kernel singularity.
  template <typename Fn>
  KernelSample ball(cplx zeta, double d, bool fold, Fn& fn, double& err) {
    const double h = 0.5 * d;
    std::vector<double> cuts{-kPi, kPi};
    if (fold) cuts = {0.0, kPi};
    std::vector<double> dirs = w_.circle_crossings(zeta, h);
    for (double b : w_.tangent_directions(zeta)) dirs.push_back(b);
    if (std::abs(zeta) > 0.0) dirs.insert(dirs.end(), {std::arg(zeta), std::arg(zeta) + kPi});
    for (double b : dirs) {
      const double a = wrap_angle(b);
      if (a > cuts.front() && a < cuts.back()) cuts.push_back(a);
    }
    std::sort(cuts.begin(), cuts.end());
    const auto& g = fine_;
    // Each ray is smooth once split at its crossings; the angular integrand
    // keeps square-root points at tangencies, left to the adaptive rule.
    auto line = [&](double alpha) {
      const cplx dir = std::polar(1.0, alpha);
      std::vector<double> ts{0.0};
      for (double t : w_.ray_crossings(zeta, dir)) {
        if (t < h) ts.push_back(t);
      }
      ts.push_back(h);
      std::sort(ts.begin(), ts.end());
      KernelSample acc;
      for (std::size_t j = 0; j + 1 < ts.size(); ++j) {
        const double tc = 0.5 * (ts[j] + ts[j + 1]), th = 0.5 * (ts[j + 1] - ts[j]);
        for (std::size_t it = 0; it < g.nodes.size(); ++it) {
          const double t = tc + th * g.nodes[it];
          const cplx z = zeta + t * dir;
          ++evals_;
          acc += fn(z, dom_->det_ds(z)) * (t * th * g.weights[it]);
        }
      }
      return acc;
    };
    quad::Options o;
    o.rel_tol = opt_.rel_tol;
    o.abs_tol = opt_.abs_tol;
    auto res = quad::integrate(line, cuts.front(), cuts.back(), cuts, o);
    err += res.error;
    return res.value;
  }

  double cached_det(double lambda, double psi, cplx z) {
    if (!opt_.cache_det) return dom_->det_ds(z);
    std::uint64_t a, b;
    std::memcpy(&a, &lambda, 8);
    std::memcpy(&b, &psi, 8);
    const std::uint64_t key = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2));
    auto it = cache_.find(key);
    if (it != cache_.end() && it->second.lambda == lambda && it->second.psi == psi) return it->second.det;
    const double det = dom_->det_ds(z);
    cache_[key] = {lambda, psi, det};
    return det;
  }

  // D minus the ball, in boundary-anchored coordinates
  //   z = zh (1 - rho e^{i psi}),  rho = e^lambda,  dz = rho^2 dlambda dpsi.
  template <typename Fn>
  KernelSample outer(cplx zeta, cplx zh, double d, bool fold, Fn& fn, double& err) {
    const double ln2 = std::log(2.0);
    const double step = 0.5 * ln2;
    const double lam_hi = ln2;
    const double lam_lo = lam_hi - step * std::ceil((lam_hi - (std::log(d) - 14.0)) / step);
    std::vector<double> br;
    for (double l = lam_hi - step; l > lam_lo; l -= step) br.push_back(l);
    for (double f : {0.5, 1.0, 1.5}) br.push_back(std::log(f * d));
    for (double t : boundary_marks_) {
      const double rho = std::abs(1.0 - std::polar(1.0, t) / zh);
      if (rho > 0.0) br.push_back(std::log(rho));
    }
    // Where a discontinuity crosses the ball edge it meets the hole in psi.
    for (double a : w_.circle_crossings(zeta, 0.5 * d)) {
      const double rho = std::abs(zh - (zeta + std::polar(0.5 * d, a)));
      if (rho > 0.0) br.push_back(std::log(rho));
    }
    for (double rt : w_.tangent_radii(zh)) {
      if (rt > 0.0) br.push_back(std::log(rt));
    }
    const double phi_hat = std::arg(zh);
    quad::Options inner_opt;
    inner_opt.rel_tol = 0.1 * opt_.rel_tol;
    inner_opt.abs_tol = 0.1 * opt_.abs_tol;
    quad::Options outer_opt;
    outer_opt.rel_tol = opt_.rel_tol;
    outer_opt.abs_tol = opt_.abs_tol;

    auto column = [&](double lambda) {
      const double rho = std::exp(lambda);
      const double psi_max = std::acos(std::min(1.0, 0.5 * rho));
      double psi_hole = 0.0;
      if (rho > 0.5 * d && rho < 1.5 * d) {
        const double c = (rho * rho + 0.75 * d * d) / (2.0 * rho * d);
        psi_hole = std::acos(std::clamp(c, -1.0, 1.0));
      }
      std::vector<double> pb;
      for (double b : w_.circle_crossings(zh, rho)) pb.push_back(wrap_angle(b - phi_hat - kPi));
      auto f = [&](double psi) {
        const cplx z = zh * (1.0 - rho * std::polar(1.0, psi));
        if (!(std::norm(z) < 1.0)) return KernelSample{};
        ++evals_;
        if (w_(z) == 0.0) return KernelSample{};
        return fn(z, cached_det(lambda, psi, z)) * (rho * rho);
      };
      KernelSample acc;
      auto piece = [&](double a, double b) {
        if (!(b > a)) return;
        auto res = quad::integrate(f, a, b, pb, inner_opt);
        acc += res.value;
      };
      piece(psi_hole, psi_max);
      if (!fold) piece(-psi_max, -psi_hole);
      return acc;
    };
    auto res = quad::integrate(column, lam_lo, lam_hi, br, outer_opt);
    err += res.error;
    return res.value;
  }

  struct CacheEntry {
    double lambda;
    double psi;
    double det;
  };

  const ConformalDomain* dom_;
  VorticityField w_;
  VelocityOptions opt_;
  bool symmetric_domain_ = false;
  std::vector<double> boundary_marks_;
  quad::GaussRule fine_;
  cplx column_{2.0, 0.0};
  std::unordered_map<std::uint64_t, CacheEntry> cache_;
  std::size_t evals_ = 0;
};

/// Velocity of a single evaluation; builds a throwaway evaluator.
inline cplx disc_velocity(const ConformalDomain& dom, const VorticityField& w, cplx zeta,
                          const VelocityOptions& opt = {}) {
  BiotSavart bs(dom, w, opt);
  return bs.evaluate(zeta).v;
}

/// d' at zeta via the normal-kernel identity.
inline double boundary_distance_rate(const ConformalDomain& dom, const VorticityField& w, cplx zeta,
                                     const VelocityOptions& opt = {}) {
  if (zeta == cplx(0.0)) throw DomainError("boundary_distance_rate: undefined at zeta = 0");
  BiotSavart bs(dom, w, opt);
  return bs.evaluate(zeta).dprime;
}

}  // namespace seuler
