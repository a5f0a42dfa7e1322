#pragma once

// Tangent-argument data of a domain: the non-decreasing part beta (atoms plus
// a nonnegative density) and the continuous part beta~ with modulus m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "seuler/errors.hpp"
#include "seuler/modulus.hpp"
#include "seuler/quadrature.hpp"

namespace seuler {

struct Atom {
  double theta;  // in (-pi, pi]
  double mass;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double t) {
  double w = std::remainder(t, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

class BoundaryMeasure {
 public:
  BoundaryMeasure() = default;
  explicit BoundaryMeasure(std::vector<Atom> atoms, double uniform_density = 0.0)
      : atoms_(std::move(atoms)), uniform_(uniform_density) {
    for (auto& a : atoms_) a.theta = wrap_angle(a.theta);
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& x, const Atom& y) { return x.theta < y.theta; });
  }

  /// Adds a density on (-pi, pi]; `breaks` lists its kinks.
  BoundaryMeasure& with_density(std::function<double(double)> rho, std::vector<double> breaks = {}) {
    density_ = std::move(rho);
    density_breaks_ = std::move(breaks);
    return *this;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  double uniform_density() const { return uniform_; }
  bool has_density() const { return static_cast<bool>(density_); }
  double density(double theta) const { return uniform_ + (density_ ? density_(theta) : 0.0); }
  const std::function<double(double)>& extra_density() const { return density_; }
  const std::vector<double>& density_breaks() const { return density_breaks_; }

  bool is_nonnegative(int n_check = 512) const {
    for (const auto& a : atoms_) {
      if (a.mass < 0.0) return false;
    }
    for (int i = 0; i < n_check; ++i) {
      const double t = -kPi + kTwoPi * (i + 0.5) / n_check;
      if (density(t) < 0.0) return false;
    }
    return true;
  }

  /// Mass of (a, b] with -pi <= a < b <= pi.
  double mass(double a, double b) const {
    double total = 0.0;
    for (const auto& at : atoms_) {
      if (at.theta > a && at.theta <= b) total += at.mass;
    }
    total += uniform_ * (b - a);
    if (density_) {
      quad::Options opt;
      opt.rel_tol = 1e-12;
      opt.abs_tol = 1e-14;
      total += quad::integrate(density_, a, b, density_breaks_, opt).value;
    }
    return total;
  }

  double total_mass() const { return mass(-kPi, kPi); }

 private:
  std::vector<Atom> atoms_;
  double uniform_ = 0.0;
  std::function<double(double)> density_;
  std::vector<double> density_breaks_;
};

/// The continuous part beta~_T on (-pi, pi]: constant outside [lo, hi],
/// continuous in the interior, with declared modulus.
struct ContinuousPart {
  std::function<double(double)> value;
  double lo = 0.0;
  double hi = 0.0;
  Modulus modulus;
  std::vector<double> breaks;    // kinks
  std::vector<double> singular;  // points where the slope blows up
};

class TangentDecomposition {
 public:
  TangentDecomposition() = default;
  TangentDecomposition(BoundaryMeasure beta, std::optional<ContinuousPart> tilde)
      : beta_(std::move(beta)), tilde_(std::move(tilde)) {
    if (tilde_) {
      if (!(tilde_->lo < tilde_->hi) || tilde_->lo < -kPi || tilde_->hi > kPi) {
        throw ConstructionError("beta~ support must be an interval inside [-pi, pi]");
      }
      kappa_ = (tilde_->value(kPi) - tilde_->value(std::nextafter(-kPi, 0.0))) / kTwoPi;
    }
    if (!beta_.is_nonnegative()) {
      throw ConstructionError("non-decreasing part has negative mass or density");
    }
    const double total = total_mass();
    if (std::abs(total - kTwoPi) > 1e-10) {
      throw ConstructionError("total mass of d(beta + beta~) over (-pi, pi] is " + std::to_string(total) +
                              ", expected 2pi");
    }
  }

  const BoundaryMeasure& beta() const { return beta_; }
  bool has_tilde() const { return tilde_.has_value(); }
  const ContinuousPart& tilde() const { return *tilde_; }
  double kappa() const { return kappa_; }
  Modulus modulus() const { return tilde_ ? tilde_->modulus : Modulus::zero(); }

  /// beta~_T(theta) on (-pi, pi]; zero when absent.
  double beta_tilde(double theta) const { return tilde_ ? tilde_->value(theta) : 0.0; }

  /// The 2pi-periodic beta~(theta) = beta~_T(theta) - kappa*theta.
  double beta_tilde_periodic(double theta) const {
    if (!tilde_) return 0.0;
    const double w = wrap_angle(theta);
    return tilde_->value(w) - kappa_ * w;
  }

  double total_mass() const { return beta_.total_mass() + kTwoPi * kappa_; }

  /// Samples |beta~(a) - beta~(b)| <= m(|a - b|) on random pairs.
  double worst_modulus_excess(int n_pairs, std::uint64_t seed = 7) const {
    if (!tilde_) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_pairs; ++i) {
      const double a = (i % 2 == 0) ? uni(rng) : tilde_->lo + (tilde_->hi - tilde_->lo) * unit(rng);
      const double gap = (i % 3 == 0) ? std::pow(unit(rng), 6.0) : unit(rng);
      const double b = std::clamp(a + gap * (kPi - a), std::nextafter(-kPi, 0.0), kPi);
      const double diff = std::abs(beta_tilde(a) - beta_tilde(b));
      worst = std::max(worst, diff - tilde_->modulus(std::abs(a - b)));
    }
    return worst;
  }

 private:
  BoundaryMeasure beta_;
  std::optional<ContinuousPart> tilde_;
  double kappa_ = 0.0;
};

}  // namespace seuler
