#pragma once

// Stationary bounded vorticity fields in disc coordinates (the value of
// omega o S at z).

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "seuler/errors.hpp"
#include "seuler/modulus.hpp"

namespace seuler {

enum class VorticityKind { constant, odd_half, ring, grid };

inline const char* to_string(VorticityKind k) {
  switch (k) {
    case VorticityKind::constant: return "constant";
    case VorticityKind::odd_half: return "odd_half";
    case VorticityKind::ring: return "ring";
    case VorticityKind::grid: return "grid";
  }
  return "?";
}

class VorticityField {
 public:
  static VorticityField constant(double c) {
    VorticityField w;
    w.kind_ = VorticityKind::constant;
    w.c_ = c;
    return w;
  }

  /// c * sgn(Im z): the odd field chi_{D+} - chi_{D-} for c = 1.
  static VorticityField odd_half(double c) {
    VorticityField w;
    w.kind_ = VorticityKind::odd_half;
    w.c_ = c;
    return w;
  }

  /// c on |z| <= R, zero outside.
  static VorticityField ring(double c, double R) {
    if (!(R > 0.0) || !(R < 1.0)) throw ConstructionError("ring vorticity: R must lie in (0, 1)");
    VorticityField w;
    w.kind_ = VorticityKind::ring;
    w.c_ = c;
    w.R_ = R;
    return w;
  }

  /// Piecewise constant on the polar cells [r_i, r_{i+1}) x [phi_j, phi_{j+1})
  /// with nr uniform radii on [0, 1) and nphi uniform angles on [-pi, pi).
  static VorticityField grid(int nr, int nphi, std::vector<double> values) {
    if (nr < 1 || nphi < 1 || values.size() != static_cast<std::size_t>(nr) * nphi) {
      throw ConstructionError("grid vorticity: values must have nr * nphi entries");
    }
    VorticityField w;
    w.kind_ = VorticityKind::grid;
    w.nr_ = nr;
    w.nphi_ = nphi;
    w.values_ = std::move(values);
    return w;
  }

  VorticityKind kind() const { return kind_; }
  double c() const { return c_; }
  double R() const { return R_; }
  int nr() const { return nr_; }
  int nphi() const { return nphi_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(std::complex<double> z) const {
    switch (kind_) {
      case VorticityKind::constant: return c_;
      case VorticityKind::odd_half: return z.imag() > 0.0 ? c_ : (z.imag() < 0.0 ? -c_ : 0.0);
      case VorticityKind::ring: return std::abs(z) <= R_ ? c_ : 0.0;
      case VorticityKind::grid: {
        const int i = std::clamp(static_cast<int>(std::abs(z) * nr_), 0, nr_ - 1);
        const double t = (std::arg(z) + kPi) / kTwoPi;
        const int j = std::clamp(static_cast<int>(t * nphi_), 0, nphi_ - 1);
        return values_[static_cast<std::size_t>(i) * nphi_ + j];
      }
    }
    return 0.0;
  }

  double sup_norm() const {
    if (kind_ == VorticityKind::grid) {
      double s = 0.0;
      for (double v : values_) s = std::max(s, std::abs(v));
      return s;
    }
    return std::abs(c_);
  }

  bool is_zero() const { return sup_norm() == 0.0; }

  /// +1 if w(conj z) = w(z), -1 if w(conj z) = -w(z), 0 otherwise.
  int parity() const {
    switch (kind_) {
      case VorticityKind::constant:
      case VorticityKind::ring: return 1;
      case VorticityKind::odd_half: return -1;
      case VorticityKind::grid: return 0;
    }
    return 0;
  }

  /// Angles beta of the points c + r e^{i beta} where the circle crosses a
  /// discontinuity of the field.
  std::vector<double> circle_crossings(std::complex<double> center, double r) const {
    std::vector<double> out;
    if (kind_ == VorticityKind::odd_half) {
      const double s = -center.imag() / r;
      if (std::abs(s) <= 1.0) {
        const double b = std::asin(s);
        out.push_back(b);
        out.push_back(kPi - b);
      }
    } else if (kind_ == VorticityKind::ring) {
      // |c + r e^{ib}|^2 = R^2  <=>  cos(b - arg c) = (R^2 - |c|^2 - r^2) / (2 r |c|)
      const double cm = std::abs(center);
      if (cm > 0.0) {
        const double cs = (R_ * R_ - cm * cm - r * r) / (2.0 * r * cm);
        if (std::abs(cs) <= 1.0) {
          const double b = std::acos(cs);
          out.push_back(std::arg(center) + b);
          out.push_back(std::arg(center) - b);
        }
      }
    }
    return out;
  }

  /// Parameters t > 0 where the ray o + t dir (|dir| = 1) crosses a discontinuity.
  std::vector<double> ray_crossings(std::complex<double> o, std::complex<double> dir) const {
    std::vector<double> out;
    if (kind_ == VorticityKind::odd_half) {
      if (dir.imag() != 0.0) {
        const double t = -o.imag() / dir.imag();
        if (t > 0.0) out.push_back(t);
      }
    } else if (kind_ == VorticityKind::ring) {
      const double b = std::real(std::conj(dir) * o);
      const double disc = b * b - (std::norm(o) - R_ * R_);
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double t : {-b - sq, -b + sq}) {
          if (t > 0.0) out.push_back(t);
        }
      }
    }
    return out;
  }

  /// Directions from o of rays tangent to a curved discontinuity.
  std::vector<double> tangent_directions(std::complex<double> o) const {
    std::vector<double> out;
    if (kind_ == VorticityKind::ring) {
      const double om = std::abs(o);
      if (om > R_) {
        const double a = std::arg(-o), b = std::asin(R_ / om);
        out.push_back(a + b);
        out.push_back(a - b);
      }
    }
    return out;
  }

  /// Radii at which circles about `center` become tangent to a discontinuity.
  std::vector<double> tangent_radii(std::complex<double> center) const {
    if (kind_ == VorticityKind::odd_half) return {std::abs(center.imag())};
    if (kind_ == VorticityKind::ring) {
      const double cm = std::abs(center);
      return {std::abs(cm - R_), cm + R_};
    }
    return {};
  }

 private:
  VorticityKind kind_ = VorticityKind::constant;
  double c_ = 0.0;
  double R_ = 0.0;
  int nr_ = 0;
  int nphi_ = 0;
  std::vector<double> values_;
};

}  // namespace seuler
