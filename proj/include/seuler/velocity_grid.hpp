#pragma once

// Precomputed velocity of a stationary field on a polar grid refined toward
// the boundary, with bicubic interpolation in (ln(1 - r), phi).

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "seuler/errors.hpp"
#include "seuler/velocity.hpp"

namespace seuler {

struct GridSpec {
  double d0 = 0.5;           // level k sits at d = d0 2^{-k}
  int levels = 20;
  int sub = 2;               // nodes per level
  double d_max = 0.5;        // coverage extends up to d_max in d0 2^{j/sub} steps
  int n_phi = 32;
  double phi_center = 0.0;
  double phi_halfwidth = kPi;  // pi: full periodic circle
  double axis_tol = 1e-6;      // accepted |phi - center| when n_phi = 1

  bool periodic() const { return n_phi > 1 && phi_halfwidth >= kPi; }
};

inline void to_json(nlohmann::json& j, const GridSpec& g) {
  j = {{"d0", g.d0},         {"levels", g.levels},           {"sub", g.sub},
       {"d_max", g.d_max},   {"n_phi", g.n_phi},             {"phi_center", g.phi_center},
       {"phi_halfwidth", g.phi_halfwidth}, {"axis_tol", g.axis_tol}};
}

inline void from_json(const nlohmann::json& j, GridSpec& g) {
  g = GridSpec{};
  g.d0 = j.value("d0", g.d0);
  g.levels = j.value("levels", g.levels);
  g.sub = j.value("sub", g.sub);
  g.d_max = j.value("d_max", g.d_max);
  g.n_phi = j.value("n_phi", g.n_phi);
  g.phi_center = j.value("phi_center", g.phi_center);
  g.phi_halfwidth = j.value("phi_halfwidth", g.phi_halfwidth);
  g.axis_tol = j.value("axis_tol", g.axis_tol);
}

namespace detail {

// Weights of the 4-point Lagrange interpolant at x for nodes x0 + h (0..3).
inline std::array<double, 4> lagrange4(double s) {
  // s measured in node spacings from the first node.
  const double a = s, b = s - 1.0, c = s - 2.0, d = s - 3.0;
  return {-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0};
}

}  // namespace detail

class VelocityGrid {
 public:
  VelocityGrid() = default;

  explicit VelocityGrid(GridSpec spec) : spec_(spec) {
    if (spec_.d0 <= 0.0 || spec_.d0 >= 1.0) throw DomainError("grid: d0 must lie in (0, 1)");
    if (spec_.levels < 1 || spec_.sub < 1) throw DomainError("grid: levels and sub must be >= 1");
    if (spec_.n_phi < 1) throw DomainError("grid: n_phi must be >= 1");
    if (spec_.n_phi > 1 && spec_.n_phi < 4) throw DomainError("grid: n_phi must be 1 or >= 4");
    if (spec_.d_max < spec_.d0 || spec_.d_max >= 1.0) throw DomainError("grid: d_max must lie in [d0, 1)");
    const double h = std::log(2.0) / spec_.sub;
    int up = static_cast<int>(std::ceil(std::log(spec_.d_max / spec_.d0) / h - 1e-9));
    if (std::log(spec_.d0) + up * h > 1e-12) --up;
    for (int k = spec_.levels * spec_.sub; k >= -up; --k) ell_.push_back(std::log(spec_.d0) - k * h);
    h_ell_ = h;
    for (int j = 0; j < spec_.n_phi; ++j) phi_.push_back(column_angle(j));
    normal_.assign(static_cast<std::size_t>(spec_.n_phi) * ell_.size(), 0.0);
    tangential_ = normal_;
  }

  const GridSpec& spec() const { return spec_; }
  const std::vector<double>& ell() const { return ell_; }
  const std::vector<double>& phi() const { return phi_; }
  std::size_t n_nodes() const { return ell_.size() * phi_.size(); }
  double d_min() const { return std::exp(ell_.front()); }
  double d_max() const { return std::exp(ell_.back()); }

  double column_angle(int j) const {
    if (spec_.n_phi == 1) return spec_.phi_center;
    if (spec_.periodic()) return spec_.phi_center - kPi + kTwoPi * j / spec_.n_phi;
    return spec_.phi_center - spec_.phi_halfwidth + 2.0 * spec_.phi_halfwidth * j / (spec_.n_phi - 1);
  }

  cplx node(int j, std::size_t k) const { return std::polar(1.0 - std::exp(ell_[k]), phi_[j]); }

  /// d'/d and the tangential component stored at node (j, k).
  void set(int j, std::size_t k, double normal_ratio, double tangential) {
    normal_[index(j, k)] = normal_ratio;
    tangential_[index(j, k)] = tangential;
  }
  double normal_ratio(int j, std::size_t k) const { return normal_[index(j, k)]; }
  double tangential(int j, std::size_t k) const { return tangential_[index(j, k)]; }

  cplx velocity_at_node(int j, std::size_t k) const {
    const cplx zh = std::polar(1.0, phi_[j]);
    const double d = std::exp(ell_[k]);
    return -zh * (normal_ratio(j, k) * d) + cplx(0.0, 1.0) * zh * tangential(j, k);
  }

  /// Interpolated d'/d and tangential component at zeta.
  std::pair<double, double> components(cplx zeta) const {
    const double r = std::abs(zeta);
    if (!(r < 1.0)) throw DomainError("grid lookup: |zeta| must be < 1");
    return components_at(std::log(1.0 - r), r > 0.0 ? std::arg(zeta) : 0.0);
  }

  /// Same, addressed by l = ln d and phi, which keeps full precision in d.
  std::pair<double, double> components_at(double l, double phi) const {
    const double d = std::exp(l);
    if (l < ell_.front() - 1e-12) {
      const int level = static_cast<int>(std::ceil(std::log2(spec_.d0 / d)));
      throw DomainError("grid lookup: d = " + fmt(d) + " is below the grid coverage d_min = " + fmt(d_min()) +
                        "; requires refinement level k = " + std::to_string(level) + " (levels = " +
                        std::to_string(spec_.levels) + ")");
    }
    if (l > ell_.back() + 1e-12) {
      throw DomainError("grid lookup: d = " + fmt(d) + " exceeds d_max = " + fmt(d_max()));
    }
    // Radial stencil.
    const std::size_t n = ell_.size();
    std::size_t k0 = 0;
    std::array<double, 4> wl{1.0, 0.0, 0.0, 0.0};
    int nk = 1;
    if (n >= 4) {
      const double s = (l - ell_.front()) / h_ell_;
      const long base = std::clamp(static_cast<long>(std::floor(s)) - 1, 0L, static_cast<long>(n) - 4);
      k0 = static_cast<std::size_t>(base);
      wl = detail::lagrange4(s - static_cast<double>(base));
      nk = 4;
    } else {
      throw DomainError("grid: fewer than 4 radial nodes");
    }
    // Angular stencil.
    std::array<int, 4> js{0, 0, 0, 0};
    std::array<double, 4> wp{1.0, 0.0, 0.0, 0.0};
    int nj = 1;
    if (spec_.n_phi == 1) {
      if (std::abs(wrap_angle(phi - spec_.phi_center)) > spec_.axis_tol) {
        throw DomainError("grid lookup: phi = " + fmt(phi) + " is off the single sampled ray phi = " +
                          fmt(spec_.phi_center));
      }
      js[0] = 0;
    } else if (spec_.periodic()) {
      const double step = kTwoPi / spec_.n_phi;
      const double s = (wrap_angle(phi - spec_.phi_center) + kPi) / step;
      const long base = static_cast<long>(std::floor(s)) - 1;
      wp = detail::lagrange4(s - static_cast<double>(base));
      for (int q = 0; q < 4; ++q) js[q] = static_cast<int>(((base + q) % spec_.n_phi + spec_.n_phi) % spec_.n_phi);
      nj = 4;
    } else {
      const double off = wrap_angle(phi - spec_.phi_center);
      if (std::abs(off) > spec_.phi_halfwidth + 1e-12) {
        throw DomainError("grid lookup: phi = " + fmt(phi) + " is outside the sampled sector");
      }
      const double step = 2.0 * spec_.phi_halfwidth / (spec_.n_phi - 1);
      const double s = (off + spec_.phi_halfwidth) / step;
      const long base = std::clamp(static_cast<long>(std::floor(s)) - 1, 0L, static_cast<long>(spec_.n_phi) - 4);
      wp = detail::lagrange4(s - static_cast<double>(base));
      for (int q = 0; q < 4; ++q) js[q] = static_cast<int>(base + q);
      nj = 4;
    }
    double a = 0.0, t = 0.0;
    for (int q = 0; q < nj; ++q) {
      for (int p = 0; p < nk; ++p) {
        const double w = wp[q] * wl[p];
        a += w * normal_ratio(js[q], k0 + p);
        t += w * tangential(js[q], k0 + p);
      }
    }
    return {a, t};
  }

  cplx velocity(cplx zeta) const {
    const auto [a, t] = components(zeta);
    const double r = std::abs(zeta);
    const cplx zh = r > 0.0 ? zeta / r : cplx(1.0, 0.0);
    return -zh * (a * (1.0 - r)) + cplx(0.0, 1.0) * zh * t;
  }

  double dprime(cplx zeta) const { return components(zeta).first * (1.0 - std::abs(zeta)); }

  nlohmann::json header() const {
    nlohmann::json j;
    j["grid"] = spec_;
    j["n_ell"] = ell_.size();
    j["d_min"] = d_min();
    j["meta"] = meta_;
    return j;
  }

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void write_csv(std::ostream& os) const {
    os << "r,phi,re_v,im_v\n" << std::setprecision(17);
    for (int j = 0; j < spec_.n_phi; ++j) {
      for (std::size_t k = 0; k < ell_.size(); ++k) {
        const cplx v = velocity_at_node(j, k);
        os << 1.0 - std::exp(ell_[k]) << ',' << phi_[j] << ',' << v.real() << ',' << v.imag() << '\n';
      }
    }
  }

  /// Stored components with round-trip precision, for field caches.
  void write_components(std::ostream& os) const {
    os << "j,k,normal_ratio,tangential\n" << std::setprecision(17);
    for (int j = 0; j < spec_.n_phi; ++j) {
      for (std::size_t k = 0; k < ell_.size(); ++k) {
        os << j << ',' << k << ',' << normal_ratio(j, k) << ',' << tangential(j, k) << '\n';
      }
    }
  }

  static VelocityGrid read_components(const GridSpec& spec, std::istream& is) {
    VelocityGrid g(spec);
    std::string line;
    std::getline(is, line);
    if (line != "j,k,normal_ratio,tangential") throw ConstructionError("field cache: unexpected header \"" + line + "\"");
    for (std::size_t n = 0; n < g.n_nodes(); ++n) {
      if (!std::getline(is, line)) throw ConstructionError("field cache: truncated");
      std::stringstream ss(line);
      int j;
      std::size_t k;
      double a, t;
      char c1, c2, c3;
      ss >> j >> c1 >> k >> c2 >> a >> c3 >> t;
      if (!ss || j < 0 || j >= spec.n_phi || k >= g.ell_.size()) {
        throw ConstructionError("field cache: malformed row \"" + line + "\"");
      }
      g.set(j, k, a, t);
    }
    return g;
  }

  static VelocityGrid read(const nlohmann::json& header, std::istream& csv) {
    VelocityGrid g(header.at("grid").get<GridSpec>());
    if (header.contains("meta")) g.meta_ = header.at("meta");
    std::string line;
    std::getline(csv, line);
    if (line != "r,phi,re_v,im_v") throw ConstructionError("velocity grid csv: unexpected header \"" + line + "\"");
    for (int j = 0; j < g.spec_.n_phi; ++j) {
      for (std::size_t k = 0; k < g.ell_.size(); ++k) {
        if (!std::getline(csv, line)) throw ConstructionError("velocity grid csv: truncated");
        std::stringstream ss(line);
        double r, phi, re, im;
        char c1, c2, c3;
        ss >> r >> c1 >> phi >> c2 >> re >> c3 >> im;
        if (!ss) throw ConstructionError("velocity grid csv: malformed row \"" + line + "\"");
        const cplx zh = std::polar(1.0, g.phi_[j]);
        const cplx v(re, im);
        const double d = std::exp(g.ell_[k]);
        g.set(j, k, -std::real(std::conj(zh) * v) / d, std::real(std::conj(cplx(0.0, 1.0) * zh) * v));
      }
    }
    return g;
  }

 private:
  std::size_t index(int j, std::size_t k) const { return static_cast<std::size_t>(j) * ell_.size() + k; }

  static std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
  }

  GridSpec spec_;
  std::vector<double> ell_;  // ascending ln d
  double h_ell_ = 0.0;
  std::vector<double> phi_;
  std::vector<double> normal_;
  std::vector<double> tangential_;
  nlohmann::json meta_ = nlohmann::json::object();
};

/// Samples the field at every grid node.  Columns are independent and run on
/// `threads` workers, each with its own evaluator; within a column nodes run
/// from the interior outward so the evaluator's det cache is reused.
inline VelocityGrid precompute_field(const ConformalDomain& dom, const VorticityField& w, const GridSpec& spec,
                                     const VelocityOptions& opt = {}, unsigned threads = 0,
                                     const std::function<void(std::size_t, std::size_t)>& progress = {}) {
  VelocityGrid grid(spec);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(spec.n_phi));
  std::atomic<int> next{0};
  std::atomic<std::size_t> done{0};
  const std::size_t total = grid.n_nodes();
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned id) {
    try {
      BiotSavart bs(dom, w, opt);
      for (int j = next++; j < spec.n_phi; j = next++) {
        for (std::size_t k = grid.ell().size(); k-- > 0;) {
          const cplx z = grid.node(j, k);
          const FieldValue f = bs.evaluate(z);
          grid.set(j, k, f.dprime_direct / std::exp(grid.ell()[k]), f.tangential);
          const std::size_t n = ++done;
          if (progress && threads == 1) progress(n, total);
        }
      }
    } catch (...) {
      errors[id] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return grid;
}

}  // namespace seuler
