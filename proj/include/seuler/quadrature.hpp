#pragma once

// Adaptive Gauss-Kronrod quadrature in one dimension.
//
// The integrator is a global-adaptive scheme in the style of QUADPACK's QAG:
// the interval with the largest error estimate is bisected until the summed
// estimate drops below max(abs_tol, rel_tol * |I|).  Integrands may return
// double or std::complex<double>.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace seuler {
namespace quad {

template <typename T>
inline double magnitude(const T& v) {
  return std::abs(v);
}

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (nodes x >= 0).
inline constexpr std::array<double, 11> kGK21Nodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kGK21Weights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights at the odd-indexed Kronrod nodes 1,3,5,7,9.
inline constexpr std::array<double, 5> kG10Weights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
struct Segment {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename F>
auto gk21(F& f, double a, double b, std::size_t& evals) {
  using T = std::decay_t<decltype(f(a))>;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<T, 21> fv;
  fv[10] = f(c);
  for (std::size_t i = 0; i < 10; ++i) {
    const double dx = h * kGK21Nodes[i];
    fv[i] = f(c - dx);
    fv[20 - i] = f(c + dx);
  }
  evals += 21;
  T kron = fv[10] * kGK21Weights[10];
  T gauss = T{};
  double resabs = magnitude(fv[10]) * kGK21Weights[10];
  for (std::size_t i = 0; i < 10; ++i) {
    const T pair = fv[i] + fv[20 - i];
    kron += pair * kGK21Weights[i];
    resabs += (magnitude(fv[i]) + magnitude(fv[20 - i])) * kGK21Weights[i];
    if (i % 2 == 1) gauss += pair * kG10Weights[i / 2];
  }
  const T mean = kron * 0.5;
  double resasc = magnitude(T(fv[10] - mean)) * kGK21Weights[10];
  for (std::size_t i = 0; i < 10; ++i) {
    resasc += (magnitude(T(fv[i] - mean)) + magnitude(T(fv[20 - i] - mean))) * kGK21Weights[i];
  }
  const double ah = std::abs(h);
  resabs *= ah;
  resasc *= ah;
  double err = magnitude(T((kron - gauss) * h));
  // QUADPACK's rescaling of the raw Kronrod-Gauss difference.
  if (err > 0.0 && resasc > 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }
  return Segment<T>{a, b, kron * h, err};
}

}  // namespace detail

struct Options {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  std::size_t max_segments = 4000;
};

template <typename T>
struct Result {
  T value{};
  double error = 0.0;
  std::size_t evals = 0;
  bool converged = true;
};

/// Integrates f over [a, b].  Points listed in `breaks` that fall strictly
/// inside (a, b) become initial segment boundaries, which is how callers mark
/// kinks, jumps and near-singular points.
template <typename F>
auto integrate(F&& f, double a, double b, const std::vector<double>& breaks = {},
               const Options& opt = {}) {
  using T = std::decay_t<decltype(f(a))>;
  Result<T> out;
  if (a == b) return out;
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw std::invalid_argument("quad::integrate: finite limits required");
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> pts{a};
  for (double p : breaks) {
    if (p > a && p < b) pts.push_back(p);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double err_total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    auto s = detail::gk21(f, pts[i], pts[i + 1], out.evals);
    total += s.value;
    err_total += s.error;
    heap.push(s);
  }
  const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * (b - a);
  while (err_total > std::max(opt.abs_tol, opt.rel_tol * magnitude(total))) {
    if (heap.size() >= opt.max_segments) {
      out.converged = false;
      break;
    }
    auto worst = heap.top();
    if (worst.b - worst.a < min_width) {
      out.converged = false;
      break;
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk21(f, worst.a, mid, out.evals);
    auto right = detail::gk21(f, mid, worst.b, out.evals);
    total += left.value + right.value - worst.value;
    err_total += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift accumulated by incremental updates.
  T sum{};
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  out.value = sum * sign;
  out.error = esum;
  return out;
}

/// Integrates f over [a, +inf) through the substitution x = a + t / (1 - t).
template <typename F>
auto integrate_to_infinity(F&& f, double a, const Options& opt = {}) {
  auto g = [&](double t) {
    const double one_minus = 1.0 - t;
    const double x = a + t / one_minus;
    using T = std::decay_t<decltype(f(a))>;
    if (!std::isfinite(x)) return T{};
    return f(x) * (1.0 / (one_minus * one_minus));
  };
  return integrate(g, 0.0, 1.0, {}, opt);
}

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(std::size_t n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace quad
}  // namespace seuler
