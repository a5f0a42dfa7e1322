#pragma once

// Boundary traces S((1 - eps) e^{i phi}), polygon diagnostics and export.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "seuler/conformal.hpp"

namespace seuler {

struct TracePoint {
  double phi;
  cplx w;
};

/// Samples S on the circle of radius 1 - eps at n uniform angles starting at
/// phi = -pi.  With `richardson`, combines radii 1 - eps and 1 - 2 eps to
/// cancel the first-order offset.
inline std::vector<TracePoint> trace_boundary(const ConformalDomain& dom, int n, double eps,
                                              bool richardson = false) {
  if (n < 8) throw DomainError("trace_boundary: n must be >= 8");
  if (!(eps > 0.0) || eps > 0.1) throw DomainError("trace_boundary: eps must lie in (0, 0.1]");
  std::vector<TracePoint> out(n);
  for (int j = 0; j < n; ++j) {
    const double phi = -kPi + kTwoPi * j / n;
    cplx w = dom.map_s(std::polar(1.0 - eps, phi));
    if (richardson) w = 2.0 * w - dom.map_s(std::polar(1.0 - 2.0 * eps, phi));
    out[j] = {phi, w};
  }
  return out;
}

inline double signed_area(const std::vector<TracePoint>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const cplx p = poly[i].w;
    const cplx q = poly[(i + 1) % poly.size()].w;
    a += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * a;
}

inline int winding_number(const std::vector<TracePoint>& poly, cplx center) {
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const cplx p = poly[i].w - center;
    const cplx q = poly[(i + 1) % poly.size()].w - center;
    total += std::arg(q / p);
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

struct Line {
  cplx point;
  cplx dir;  // unit, oriented along the traversal
};

/// Total-least-squares line through the points.
inline Line fit_line(const std::vector<cplx>& pts) {
  cplx mean = 0.0;
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : pts) {
    const cplx d = p - mean;
    sxx += d.real() * d.real();
    syy += d.imag() * d.imag();
    sxy += d.real() * d.imag();
  }
  const double ang = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  cplx dir = std::polar(1.0, ang);
  if (std::real(std::conj(dir) * (pts.back() - pts.front())) < 0.0) dir = -dir;
  return {mean, dir};
}

inline cplx intersect(const Line& a, const Line& b) {
  // a.point + s a.dir = b.point + t b.dir
  const cplx d = b.point - a.point;
  const double den = a.dir.real() * b.dir.imag() - a.dir.imag() * b.dir.real();
  const double s = (d.real() * b.dir.imag() - d.imag() * b.dir.real()) / den;
  return a.point + s * a.dir;
}

struct PolygonFit {
  std::vector<cplx> vertices;         // images of the corner pre-images, in order
  std::vector<double> interior_angles;
  std::vector<double> side_lengths;   // side k joins vertex k and k+1
};

/// Fits straight sides between consecutive corner pre-images `corners`
/// (ascending angles) using the trace points in the middle `keep` fraction of
/// each arc, then intersects neighbouring sides.
inline PolygonFit fit_polygon(const std::vector<TracePoint>& trace, std::vector<double> corners,
                              double keep = 0.5) {
  std::sort(corners.begin(), corners.end());
  const std::size_t k = corners.size();
  std::vector<Line> sides;
  for (std::size_t i = 0; i < k; ++i) {
    const double a = corners[i];
    const double b = (i + 1 < k) ? corners[i + 1] : corners[0] + kTwoPi;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * keep * (b - a);
    std::vector<std::pair<double, cplx>> sel;
    for (const auto& p : trace) {
      double phi = p.phi;
      while (phi < a) phi += kTwoPi;
      if (std::abs(phi - mid) <= half) sel.emplace_back(phi, p.w);
    }
    std::sort(sel.begin(), sel.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<cplx> pts;
    for (const auto& s : sel) pts.push_back(s.second);
    sides.push_back(fit_line(pts));
  }
  PolygonFit fit;
  // Vertex i lies between side i-1 and side i.
  for (std::size_t i = 0; i < k; ++i) {
    const Line& prev = sides[(i + k - 1) % k];
    const Line& next = sides[i];
    fit.vertices.push_back(intersect(prev, next));
    const double turn = std::arg(next.dir / prev.dir);
    fit.interior_angles.push_back(kPi - turn);
  }
  for (std::size_t i = 0; i < k; ++i) fit.side_lengths.push_back(std::abs(fit.vertices[(i + 1) % k] - fit.vertices[i]));
  return fit;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "phi,re,im\n" << std::setprecision(17);
  for (const auto& p : trace) os << p.phi << ',' << p.w.real() << ',' << p.w.imag() << '\n';
}

inline void write_trace_svg(std::ostream& os, const std::vector<TracePoint>& trace, double size = 512.0) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : trace) {
    xmin = std::min(xmin, p.w.real());
    xmax = std::max(xmax, p.w.real());
    ymin = std::min(ymin, p.w.imag());
    ymax = std::max(ymax, p.w.imag());
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const double pad = 0.05 * span;
  std::ostringstream path;
  path << std::setprecision(9);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    // SVG's y axis points down.
    path << (i == 0 ? "M" : " L") << trace[i].w.real() << ' ' << -trace[i].w.imag();
  }
  path << " Z";
  os << std::setprecision(9);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"" << xmin - pad << ' ' << -ymax - pad << ' ' << span + 2 * pad << ' ' << span + 2 * pad
     << "\">\n";
  os << "  <path d=\"" << path.str() << "\" fill=\"#dde8f4\" stroke=\"#1f4e79\" stroke-width=\""
     << span / 400.0 << "\"/>\n";
  os << "</svg>\n";
}

}  // namespace seuler
