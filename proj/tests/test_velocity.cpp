#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "seuler/domains.hpp"
#include "seuler/velocity.hpp"
#include "seuler/velocity_grid.hpp"

using namespace seuler;

namespace {

const ConformalDomain& section4_domain() {
  static const ConformalDomain dom = construct_modulus_domain(Modulus::capped_log(kPi / 4), 0.25);
  return dom;
}

VelocityOptions fast() {
  VelocityOptions o;
  o.rel_tol = 1e-5;
  return o;
}

}  // namespace

TEST(Kernel, VanishesOnUnitCircleAndStaysFiniteAtOrigin) {
  const cplx zeta(0.3, -0.2);
  for (double t : {0.0, 1.0, 2.5, -2.0}) {
    EXPECT_LT(std::abs(bs_kernel(zeta, std::polar(1.0, t))), 1e-12);
    EXPECT_LT(std::abs(normal_kernel(zeta, std::polar(1.0 - 1e-15, t))), 1e-10);
  }
  const cplx k0 = bs_kernel(zeta, 0.0);
  EXPECT_LT(std::abs(k0 - zeta / std::norm(zeta)), 1e-14);
  EXPECT_LT(std::abs(bs_kernel(zeta, cplx(1e-9, 0.0)) - k0), 1e-7);
}

TEST(DiscVelocity, RigidRotationAtHalf) {
  const auto disc = disc_domain();
  const cplx v = disc_velocity(disc, VorticityField::constant(1.0), 0.5);
  EXPECT_NEAR(v.real(), 0.0, 1e-9);
  EXPECT_NEAR(v.imag(), 0.25, 1e-9);
}

TEST(DiscVelocity, RigidRotationOnProbePoints) {
  const auto disc = disc_domain();
  BiotSavart bs(disc, VorticityField::constant(1.0));
  for (int i = 0; i < 20; ++i) {
    const cplx z = std::polar(0.05 + 0.94 * ((i * 7) % 20) / 19.0, -3.0 + 0.31 * i);
    const cplx v = bs.evaluate(z).v;
    EXPECT_LT(std::abs(v - cplx(0.0, 0.5) * z), 1e-3 * std::abs(z)) << z;
  }
}

TEST(DiscVelocity, ZeroFieldGivesZero) {
  for (const auto& dom : {disc_domain(), triangle_domain()}) {
    BiotSavart bs(dom, VorticityField::constant(0.0));
    for (cplx z : {cplx(0.0), cplx(0.4, 0.3), cplx(-0.99, 0.0)}) {
      const auto f = bs.evaluate(z);
      EXPECT_EQ(f.v, cplx(0.0));
      EXPECT_EQ(f.dprime, 0.0);
    }
  }
}

TEST(DiscVelocity, RejectsPointsOutsideDisc) {
  const auto disc = disc_domain();
  EXPECT_THROW(disc_velocity(disc, VorticityField::constant(1.0), cplx(1.0, 0.0)), DomainError);
  EXPECT_THROW(boundary_distance_rate(disc, VorticityField::constant(1.0), 0.0), DomainError);
}

TEST(DiscVelocity, RingMatchesRadialOracle) {
  // Azimuthal speed of a centred patch: r/2 inside, R^2/(2r) outside.
  const auto disc = disc_domain();
  const double R = 0.5;
  BiotSavart bs(disc, VorticityField::ring(1.0, R));
  for (double r : {0.2, 0.45, 0.55, 0.8, 0.97}) {
    const cplx z = std::polar(r, 0.7);
    const double expect = r <= R ? 0.5 * r : 0.5 * R * R / r;
    const auto f = bs.evaluate(z);
    EXPECT_NEAR(f.tangential, expect, 1e-6) << r;
    EXPECT_NEAR(f.dprime_direct, 0.0, 1e-8) << r;
  }
}

TEST(BoundaryRate, RotationLeavesDistanceFixed) {
  const auto disc = disc_domain();
  EXPECT_NEAR(boundary_distance_rate(disc, VorticityField::constant(1.0), 0.5), 0.0, 1e-10);
}

TEST(BoundaryRate, TwoPathsAgreeOffAxis) {
  const auto tri = triangle_domain();
  BiotSavart bs(tri, VorticityField::odd_half(1.0));
  for (cplx z : {cplx(0.3, 0.5), cplx(-0.6, -0.2), cplx(0.1, 0.93)}) {
    const auto f = bs.evaluate(z);
    EXPECT_LT(std::abs(f.dprime - f.dprime_direct), 1e-3 * std::abs(f.dprime_direct)) << z;
  }
}

TEST(Section4, OddFieldOnAxisPointsInward) {
  BiotSavart bs(section4_domain(), VorticityField::odd_half(1.0), fast());
  ASSERT_TRUE(bs.folds_real_axis());
  const auto f = bs.evaluate(0.9);
  EXPECT_EQ(f.v.imag(), 0.0);
  EXPECT_LT(f.dprime, 0.0);
  EXPECT_LT(std::abs(f.dprime - f.dprime_direct), 1e-3 * std::abs(f.dprime_direct));
}

TEST(Section4, UnfoldedIntegralIsSymmetricToo) {
  VelocityOptions o = fast();
  o.use_symmetry = false;
  BiotSavart full(section4_domain(), VorticityField::odd_half(1.0), o);
  BiotSavart folded(section4_domain(), VorticityField::odd_half(1.0), fast());
  const auto a = full.evaluate(0.7);
  const auto b = folded.evaluate(0.7);
  EXPECT_LT(std::abs(a.v.imag()), 1e-6);
  EXPECT_LT(std::abs(a.v - b.v), 1e-4 * std::abs(b.v));
  EXPECT_LT(std::abs(a.dprime - a.dprime_direct), 1e-3 * std::abs(a.dprime_direct));
}

TEST(Section4, NormalRateScalesWithDistance) {
  // d'/d stays bounded on the way to the boundary and grows slowly (log-like).
  BiotSavart bs(section4_domain(), VorticityField::odd_half(1.0), fast());
  double prev = 0.0;
  for (int k = 2; k <= 12; k += 2) {
    const double d = std::pow(10.0, -0.5 * k);
    const double ratio = bs.evaluate(1.0 - d).dprime_direct / d;
    EXPECT_LT(ratio, prev);
    EXPECT_GT(ratio, -100.0);
    prev = ratio;
  }
}

TEST(Incompressibility, SquaresInPhysicalPlaneHaveNoFluxAndUnitVorticity) {
  // u = v S'(zeta) is the physical velocity; with omega = 1 its circulation
  // around a small square equals the area and its flux vanishes.
  const auto tri = triangle_domain();
  VelocityOptions o;
  o.rel_tol = 1e-5;
  BiotSavart bs(tri, VorticityField::constant(1.0), o);
  const auto rule = quad::gauss_legendre(5);
  for (cplx zc : {cplx(0.1, 0.2), cplx(0.4, -0.3)}) {
    const cplx xc = tri.map_s(zc);
    const double h = 0.02;
    const cplx corners[4] = {xc + cplx(-h, -h) / 2.0, xc + cplx(h, -h) / 2.0, xc + cplx(h, h) / 2.0,
                             xc + cplx(-h, h) / 2.0};
    double circ = 0.0, flux = 0.0;
    for (int s = 0; s < 4; ++s) {
      const cplx a = corners[s], b = corners[(s + 1) % 4];
      const cplx tangent = (b - a) / h;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const cplx x = a + (b - a) * (0.5 * (rule.nodes[q] + 1.0));
        const cplx z = tri.inverse_map(x);
        const cplx u = bs.evaluate(z).v * tri.sprime(z);
        const double w = 0.5 * h * rule.weights[q];
        circ += w * (u.real() * tangent.real() + u.imag() * tangent.imag());
        flux += w * (u.real() * tangent.imag() - u.imag() * tangent.real());
      }
    }
    EXPECT_NEAR(circ, h * h, 0.01 * h * h) << zc;
    EXPECT_LT(std::abs(flux), 0.01 * h * h) << zc;
  }
}

TEST(Grid, CoversRequestedLevels) {
  GridSpec g;
  g.levels = 20;
  g.d0 = 0.25;
  g.d_max = 0.25;
  VelocityGrid grid(g);
  EXPECT_NEAR(grid.d_min(), 0.25 * std::pow(2.0, -20), 1e-18);
  EXPECT_NEAR(grid.d_max(), 0.25, 1e-15);
  try {
    (void)grid.velocity(1.0 - 0.25 * std::pow(2.0, -23));
    FAIL() << "expected a coverage error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("refinement level k = 23"), std::string::npos) << e.what();
  }
}

TEST(Grid, DiscRotationInterpolates) {
  GridSpec g;
  g.d0 = 0.5;
  g.levels = 8;
  g.sub = 4;
  g.d_max = 0.9;
  g.n_phi = 16;
  const auto disc = disc_domain();
  const auto grid = precompute_field(disc, VorticityField::constant(1.0), g);
  for (int i = 0; i < 40; ++i) {
    const cplx z = std::polar(0.12 + 0.877 * ((i * 13) % 40) / 39.0, -3.1 + 0.157 * i);
    EXPECT_LT(std::abs(grid.velocity(z) - cplx(0.0, 0.5) * z), 5e-4 * 0.5 * std::abs(z)) << z;
  }
}

TEST(Grid, CsvRoundTrip) {
  GridSpec g;
  g.levels = 3;
  g.n_phi = 4;
  VelocityGrid grid(g);
  for (int j = 0; j < g.n_phi; ++j) {
    for (std::size_t k = 0; k < grid.ell().size(); ++k) grid.set(j, k, -1.0 - 0.1 * j - 0.01 * k, 0.3 * j + k);
  }
  grid.meta()["domain_hash"] = "abc";
  std::stringstream csv;
  grid.write_csv(csv);
  const auto back = VelocityGrid::read(grid.header(), csv);
  EXPECT_EQ(back.meta()["domain_hash"], "abc");
  for (int j = 0; j < g.n_phi; ++j) {
    for (std::size_t k = 0; k < grid.ell().size(); ++k) {
      EXPECT_NEAR(back.normal_ratio(j, k), grid.normal_ratio(j, k), 1e-12);
      EXPECT_NEAR(back.tangential(j, k), grid.tangential(j, k), 1e-12);
    }
  }
}

TEST(Grid, OddFieldMirrorSymmetry) {
  // For odd w on a conjugation-symmetric domain, v(conj zeta) = conj v(zeta).
  GridSpec g;
  g.d0 = 0.5;
  g.levels = 4;
  g.n_phi = 8;
  VelocityOptions o;
  o.use_symmetry = false;
  const auto tri = triangle_domain();
  const auto grid = precompute_field(tri, VorticityField::odd_half(1.0), g, o);
  for (int j = 1; j < g.n_phi; ++j) {
    const int m = g.n_phi - j;
    for (std::size_t k = 0; k < grid.ell().size(); ++k) {
      const cplx a = grid.velocity_at_node(j, k);
      const cplx b = grid.velocity_at_node(m, k);
      EXPECT_LT(std::abs(b - std::conj(a)), 1e-6) << j << ' ' << k;
    }
  }
}

TEST(Grid, AxisColumnInterpolatesSection4) {
  GridSpec g;
  g.d0 = 0.5;
  g.levels = 10;
  g.sub = 4;
  g.n_phi = 1;
  const auto grid = precompute_field(section4_domain(), VorticityField::odd_half(1.0), g, fast());
  BiotSavart bs(section4_domain(), VorticityField::odd_half(1.0), fast());
  for (double d : {0.37, 0.05, 3.3e-3, 7.1e-4}) {
    const double direct = bs.evaluate(1.0 - d).v.real();
    const double interp = grid.velocity(1.0 - d).real();
    EXPECT_LT(std::abs(interp - direct), 5e-4 * std::abs(direct)) << d;
  }
  EXPECT_THROW((void)grid.velocity(std::polar(0.8, 0.01)), DomainError);
}
