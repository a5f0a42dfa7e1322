#include <gtest/gtest.h>

#include <cmath>
#include "json.hpp"

#include "seuler/modulus.hpp"
#include "seuler/serialize.hpp"

using namespace seuler;

namespace {

// Composite Simpson in ln r; independent of the library quadrature.
double oracle_log_integral(const Modulus& m, double s, int n = 20000) {
  const double a = std::log(s);
  const double h = -a / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * m(std::exp(x));
  }
  return sum * h / 3.0;
}

double oracle_q(const Modulus& m, double s) {
  return s * std::exp(2.0 / kPi * oracle_log_integral(m, s));
}

}  // namespace

TEST(Modulus, EvaluatesFamilies) {
  EXPECT_EQ(Modulus::zero()(1.0), 0.0);
  EXPECT_NEAR(Modulus::capped_log(kPi / 2)(std::exp(-4.0)), kPi / 8, 1e-15);
  EXPECT_NEAR(Modulus::linear(2.0)(0.25), 0.5, 1e-15);
  EXPECT_NEAR(Modulus::capped_log(1.0)(1.0), 0.5, 1e-15);
  EXPECT_THROW(Modulus::capped_log(1.0)(7.0), DomainError);
  EXPECT_THROW(Modulus::zero()(-1e-3), DomainError);
}

TEST(Modulus, TabulatedInterpolatesAndPrependsOrigin) {
  auto m = Modulus::tabulated({{0.5, 1.0}, {1.0, 1.5}});
  ASSERT_EQ(m.knots().size(), 3u);
  EXPECT_NEAR(m(0.25), 0.5, 1e-15);
  EXPECT_NEAR(m(0.75), 1.25, 1e-15);
  EXPECT_NEAR(m(3.0), 1.5, 1e-15);
  EXPECT_THROW(Modulus::tabulated({{0.5, 1.0}, {0.4, 1.0}}), ConstructionError);
}

TEST(Modulus, IteratedDepthLimits) {
  EXPECT_THROW(Modulus::iterated_log(4, 1.0), ConstructionError);
  auto m2 = Modulus::iterated_log(2, 1.0);
  auto c = Modulus::capped_log(1.0);
  for (double r : {1e-8, 1e-3, 0.1, 0.2, 3.0}) EXPECT_DOUBLE_EQ(m2(r), c(r));
  auto m3 = Modulus::iterated_log(3, 0.5);
  EXPECT_TRUE(m3.is_concave());
  EXPECT_TRUE(validate_modulus(m3, 64).pass);
}

TEST(Modulus, LogIntegralMatchesOracle) {
  const std::vector<Modulus> ms{Modulus::linear(1.3), Modulus::capped_log(0.7),
                                Modulus::iterated_log(3, 0.4),
                                Modulus::tabulated({{0.01, 0.1}, {0.1, 0.4}, {2.0, 0.9}})};
  for (const auto& m : ms) {
    for (double s : {0.9, 0.3, 1e-2, 1e-5}) {
      EXPECT_NEAR(m.log_integral(std::log(1.0 / s)), oracle_log_integral(m, s), 1e-8)
          << to_string(m.family()) << " s=" << s;
    }
  }
}

TEST(RateFunctions, QClosedForms) {
  RateFunctions zero(Modulus::zero());
  EXPECT_DOUBLE_EQ(zero.q(0.25), 0.25);
  EXPECT_DOUBLE_EQ(zero.q(1.0), 1.0);
  RateFunctions cl(Modulus::capped_log(kPi / 2));
  const double s = std::exp(-4.0);
  EXPECT_NEAR(cl.q(s), 0.0995741367357278859586848313001, 1e-15);
  EXPECT_NEAR(cl.q(s), oracle_q(cl.modulus(), s), 1e-10);
  EXPECT_NEAR(cl.q(s) / s, cl.Q(s), 1e-12 * cl.Q(s));
  EXPECT_THROW(cl.q(0.0), DomainError);
  EXPECT_THROW(cl.q(1.5), DomainError);
}

TEST(RateFunctions, QIsMonotoneAndSubPolynomial) {
  for (const auto& m : {Modulus::linear(1.0), Modulus::capped_log(2.0), Modulus::iterated_log(3, 1.0)}) {
    RateFunctions rf(m);
    EXPECT_DOUBLE_EQ(rf.Q(1.0), 1.0);
    double prev = 1.0;
    for (double s = 1.0; s > 1e-300; s *= 0.5) {
      const double Q = rf.Q(s);
      EXPECT_GE(Q, 1.0);
      EXPECT_GE(Q, prev * (1.0 - 1e-14));
      prev = Q;
    }
    // s^alpha Q(s) -> 0, checked in log form along s = 10^-k.
    for (double alpha : {0.5, 0.1}) {
      double last = 0.0;
      for (int k = 50; k <= 5000; k *= 10) {
        const double u = k * std::log(10.0);
        last = -alpha * u + rf.log_Q_u(u);
      }
      EXPECT_LT(last, -10.0) << to_string(m.family()) << " alpha=" << alpha;
    }
  }
}

TEST(RateFunctions, RhoForZeroModulus) {
  RateFunctions rf(Modulus::zero());
  EXPECT_NEAR(rf.rho(0.0), std::exp(-1.0), 1e-12);
  EXPECT_NEAR(rf.rho(1.0), std::exp(-std::exp(1.0)), 1e-12);
  for (double t = -2.0; t <= 3.0; t += 0.05) {
    EXPECT_NEAR(rf.rho(t), std::exp(-std::exp(t)), 1e-8);
  }
}

TEST(RateFunctions, RhoRoundTripAndMonotone) {
  RateFunctions rf(Modulus::capped_log(kPi / 4));
  // Frozen from a 30-digit independent evaluation.
  EXPECT_NEAR(rf.rho(2.0) / 9.49292368300803562466958086367e-11, 1.0, 1e-8);
  // Checked in u = ln(1/rho), since rho itself underflows beyond t ~ 3.
  double prev = 0.0;
  for (double t = -3.0; t <= 5.0; t += 0.25) {
    const double u = rf.rho_log_inverse(t);
    EXPECT_GT(u, prev);
    EXPECT_NEAR(rf.y_of_log_distance(-u), t, 1e-8);
    prev = u;
  }
  EXPECT_GT(rf.rho(2.5), 0.0);
}

TEST(RateFunctions, RhoUnrepresentableInConvergentClass) {
  RateFunctions rf(Modulus::capped_log(kPi));
  EXPECT_NEAR(rf.total_inverse_q_integral(), 1.0 + std::exp(-2.0), 1e-9);
  EXPECT_THROW(rf.rho(1.0), UnrepresentableError);
  EXPECT_NO_THROW(rf.rho(-1.0));
}

TEST(Classification, AnalyticRules) {
  auto z = classify(Modulus::zero());
  EXPECT_EQ(z.divergence, DivergenceClass::divergent);
  EXPECT_EQ(z.dini, DiniClass::dini);
  auto below = classify(Modulus::capped_log(kPi / 2 - 0.1));
  EXPECT_EQ(below.divergence, DivergenceClass::divergent);
  EXPECT_EQ(below.dini, DiniClass::non_dini);
  auto above = classify(Modulus::capped_log(kPi / 2 + 0.1));
  EXPECT_EQ(above.divergence, DivergenceClass::convergent);
  EXPECT_FALSE(above.numeric_heuristic);
}

TEST(Classification, TrendAgreesWithAnalyticRule) {
  auto lo = RateFunctions(Modulus::capped_log(kPi / 2 - 0.1)).inverse_q_trend();
  auto hi = RateFunctions(Modulus::capped_log(kPi / 2 + 0.1)).inverse_q_trend();
  EXPECT_NEAR(lo.exponent, 1.0 - 0.2 / kPi, 0.01);
  EXPECT_NEAR(hi.exponent, 1.0 + 0.2 / kPi, 0.01);
  EXPECT_FALSE(lo.converges);
  EXPECT_TRUE(hi.converges);
}

TEST(Classification, TabulatedHeuristic) {
  // Linear table: geometric decay of the Dini increments.
  auto lin = Modulus::tabulated({{1.0, 1.0}, {2.0, 1.5}});
  auto c = classify(lin);
  EXPECT_TRUE(c.numeric_heuristic);
  EXPECT_EQ(c.dini, DiniClass::dini);
  EXPECT_EQ(c.divergence, DivergenceClass::divergent);
  // Tabulated copy of a convergent capped log.
  auto tab = compose_arc_length(Modulus::capped_log(kPi + 0.5), 1.0, 1.0);
  auto ct = classify(tab);
  EXPECT_EQ(ct.divergence, DivergenceClass::convergent);
  EXPECT_EQ(ct.dini, DiniClass::non_dini);
}

TEST(Compose, ExactSubstitution) {
  EXPECT_EQ(compose_arc_length(Modulus::zero(), 3.0, 0.5).family(), ModulusFamily::zero);
  auto id = compose_arc_length(Modulus::linear(1.0), 1.0, 1.0);
  EXPECT_EQ(id.family(), ModulusFamily::linear);
  EXPECT_DOUBLE_EQ(id.slope(), 1.0);
  auto mt = compose_arc_length(Modulus::capped_log(1.0), 2.0, 0.5);
  EXPECT_NEAR(mt(std::exp(-8.0)), 0.302402330736125343084525869126, 1e-6);
  EXPECT_EQ(mt(0.0), 0.0);
  EXPECT_TRUE(validate_modulus(mt, 64).pass);
}

TEST(Compose, PreservesDiniClass) {
  for (const auto& m : {Modulus::linear(0.5), Modulus::capped_log(1.0)}) {
    auto mt = compose_arc_length(m, 2.0, 0.5);
    EXPECT_EQ(classify(m).dini, classify(mt).dini) << to_string(m.family());
  }
}

TEST(Validate, Reports) {
  EXPECT_TRUE(validate_modulus(Modulus::zero(), 32).pass);
  EXPECT_TRUE(validate_modulus(Modulus::capped_log(1.0), 64).pass);
  auto bad = validate_modulus(Modulus::tabulated({{0.5, 1.0}, {1.0, 0.5}}), 32);
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.failure, "monotone");
  EXPECT_GT(bad.worst_violation, 0.0);
  auto nonsub = validate_modulus(Modulus::tabulated({{0.1, 0.0}, {0.2, 1.0}}), 32);
  EXPECT_FALSE(nonsub.pass);
  EXPECT_EQ(nonsub.failure, "subadditive");
}

TEST(Serialize, ModulusRoundTrip) {
  const std::vector<Modulus> ms{Modulus::zero(), Modulus::linear(2.0), Modulus::capped_log(1.5708),
                                Modulus::iterated_log(3, 0.25),
                                Modulus::tabulated({{0.1, 0.2}, {1.0, 0.5}})};
  for (const auto& m : ms) {
    nlohmann::json j = m;
    auto back = j.get<Modulus>();
    EXPECT_EQ(nlohmann::json(back), j);
  }
  auto j = nlohmann::json::parse(R"({"family":"capped_log","a":1.5708})");
  EXPECT_DOUBLE_EQ(j.get<Modulus>().a(), 1.5708);
  EXPECT_THROW(nlohmann::json::parse(R"({"family":"bogus"})").get<Modulus>(), ConstructionError);
}
