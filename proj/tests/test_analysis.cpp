#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "seuler/analysis.hpp"

using namespace seuler;

namespace {

FoldingInstance two_atom_instance() {
  FoldingInstance in;
  in.theta_star = 0.3;
  in.delta = 0.4;
  in.alpha = 2.0;
  in.p = 1.0;
  in.cap_radius = 0.4;
  in.beta = BoundaryMeasure({{0.3 - 0.4, 0.5}, {0.3 + 0.4, 0.5}});
  return in;
}

double total_mass(const BoundaryMeasure& b) {
  double m = 0.0;
  for (const auto& a : b.atoms()) m += a.mass;
  return m;
}

}  // namespace

TEST(Fold, ReflectsLeftAtom) {
  const double ts = 0.2, d = 0.3;
  const auto out = fold_once(BoundaryMeasure({{ts - 1.5 * d, 1.0}}), ts, d, FoldSide::left);
  ASSERT_EQ(out.atoms().size(), 1u);
  EXPECT_NEAR(out.atoms()[0].theta, ts - 0.5 * d, 1e-15);
  EXPECT_EQ(out.atoms()[0].mass, 1.0);
}

TEST(Fold, LeavesInnerAtomsAlone) {
  const double ts = -1.0, d = 0.5;
  const BoundaryMeasure b({{ts - 0.7 * d, 0.25}, {ts + 1.9 * d, 0.5}});
  const auto out = fold_once(b, ts, d, FoldSide::left);
  ASSERT_EQ(out.atoms().size(), 2u);
  EXPECT_EQ(out.atoms()[0].theta, b.atoms()[0].theta);
  EXPECT_EQ(out.atoms()[1].theta, b.atoms()[1].theta);
}

TEST(Fold, MergesOntoCentre) {
  const double ts = 0.0, d = 0.25;
  const auto out = fold_once(BoundaryMeasure({{ts - 2 * d, 1.0}, {ts, 1.0}}), ts, d, FoldSide::left);
  ASSERT_EQ(out.atoms().size(), 1u);
  EXPECT_EQ(out.atoms()[0].theta, ts);
  EXPECT_EQ(out.atoms()[0].mass, 2.0);
}

TEST(Fold, RightFoldMirrorsLeft) {
  const auto out = fold_once(BoundaryMeasure({{0.5 + 1.5 * 0.2, 1.0}}), 0.5, 0.2, FoldSide::right);
  EXPECT_NEAR(out.atoms()[0].theta, 0.5 + 0.1, 1e-15);
}

TEST(Fold, RejectsSupportOutsideWindow) {
  EXPECT_THROW(fold_once(BoundaryMeasure({{1.0, 1.0}}), 0.0, 0.3, FoldSide::left), DomainError);
  EXPECT_THROW(fold_once(BoundaryMeasure({{0.0, 1.0}}), 0.0, 2.0, FoldSide::left), DomainError);
}

TEST(Fold, WorksAcrossTheBranchCut) {
  const double ts = kPi - 0.05;
  const auto out = fold_once(BoundaryMeasure({{ts + 0.15, 1.0}}), ts, 0.1, FoldSide::right);
  EXPECT_NEAR(wrap_angle(out.atoms()[0].theta - ts), 0.05, 1e-14);
}

TEST(FoldSequence, DiracIsFixed) {
  const auto seq = fold_sequence(BoundaryMeasure({{0.7, 2.0}}), 0.7, 0.5);
  for (const auto& b : seq) {
    ASSERT_EQ(b.atoms().size(), 1u);
    EXPECT_EQ(b.atoms()[0].theta, 0.7);
    EXPECT_EQ(b.atoms()[0].mass, 2.0);
  }
}

TEST(FoldSequence, UniformAtomsCollapseAndKeepMass) {
  const double ts = 1.1, d = 0.6;
  const BoundaryMeasure b({{ts - 1.9 * d, 0.25}, {ts - 0.6 * d, 0.25}, {ts + 0.3 * d, 0.25}, {ts + 1.7 * d, 0.25}});
  const auto seq = fold_sequence(b, ts, d);
  for (const auto& m : seq) EXPECT_NEAR(total_mass(m), 1.0, 1e-14);
  // After j double folds the support has width at most 2^{2-j} delta.
  for (std::size_t k = 0; 2 * k < seq.size() - 1; ++k) {
    EXPECT_LE(support_width(seq[2 * k], ts), std::pow(2.0, 2.0 - k) * d * (1 + 1e-12)) << k;
  }
  EXPECT_LT(support_width(seq[seq.size() - 2], ts), 1e-9);
  ASSERT_EQ(seq.back().atoms().size(), 1u);
  EXPECT_EQ(seq.back().atoms()[0].theta, ts);
}

TEST(FoldingInequality, DiracGivesEquality) {
  auto in = two_atom_instance();
  in.beta = BoundaryMeasure({{in.theta_star, 3.0}});
  const auto v = check_folding_inequality(in);
  EXPECT_EQ(v.margin, 0.0);
  EXPECT_TRUE(v.pass);
}

TEST(FoldingInequality, TwoAtomsAgainstIndependentQuadrature) {
  // Frozen from independent tensor-Gauss (lhs) and QUADPACK (rhs) integrals in
  // cap-centred coordinates.
  const auto v = check_folding_inequality(two_atom_instance(), 1e-8);
  EXPECT_NEAR(v.rhs, 1.0951481185611334, 1e-9);
  EXPECT_NEAR(v.lhs, 0.4972063950681772, 1e-9);
  EXPECT_GT(v.margin, 0.0);
  EXPECT_TRUE(v.pass);
}

TEST(FoldingInequality, StableUnderRefinement) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 4; ++i) {
    const auto in = random_instance(rng);
    const double a = folding_integral(in, in.beta, 1e-6);
    const double b = folding_integral(in, in.beta, 1e-12);
    EXPECT_LT(std::abs(a - b), 1e-7 * b) << i;
  }
}

TEST(FoldingInequality, RejectsDivergentExponents) {
  auto in = two_atom_instance();
  in.alpha = 2.5;
  in.p = 1.2;  // 3 - 5/6 > 2
  try {
    validate(in);
    FAIL() << "expected rejection";
  } catch (const ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("p * alpha - 5/6 = 2.1"), std::string::npos) << e.what();
  }
  in.p = 1.0;
  EXPECT_NO_THROW(validate(in));
  in.alpha = 0.5;
  EXPECT_THROW(validate(in), ConstructionError);
}

TEST(FoldingInequality, CatalogueMeetsHypotheses) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto in = random_instance(rng);
    EXPECT_NO_THROW(validate(in));
    EXPECT_TRUE(hypotheses_hold(in));
  }
}

TEST(FoldingInequality, SeededSuitePasses) {
  const auto rep = run_folding_suite(8, 2024);
  EXPECT_TRUE(rep.pass);
  for (const auto& v : rep.verdicts) EXPECT_GE(v.margin, -3e-6 * v.scale);
}

TEST(FoldingChain, IntegralsDoNotDecrease) {
  auto in = two_atom_instance();
  in.beta = BoundaryMeasure({{0.3 - 0.75, 0.3}, {0.3 - 0.1, 0.2}, {0.3 + 0.55, 0.5}});
  in.g = GKind::truncated_inverse;
  in.xi_radius = 0.7;
  in.cap_radius = 0.9;
  const auto rep = check_monotone_chain(in);
  EXPECT_TRUE(rep.pass) << rep.worst_step;
  EXPECT_GT(rep.integrals.back(), rep.integrals.front());
}

TEST(FoldingJson, RoundTrip) {
  auto in = two_atom_instance();
  in.g = GKind::truncated_inverse;
  const nlohmann::json j = in;
  const auto back = j.get<FoldingInstance>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_THROW(nlohmann::json::parse(R"({"atoms": [[0, 1]], "g": "cubic"})").get<FoldingInstance>(),
               ConstructionError);
}
