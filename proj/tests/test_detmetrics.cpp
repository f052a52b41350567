#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "asv5/detmetrics.hpp"
#include "asv5/error.hpp"
#include "asv5/oracle.hpp"

namespace det = asv5::det;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const det::CostConfig kDefault;

}  // namespace

TEST(CostConfig, Defaults) {
  EXPECT_DOUBLE_EQ(kDefault.beta(), 1.9);
  EXPECT_FALSE(kDefault.derived());
}

TEST(CostConfig, FromCostsReproducesDefaultBeta) {
  const auto cfg = det::CostConfig::FromCosts(1.0, 10.0, 0.05);
  EXPECT_NEAR(cfg.beta(), 1.9, 1e-12);
  EXPECT_TRUE(cfg.derived());
}

TEST(CostConfig, RejectsBadValues) {
  EXPECT_THROW(det::CostConfig::FromBeta(0.0), asv5::Error);
  EXPECT_THROW(det::CostConfig::FromBeta(-1.0), asv5::Error);
  EXPECT_THROW(det::CostConfig::FromCosts(1.0, 10.0, 1.0), asv5::Error);
  EXPECT_THROW(det::CostConfig::FromCosts(1.0, 0.0, 0.5), asv5::Error);
}

TEST(ErrorCurve, PerfectSeparationHasZeroPoint) {
  const std::vector<double> bona{1.0};
  const std::vector<double> spoof{-1.0};
  const auto c = det::ComputeErrorCurve(bona, spoof);
  bool found = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    found = found || (c.p_miss[i] == 0.0 && c.p_fa[i] == 0.0);
  }
  EXPECT_TRUE(found);
}

TEST(ErrorCurve, TiedScoresGiveOnlyTheEndPoints) {
  const std::vector<double> bona{0.0};
  const std::vector<double> spoof{0.0};
  const auto c = det::ComputeErrorCurve(bona, spoof);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.p_miss[0], 0.0);
  EXPECT_EQ(c.p_fa[0], 1.0);
  EXPECT_EQ(c.p_miss[1], 1.0);
  EXPECT_EQ(c.p_fa[1], 0.0);
}

// Exact-rational sweep from tests/oracles/golden.py.
TEST(ErrorCurve, FiveTrialGolden) {
  const std::vector<double> bona{2.0, 1.0, -1.0};
  const std::vector<double> spoof{-2.0, 0.0};
  const auto c = det::ComputeErrorCurve(bona, spoof);
  const std::vector<double> tau{-kInf, -1.5, -0.5, 0.5, 1.5, kInf};
  const std::vector<double> pm{0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  const std::vector<double> pf{1.0, 0.5, 0.5, 0.0, 0.0, 0.0};
  ASSERT_EQ(c.size(), tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    EXPECT_EQ(c.thresholds[i], tau[i]) << i;
    EXPECT_DOUBLE_EQ(c.p_miss[i], pm[i]) << i;
    EXPECT_DOUBLE_EQ(c.p_fa[i], pf[i]) << i;
  }
  const auto m = det::MinDcf(c, kDefault);
  EXPECT_DOUBLE_EQ(m.value, 0.5);
  EXPECT_EQ(m.threshold, -1.5);
}

TEST(ErrorCurve, MidpointOfAdjacentDoublesStaysAboveLowerValue) {
  const double a = 1.0;
  const double b = std::nextafter(1.0, 2.0);
  const std::vector<double> bona{b};
  const std::vector<double> spoof{a};
  const auto c = det::ComputeErrorCurve(bona, spoof);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_GT(c.thresholds[1], a);
  EXPECT_EQ(c.p_miss[1], 0.0);
  EXPECT_EQ(c.p_fa[1], 0.0);
}

TEST(ErrorCurve, RejectsEmptyClasses) {
  const std::vector<double> some{1.0};
  const std::vector<double> none;
  EXPECT_THROW(det::ComputeErrorCurve(none, some), asv5::Error);
  EXPECT_THROW(det::ComputeErrorCurve(some, none), asv5::Error);
}

TEST(Dcf, DummySystems) {
  EXPECT_EQ(det::Dcf(0, 0, kDefault), 0.0);
  EXPECT_DOUBLE_EQ(det::Dcf(1, 0, kDefault), 1.9);
  EXPECT_DOUBLE_EQ(det::Dcf(0, 1, kDefault), 1.0);
}

TEST(MinDcf, PerfectAndConstant) {
  const std::vector<double> b1{3.0, 2.0};
  const std::vector<double> s1{-1.0};
  EXPECT_EQ(det::MinDcf(det::ComputeErrorCurve(b1, s1), kDefault).value, 0.0);
  const std::vector<double> z{0.0};
  EXPECT_DOUBLE_EQ(det::MinDcf(det::ComputeErrorCurve(z, z), kDefault).value, 1.0);
}

TEST(MinDcf, TiesGoToSmallestThreshold) {
  // beta = 1: every threshold between the classes and the accept-all end
  // cost the same on this set.
  const std::vector<double> bona{1.0};
  const std::vector<double> spoof{0.0};
  const auto cfg = det::CostConfig::FromBeta(1.0);
  const auto c = det::ComputeErrorCurve(bona, spoof);
  // Curve: (-inf: 0,1) (0.5: 0,0) (inf: 1,0). Unique minimum at 0.5.
  EXPECT_EQ(det::MinDcf(c, cfg).threshold, 0.5);
  const std::vector<double> tied{0.0};
  const auto c2 = det::ComputeErrorCurve(tied, tied);
  // Both ends cost 1.
  EXPECT_EQ(det::MinDcf(c2, cfg).threshold, -kInf);
}

TEST(BayesThreshold, Values) {
  EXPECT_EQ(det::BayesThreshold(det::CostConfig::FromBeta(1.0)), 0.0);
  // mpmath, 50 digits: -log(1.9).
  EXPECT_NEAR(det::BayesThreshold(kDefault), -0.641853886172394775991036, 1e-15);
  EXPECT_NEAR(det::BayesThreshold(det::CostConfig::FromBeta(std::numbers::e)), -1.0, 1e-15);
}

TEST(ActDcf, Examples) {
  const std::vector<double> z{0.0};
  EXPECT_DOUBLE_EQ(det::ActDcf(z, z, kDefault), 1.0);
  const std::vector<double> b{10.0, 10.0};
  const std::vector<double> s{-10.0};
  EXPECT_EQ(det::ActDcf(b, s, kDefault), 0.0);
  const std::vector<double> b2{-10.0};
  const std::vector<double> s2{10.0};
  EXPECT_DOUBLE_EQ(det::ActDcf(b2, s2, kDefault), 2.9);
}

TEST(Cllr, AllZeroIsExactlyOneBit) {
  const std::vector<double> z(17, 0.0);
  const std::vector<double> z2(5, 0.0);
  EXPECT_EQ(det::Cllr(z, z2), 1.0);
}

TEST(Cllr, SaturatesTowardsZero) {
  const std::vector<double> b{50.0};
  const std::vector<double> s{-50.0};
  EXPECT_LT(det::Cllr(b, s), 1e-20);
}

TEST(Cllr, Golden) {
  const std::vector<double> b{1.0, -0.5};
  const std::vector<double> s{-1.0};
  // mpmath term-by-term at 50 digits.
  EXPECT_NEAR(det::Cllr(b, s), 0.690279820942465419585052, 1e-15);
}

TEST(Cllr, HugeScoresDoNotOverflow) {
  const std::vector<double> b{-800.0};
  const std::vector<double> s{800.0};
  const double c = det::Cllr(b, s);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_NEAR(c, 800.0 / std::numbers::ln2, 1e-9);
}

TEST(Eer, Examples) {
  const std::vector<double> b{1.0};
  const std::vector<double> s{-1.0};
  EXPECT_EQ(det::Eer(det::ComputeErrorCurve(b, s)).value, 0.0);
  const std::vector<double> z{0.0};
  EXPECT_DOUBLE_EQ(det::Eer(det::ComputeErrorCurve(z, z)).value, 0.5);
  EXPECT_DOUBLE_EQ(det::Eer(det::ComputeErrorCurve(z, z), det::EerMethod::kNearestCrossing).value,
                   0.5);
}

TEST(Eer, RocchOnFiveTrialSet) {
  // Hull of (pfa, pmiss): (0,1) (0,1/3) (1/2,0) (1,0); crossing on the
  // segment (0,1/3)-(1/2,0) where pm = 1/3 - 2/3 pf = pf, so pf = 1/5.
  const std::vector<double> bona{2.0, 1.0, -1.0};
  const std::vector<double> spoof{-2.0, 0.0};
  EXPECT_NEAR(det::Eer(det::ComputeErrorCurve(bona, spoof)).value, 0.2, 1e-15);
}

TEST(EvaluateCm, FieldsAgreeWithParts) {
  const std::vector<double> bona{2.0, 1.0, -1.0};
  const std::vector<double> spoof{-2.0, 0.0};
  const auto r = det::EvaluateCm(bona, spoof, kDefault);
  EXPECT_DOUBLE_EQ(r.min_dcf, 0.5);
  EXPECT_EQ(r.tau_min, -1.5);
  EXPECT_EQ(r.tau_bayes, det::BayesThreshold(kDefault));
  EXPECT_EQ(r.act_dcf, det::ActDcf(bona, spoof, kDefault));
  EXPECT_EQ(r.cllr, det::Cllr(bona, spoof));
  EXPECT_GE(r.act_dcf, r.min_dcf);
}

TEST(Properties, OracleEquivalenceAndDominance) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_int_distribution<int> level(-3, 3);
  for (int it = 0; it < 300; ++it) {
    std::vector<double> b(count(rng));
    std::vector<double> s(count(rng));
    for (double &x : b) x = level(rng) * 0.5;
    for (double &x : s) x = level(rng) * 0.5;
    const auto cfg = det::CostConfig::FromBeta(0.25 + (it % 8) * 0.5);
    const double mine = det::MinDcf(det::ComputeErrorCurve(b, s), cfg).value;
    EXPECT_EQ(mine, asv5::sim::oracle::BruteMinDcf(b, s, cfg.beta()));
    EXPECT_GE(det::ActDcf(b, s, cfg), mine);
  }
}

TEST(Properties, MonotoneTransformInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> b(40), s(30);
  for (double &x : b) x = n(rng) + 1.0;
  for (double &x : s) x = n(rng) - 1.0;
  const auto c0 = det::ComputeErrorCurve(b, s);
  auto t = [](double x) { return std::exp(x) * 3.0 - 7.0; };
  std::vector<double> tb, ts;
  for (double x : b) tb.push_back(t(x));
  for (double x : s) ts.push_back(t(x));
  const auto c1 = det::ComputeErrorCurve(tb, ts);
  EXPECT_EQ(det::MinDcf(c0, kDefault).value, det::MinDcf(c1, kDefault).value);
  EXPECT_EQ(det::Eer(c0).value, det::Eer(c1).value);
  EXPECT_EQ(c0.p_miss, c1.p_miss);
  EXPECT_EQ(c0.p_fa, c1.p_fa);
}
