#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "asv5/detmetrics.hpp"
#include "asv5/error.hpp"
#include "asv5/oracle.hpp"
#include "asv5/simgen.hpp"
#include "asv5/tandem.hpp"

namespace td = asv5::tandem;
namespace oracle = asv5::sim::oracle;
using asv5::trialdata::SasvLabel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const td::SasvCostConfig kDefault;

std::vector<oracle::Trial> ToOracle(const std::vector<td::TandemTrial> &t) {
  std::vector<oracle::Trial> out;
  for (const auto &x : t) {
    oracle::Cls c = x.label == SasvLabel::kTarget      ? oracle::Cls::kTarget
                    : x.label == SasvLabel::kNontarget ? oracle::Cls::kNontarget
                                                       : oracle::Cls::kSpoof;
    out.push_back({x.asv, x.cm, c});
  }
  return out;
}

// The hand-built set whose t-DCF was evaluated with exact rationals.
std::vector<td::TandemTrial> EightTrials() {
  return {{3, 2, SasvLabel::kTarget},      {2, -0.5, SasvLabel::kTarget},
          {0.5, 1.5, SasvLabel::kTarget},  {-1, 1, SasvLabel::kNontarget},
          {1, 0.5, SasvLabel::kNontarget}, {2.5, -1, SasvLabel::kSpoof},
          {1.5, 0.8, SasvLabel::kSpoof},   {-0.5, 2, SasvLabel::kSpoof}};
}

}  // namespace

TEST(SasvCostConfig, Defaults) {
  EXPECT_DOUBLE_EQ(kDefault.alpha(), 1.58);
  EXPECT_DOUBLE_EQ(kDefault.gamma(), 0.84);
}

TEST(SasvCostConfig, FromEvaluationPlanCosts) {
  const td::SasvCostConfig::Costs c{1.0, 10.0, 10.0, 0.9405, 0.0095, 0.05};
  const auto cfg = td::SasvCostConfig::FromCosts(c);
  EXPECT_NEAR(cfg.alpha(), 1.58, 1e-3);
  EXPECT_NEAR(cfg.gamma(), 0.84, 1e-3);
  EXPECT_THROW(td::SasvCostConfig::FromCostsChecked(c, 1.58, 0.84, 1e-9), asv5::Error);
  EXPECT_NO_THROW(td::SasvCostConfig::FromCostsChecked(c, 1.58, 0.84, 1e-3));
}

TEST(SasvCostConfig, RejectsBadPriors) {
  EXPECT_THROW(td::SasvCostConfig::FromCosts({1, 10, 10, 0.5, 0.5, 0.5}), asv5::Error);
  EXPECT_THROW(td::SasvCostConfig::FromAlphaGamma(1.0, 1.5), asv5::Error);
  EXPECT_THROW(td::SasvCostConfig::FromAlphaGamma(-1.0, 0.5), asv5::Error);
}

TEST(SasvCurve, PerfectHasZeroPoint) {
  const td::SasvScores s{{1.0}, {-1.0}, {-1.0}};
  const auto c = td::ComputeSasvCurve(s);
  bool found = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    found = found || (c.p_miss[i] == 0 && c.p_fa_non[i] == 0 && c.p_fa_spf[i] == 0);
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(td::MinADcf(c, kDefault).value, 0.0);
}

TEST(SasvCurve, ConstantScores) {
  const td::SasvScores s{{0.0, 0.0}, {0.0}, {0.0}};
  const auto c = td::ComputeSasvCurve(s);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.p_miss[0], 0.0);
  EXPECT_EQ(c.p_fa_non[0], 1.0);
  EXPECT_EQ(c.p_fa_spf[0], 1.0);
  EXPECT_EQ(c.p_miss[1], 1.0);
  EXPECT_EQ(c.p_fa_non[1], 0.0);
  EXPECT_EQ(c.p_fa_spf[1], 0.0);
  EXPECT_DOUBLE_EQ(td::MinADcf(c, kDefault).value, 1.0);
}

// Exact rationals from tests/oracles/golden.py.
TEST(SasvCurve, FiveTrialGolden) {
  const td::SasvScores s{{2.0, 0.0}, {-1.0}, {1.0, -2.0}};
  const auto c = td::ComputeSasvCurve(s);
  const std::vector<double> tau{-kInf, -1.5, -0.5, 0.5, 1.5, kInf};
  const std::vector<double> a_dcf{1.0, 0.58, 0.42, 1.21, 0.79, 1.58};
  ASSERT_EQ(c.size(), tau.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c.thresholds[i], tau[i]);
    EXPECT_NEAR(td::ADcf(c.p_miss[i], c.p_fa_non[i], c.p_fa_spf[i], kDefault), a_dcf[i], 1e-15);
  }
  const auto m = td::MinADcf(c, kDefault);
  EXPECT_NEAR(m.value, 0.42, 1e-15);
  EXPECT_EQ(m.threshold, -0.5);
}

TEST(SasvCurve, OracleEquivalence) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_int_distribution<int> level(-4, 4);
  for (int it = 0; it < 300; ++it) {
    td::SasvScores s;
    for (auto *v : {&s.target, &s.nontarget, &s.spoof}) {
      v->resize(count(rng));
      for (double &x : *v) x = level(rng) * 0.25;
    }
    const auto cfg = td::SasvCostConfig::FromAlphaGamma(0.5 + (it % 5) * 0.4, 0.1 + (it % 7) * 0.12);
    EXPECT_EQ(td::MinADcf(td::ComputeSasvCurve(s), cfg).value,
              oracle::BruteMinADcf(s.target, s.nontarget, s.spoof, cfg.alpha(), cfg.gamma()));
  }
}

TEST(SasvCurve, MinWithinDummyBound) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  td::SasvScores s;
  for (int i = 0; i < 50; ++i) {
    s.target.push_back(n(rng) + 1);
    s.nontarget.push_back(n(rng));
    s.spoof.push_back(n(rng));
  }
  const double v = td::MinADcf(td::ComputeSasvCurve(s), kDefault).value;
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, std::min(kDefault.alpha(), 1.0));
}

TEST(AsvThreshold, EerPointMatchesOracle) {
  const auto t = EightTrials();
  EXPECT_EQ(td::AsvThreshold(t, td::AsvThresholdPolicy::EerPoint()), 0.75);
  EXPECT_EQ(td::AsvThreshold(t, td::AsvThresholdPolicy::Fixed(1.25)), 1.25);
  EXPECT_EQ(oracle::BruteAsvEerThreshold(ToOracle(t)), 0.75);
}

TEST(TDcf, EightTrialGolden) {
  const auto r = td::TDcfConstrained(EightTrials(), td::AsvThresholdPolicy::EerPoint(), kDefault);
  EXPECT_EQ(r.tau_asv, 0.75);
  EXPECT_NEAR(r.default_cost, 7.0 / 6.0, 1e-15);
  EXPECT_NEAR(r.value, 0.76, 1e-15);
  EXPECT_EQ(r.tau_cm, -0.75);
}

TEST(TDcf, PerfectSystemsAndConstantCm) {
  std::vector<td::TandemTrial> perfect{{3, 3, SasvLabel::kTarget},
                                       {-3, 3, SasvLabel::kNontarget},
                                       {3, -3, SasvLabel::kSpoof}};
  EXPECT_EQ(td::TDcfConstrained(perfect, td::AsvThresholdPolicy::EerPoint(), kDefault).value, 0.0);
  std::vector<td::TandemTrial> constant_cm{{3, 0, SasvLabel::kTarget},
                                           {-3, 0, SasvLabel::kNontarget},
                                           {3, 0, SasvLabel::kSpoof}};
  EXPECT_DOUBLE_EQ(
      td::TDcfConstrained(constant_cm, td::AsvThresholdPolicy::EerPoint(), kDefault).value, 1.0);
}

TEST(TDcf, DegenerateWhenAsvAloneIsPerfect) {
  // The ASV rejects every spoof and nontarget and accepts every target, so
  // the accept-all CM dummy costs nothing and there is nothing to normalize.
  std::vector<td::TandemTrial> t{{3, 0, SasvLabel::kTarget},
                                 {-3, 0, SasvLabel::kNontarget},
                                 {-3, 0, SasvLabel::kSpoof}};
  try {
    td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault);
    ADD_FAILURE() << "expected DegenerateTandem";
  } catch (const asv5::Error &e) {
    EXPECT_EQ(e.code(), asv5::ErrorCode::kDegenerateTandem);
  }
}

TEST(TDcf, OracleEquivalence) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_int_distribution<int> level(-3, 3);
  int checked = 0;
  for (int it = 0; it < 400; ++it) {
    std::vector<td::TandemTrial> t;
    for (SasvLabel l : {SasvLabel::kTarget, SasvLabel::kNontarget, SasvLabel::kSpoof}) {
      const int n = count(rng);
      for (int i = 0; i < n; ++i) t.push_back({level(rng) * 0.5, level(rng) * 0.5, l});
    }
    const auto o = ToOracle(t);
    const double tau = oracle::BruteAsvEerThreshold(o);
    double expected;
    try {
      expected = oracle::BruteTDcf(o, tau, kDefault.alpha(), kDefault.gamma());
    } catch (...) {
      continue;
    }
    if (!std::isfinite(expected)) {
      EXPECT_THROW(td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault),
                   asv5::Error);
      continue;
    }
    const auto r = td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault);
    EXPECT_EQ(r.tau_asv, tau);
    EXPECT_NEAR(r.value, expected, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 300);
}

// With a perfect ASV, the tandem cost reduces to a two-class DCF of the CM
// on targets against spoofs with beta = alpha / gamma, normalized by the
// better dummy.
TEST(TDcf, PerfectAsvReduction) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<td::TandemTrial> t;
    std::vector<double> tar_cm, spf_cm;
    for (int i = 0; i < 25; ++i) {
      const double c = n(rng) + 1.0;
      tar_cm.push_back(c);
      t.push_back({5.0, c, SasvLabel::kTarget});
    }
    for (int i = 0; i < 25; ++i) t.push_back({-5.0, n(rng), SasvLabel::kNontarget});
    for (int i = 0; i < 25; ++i) {
      const double c = n(rng) - 1.0;
      spf_cm.push_back(c);
      t.push_back({5.0, c, SasvLabel::kSpoof});
    }
    const double beta = kDefault.alpha() / kDefault.gamma();
    const double reduced =
        asv5::det::MinDcf(asv5::det::ComputeErrorCurve(tar_cm, spf_cm),
                          asv5::det::CostConfig::FromBeta(beta))
            .value /
        std::min(beta, 1.0);
    const auto r = td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault);
    EXPECT_NEAR(r.value, reduced, 1e-12);
  }
}

TEST(TDcf, DegradingTheCmNeverHelps) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  std::vector<td::TandemTrial> t;
  for (int i = 0; i < 20; ++i) t.push_back({5.0, n(rng) + 1.5, SasvLabel::kTarget});
  for (int i = 0; i < 20; ++i) t.push_back({-5.0, n(rng), SasvLabel::kNontarget});
  for (int i = 0; i < 20; ++i) t.push_back({5.0, n(rng) - 1.5, SasvLabel::kSpoof});
  double prev = td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault).value;
  std::uniform_int_distribution<int> pick(0, 19);
  for (int step = 0; step < 40; ++step) {
    auto &tar = t[pick(rng)];
    auto &spf = t[40 + pick(rng)];
    if (tar.cm > spf.cm) std::swap(tar.cm, spf.cm);
    const double v = td::TDcfConstrained(t, td::AsvThresholdPolicy::EerPoint(), kDefault).value;
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
}

TEST(TEer, PerfectAndConstant) {
  std::vector<td::TandemTrial> perfect{{2, 2, SasvLabel::kTarget},
                                       {-2, 2, SasvLabel::kNontarget},
                                       {2, -2, SasvLabel::kSpoof}};
  EXPECT_EQ(td::TEer(perfect).value, 0.0);
  std::vector<td::TandemTrial> constant{{0, 0, SasvLabel::kTarget},
                                        {0, 0, SasvLabel::kNontarget},
                                        {0, 0, SasvLabel::kSpoof}};
  EXPECT_NEAR(td::TEer(constant).value, 0.5, td::kTEerTolerance);
}

TEST(TEer, RatesAgreeOnSimulatedTandem) {
  const auto t = asv5::sim::SampleTandem({2.0, 2.0, 2000, 7});
  const auto r = td::TEer(t);
  EXPECT_LE(std::abs(r.p_miss - r.p_fa_non), td::kTEerTolerance);
  EXPECT_LE(std::abs(r.p_miss - r.p_fa_spf), td::kTEerTolerance);
  // Direct counting at the returned pair.
  const auto raw = oracle::TandemRatesAt(ToOracle(t), r.tau_asv, r.tau_cm);
  EXPECT_EQ(raw.p_miss, r.raw_p_miss);
  EXPECT_EQ(raw.p_fa_non, r.raw_p_fa_non);
  EXPECT_EQ(raw.p_fa_spf, r.raw_p_fa_spf);
  EXPECT_LE(std::abs(raw.p_miss - raw.p_fa_non), 0.005);
  EXPECT_LE(std::abs(raw.p_miss - raw.p_fa_spf), 0.005);
}

// d_asv = d_cm = 2, 100k trials per class, seed 2024. The value is frozen
// from this implementation; the equal-rate check above is the oracle.
TEST(TEer, LargeSimulationGolden) {
  const auto t = asv5::sim::SampleTandem({2.0, 2.0, 100000, 2024});
  const auto r = td::TEer(t);
  EXPECT_NEAR(r.value, 0.20169, 1e-5);
  EXPECT_LE(std::abs(r.raw_p_miss - r.raw_p_fa_non), 0.005);
  EXPECT_LE(std::abs(r.raw_p_miss - r.raw_p_fa_spf), 0.005);
}

TEST(EvaluateSasv, TandemFieldsOnlyWithTriplets) {
  const auto trials = EightTrials();
  td::SasvScores s;
  for (const auto &t : trials) {
    auto &v = t.label == SasvLabel::kTarget      ? s.target
              : t.label == SasvLabel::kNontarget ? s.nontarget
                                                 : s.spoof;
    v.push_back(t.asv + t.cm);
  }
  const auto without = td::EvaluateSasv(s, std::nullopt, kDefault);
  EXPECT_FALSE(without.t_dcf);
  EXPECT_FALSE(without.t_eer);
  const auto with = td::EvaluateSasv(s, std::span<const td::TandemTrial>(trials), kDefault);
  ASSERT_TRUE(with.t_dcf);
  ASSERT_TRUE(with.t_eer);
  EXPECT_NEAR(*with.t_dcf, 0.76, 1e-15);
  EXPECT_EQ(with.min_a_dcf, without.min_a_dcf);
}
