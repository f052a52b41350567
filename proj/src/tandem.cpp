#include "asv5/tandem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "asv5/error.hpp"

namespace asv5::tandem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t ClassIndex(SasvLabel l) {
  switch (l) {
    case SasvLabel::kTarget: return 0;
    case SasvLabel::kNontarget: return 1;
    case SasvLabel::kSpoof: return 2;
  }
  return 0;
}

// Distinct sorted values of one score dimension, and each trial's rank in
// it. Grid index k in [0, m] accepts exactly the trials with rank >= k.
struct RankGrid {
  std::vector<double> values;
  std::vector<std::size_t> rank;

  std::size_t m() const { return values.size(); }

  double Threshold(std::size_t k) const {
    if (k == 0) return -kInf;
    if (k >= values.size()) return kInf;
    const double t = std::midpoint(values[k - 1], values[k]);
    return t <= values[k - 1] ? values[k] : t;
  }

  // Threshold at a fractional grid position, with the infinite end points
  // replaced by finite values that make the same decisions.
  double InterpolatedThreshold(double u) const {
    auto finite = [&](std::size_t k) {
      if (k == 0) return values.front() - std::max(1.0, std::abs(values.front()));
      if (k >= values.size()) return values.back() + std::max(1.0, std::abs(values.back()));
      return Threshold(k);
    };
    const double fl = std::floor(u);
    const auto k = static_cast<std::size_t>(fl);
    const double w = u - fl;
    if (w == 0.0 || k >= values.size()) return finite(k);
    return finite(k) + w * (finite(k + 1) - finite(k));
  }
};

template <class Get>
RankGrid MakeGrid(std::span<const TandemTrial> trials, Get get) {
  RankGrid g;
  g.values.reserve(trials.size());
  for (const auto &t : trials) g.values.push_back(get(t));
  std::sort(g.values.begin(), g.values.end());
  g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
  g.rank.reserve(trials.size());
  for (const auto &t : trials) {
    g.rank.push_back(static_cast<std::size_t>(
        std::lower_bound(g.values.begin(), g.values.end(), get(t)) - g.values.begin()));
  }
  return g;
}

using ClassTotals = std::array<std::size_t, 3>;

ClassTotals CountClasses(std::span<const TandemTrial> trials) {
  ClassTotals n{0, 0, 0};
  for (const auto &t : trials) ++n[ClassIndex(t.label)];
  return n;
}

void RequireAllClasses(const ClassTotals &n) {
  static constexpr std::array<const char *, 3> kNames{"target", "nontarget", "spoof"};
  for (std::size_t c = 0; c < 3; ++c) {
    if (n[c] == 0) {
      throw Error(ErrorCode::kEmptyClass, std::string("no ") + kNames[c] + " trials");
    }
  }
}

void RequireFinite(std::span<const TandemTrial> trials) {
  for (const auto &t : trials) {
    if (!std::isfinite(t.asv) || !std::isfinite(t.cm)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite tandem score");
    }
  }
}

// Tandem rates over the CM grid for trials passing a fixed ASV decision.
struct RateTable {
  std::vector<double> p_miss;
  std::vector<double> p_fa_non;
  std::vector<double> p_fa_spf;
};

template <class PassesAsv>
RateTable TandemRates(std::span<const TandemTrial> trials, const RankGrid &cm,
                      const ClassTotals &totals, PassesAsv passes_asv) {
  const std::size_t mc = cm.m();
  std::array<std::vector<std::size_t>, 3> accepted;
  for (auto &a : accepted) a.assign(mc + 1, 0);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (passes_asv(i)) ++accepted[ClassIndex(trials[i].label)][cm.rank[i]];
  }
  // Suffix sums: accepted[c][j] = trials of class c accepted at CM index j.
  for (auto &a : accepted) {
    for (std::size_t j = mc; j-- > 0;) a[j] += a[j + 1];
  }
  RateTable r;
  r.p_miss.resize(mc + 1);
  r.p_fa_non.resize(mc + 1);
  r.p_fa_spf.resize(mc + 1);
  const auto nt = static_cast<double>(totals[0]);
  const auto nn = static_cast<double>(totals[1]);
  const auto ns = static_cast<double>(totals[2]);
  for (std::size_t j = 0; j <= mc; ++j) {
    r.p_miss[j] = static_cast<double>(totals[0] - accepted[0][j]) / nt;
    r.p_fa_non[j] = static_cast<double>(accepted[1][j]) / nn;
    r.p_fa_spf[j] = static_cast<double>(accepted[2][j]) / ns;
  }
  return r;
}

double FractionBelow(std::span<const double> sorted, double v) {
  return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) -
                             sorted.begin());
}

}  // namespace

SasvCostConfig::SasvCostConfig() : alpha_(kDefaultAlpha), gamma_(kDefaultGamma) {}

SasvCostConfig SasvCostConfig::FromAlphaGamma(double alpha, double gamma) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1)");
  }
  SasvCostConfig cfg;
  cfg.alpha_ = alpha;
  cfg.gamma_ = gamma;
  return cfg;
}

SasvCostConfig SasvCostConfig::FromCosts(const Costs &c) {
  for (double v : {c.c_miss, c.c_fa_non, c.c_fa_spf}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "costs must be positive");
    }
  }
  for (double p : {c.pi_tar, c.pi_non, c.pi_spf}) {
    if (!(p > 0.0 && p < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "priors must lie in (0, 1)");
    }
  }
  if (std::abs(c.pi_tar + c.pi_non + c.pi_spf - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "priors must sum to 1");
  }
  const double norm = c.c_fa_non * c.pi_non + c.c_fa_spf * c.pi_spf;
  SasvCostConfig cfg = FromAlphaGamma(c.c_miss * c.pi_tar / norm,
                                      c.c_fa_spf * c.pi_spf / norm);
  cfg.costs_ = c;
  return cfg;
}

SasvCostConfig SasvCostConfig::FromCostsChecked(const Costs &costs, double alpha,
                                                double gamma, double tolerance) {
  SasvCostConfig cfg = FromCosts(costs);
  if (std::abs(cfg.alpha() - alpha) > tolerance ||
      std::abs(cfg.gamma() - gamma) > tolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "costs/priors give alpha=" + std::to_string(cfg.alpha()) +
                    ", gamma=" + std::to_string(cfg.gamma()) +
                    ", which disagree with the stated alpha/gamma");
  }
  return cfg;
}

SasvCurve ComputeSasvCurve(const SasvScores &scores) {
  if (scores.target.empty() || scores.nontarget.empty() || scores.spoof.empty()) {
    throw Error(ErrorCode::kEmptyClass,
                "a-DCF needs target, nontarget and spoof trials");
  }
  auto sorted = [](const std::vector<double> &v) {
    std::vector<double> s(v);
    std::sort(s.begin(), s.end());
    return s;
  };
  const auto tar = sorted(scores.target);
  const auto non = sorted(scores.nontarget);
  const auto spf = sorted(scores.spoof);

  std::vector<double> pooled;
  pooled.reserve(tar.size() + non.size() + spf.size());
  pooled.insert(pooled.end(), tar.begin(), tar.end());
  pooled.insert(pooled.end(), non.begin(), non.end());
  pooled.insert(pooled.end(), spf.begin(), spf.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  const auto nt = static_cast<double>(tar.size());
  const auto nn = static_cast<double>(non.size());
  const auto ns = static_cast<double>(spf.size());

  SasvCurve c;
  const std::size_t m = pooled.size();
  c.thresholds.reserve(m + 1);
  c.p_miss.reserve(m + 1);
  c.p_fa_non.reserve(m + 1);
  c.p_fa_spf.reserve(m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    const double v = pooled[j];
    double tau = -kInf;
    if (j > 0) {
      tau = std::midpoint(pooled[j - 1], v);
      if (tau <= pooled[j - 1]) tau = v;
    }
    c.thresholds.push_back(tau);
    c.p_miss.push_back(FractionBelow(tar, v) / nt);
    c.p_fa_non.push_back((nn - FractionBelow(non, v)) / nn);
    c.p_fa_spf.push_back((ns - FractionBelow(spf, v)) / ns);
  }
  c.thresholds.push_back(kInf);
  c.p_miss.push_back(1.0);
  c.p_fa_non.push_back(0.0);
  c.p_fa_spf.push_back(0.0);
  return c;
}

det::ThresholdedValue MinADcf(const SasvCurve &curve, const SasvCostConfig &cfg) {
  det::ThresholdedValue best{kInf, kInf};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double c = ADcf(curve.p_miss[i], curve.p_fa_non[i], curve.p_fa_spf[i], cfg);
    if (c < best.value) best = {c, curve.thresholds[i]};
  }
  return best;
}

double AsvThreshold(std::span<const TandemTrial> trials,
                    const AsvThresholdPolicy &policy) {
  if (policy.kind == AsvThresholdPolicy::Kind::kFixed) return policy.threshold;
  std::vector<double> tar;
  std::vector<double> non;
  for (const auto &t : trials) {
    if (t.label == SasvLabel::kTarget) tar.push_back(t.asv);
    if (t.label == SasvLabel::kNontarget) non.push_back(t.asv);
  }
  const det::ErrorCurve curve = det::ComputeErrorCurve(tar, non);
  return det::Eer(curve, det::EerMethod::kNearestCrossing).threshold;
}

TDcfResult TDcfConstrained(std::span<const TandemTrial> trials,
                           const AsvThresholdPolicy &policy,
                           const SasvCostConfig &cfg) {
  RequireFinite(trials);
  const ClassTotals totals = CountClasses(trials);
  RequireAllClasses(totals);

  const double tau_asv = AsvThreshold(trials, policy);
  const RankGrid cm = MakeGrid(trials, [](const TandemTrial &t) { return t.cm; });
  const RateTable r = TandemRates(trials, cm, totals, [&](std::size_t i) {
    return trials[i].asv >= tau_asv;
  });

  const std::size_t mc = cm.m();
  auto cost = [&](std::size_t j) {
    return ADcf(r.p_miss[j], r.p_fa_non[j], r.p_fa_spf[j], cfg);
  };
  const double default_cost = std::min(cost(0), cost(mc));
  if (!(default_cost > 0.0)) {
    throw Error(ErrorCode::kDegenerateTandem,
                "both CM dummy systems have zero tandem cost; t-DCF undefined");
  }
  std::size_t best = 0;
  double best_cost = cost(0);
  for (std::size_t j = 1; j <= mc; ++j) {
    const double c = cost(j);
    if (c < best_cost) {
      best_cost = c;
      best = j;
    }
  }
  return {best_cost / default_cost, cm.Threshold(best), tau_asv, default_cost};
}

TEerResult TEer(std::span<const TandemTrial> trials, double tolerance) {
  RequireFinite(trials);
  const ClassTotals totals = CountClasses(trials);
  RequireAllClasses(totals);

  const RankGrid asv = MakeGrid(trials, [](const TandemTrial &t) { return t.asv; });
  const RankGrid cm = MakeGrid(trials, [](const TandemTrial &t) { return t.cm; });
  const std::size_t ma = asv.m();
  const std::size_t mc = cm.m();

  auto table_at = [&](std::size_t ia) {
    return TandemRates(trials, cm, totals,
                       [&](std::size_t i) { return asv.rank[i] >= ia; });
  };

  struct Point {
    double ua;
    double uc;
    double p_miss;
    double p_fa_non;
    double p_fa_spf;
    bool inner_exact;
    double gap() const { return p_fa_non - p_miss; }
  };

  // Inner solve at a fractional ASV position: find the CM position where
  // P_miss == P_fa,spf on the bilinear surface.
  auto solve = [&](double ua) {
    const double fl = std::floor(ua);
    const auto i0 = std::min(static_cast<std::size_t>(fl), ma);
    const double w = i0 == ma ? 0.0 : ua - fl;
    RateTable r = table_at(i0);
    if (w > 0.0) {
      const RateTable r1 = table_at(i0 + 1);
      for (std::size_t j = 0; j <= mc; ++j) {
        r.p_miss[j] = (1.0 - w) * r.p_miss[j] + w * r1.p_miss[j];
        r.p_fa_non[j] = (1.0 - w) * r.p_fa_non[j] + w * r1.p_fa_non[j];
        r.p_fa_spf[j] = (1.0 - w) * r.p_fa_spf[j] + w * r1.p_fa_spf[j];
      }
    }
    // d(j) = P_miss - P_fa,spf is non-decreasing in j and d(mc) = 1.
    std::size_t j = 0;
    while (r.p_miss[j] - r.p_fa_spf[j] < 0.0) ++j;
    const double dj = r.p_miss[j] - r.p_fa_spf[j];
    if (j == 0 || dj == 0.0) {
      return Point{ua, static_cast<double>(j), r.p_miss[j], r.p_fa_non[j],
                   r.p_fa_spf[j], dj == 0.0};
    }
    const double dprev = r.p_miss[j - 1] - r.p_fa_spf[j - 1];
    const double t = -dprev / (dj - dprev);
    auto lerp = [&](const std::vector<double> &v) {
      return v[j - 1] + t * (v[j] - v[j - 1]);
    };
    return Point{ua, static_cast<double>(j - 1) + t, lerp(r.p_miss),
                 lerp(r.p_fa_non), lerp(r.p_fa_spf), true};
  };

  auto converged = [&](const Point &p) {
    return std::abs(p.p_miss - p.p_fa_spf) <= tolerance &&
           std::abs(p.gap()) <= tolerance;
  };

  Point lo = solve(0.0);
  Point hi = solve(static_cast<double>(ma));
  Point best = lo;
  if (!converged(lo)) {
    if (lo.gap() < 0.0) {
      throw Error(ErrorCode::kDegenerateTandem,
                  "nontarget false alarms below the miss rate even with the "
                  "ASV accepting everything; no concurrent crossing");
    }
    best = std::abs(hi.gap()) < std::abs(lo.gap()) ? hi : lo;
    for (int iter = 0; iter < 200; ++iter) {
      const Point mid = solve(0.5 * (lo.ua + hi.ua));
      const bool closer = std::abs(mid.gap()) < std::abs(best.gap());
      if (converged(mid) ? (!converged(best) || closer)
                         : (!converged(best) && closer)) {
        best = mid;
      }
      if (converged(mid) && std::abs(mid.gap()) <= 0.5 * tolerance) break;
      if (mid.gap() > 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi.ua - lo.ua <= 1e-13 * std::max(1.0, hi.ua)) break;
    }
  }
  if (!converged(best)) {
    throw Error(ErrorCode::kDegenerateTandem,
                "no threshold pair equalizes the three tandem error rates "
                "within " + std::to_string(tolerance));
  }

  TEerResult out{};
  out.p_miss = best.p_miss;
  out.p_fa_non = best.p_fa_non;
  out.p_fa_spf = best.p_fa_spf;
  out.value = (best.p_miss + best.p_fa_non + best.p_fa_spf) / 3.0;
  out.tau_asv = asv.InterpolatedThreshold(best.ua);
  out.tau_cm = cm.InterpolatedThreshold(best.uc);

  std::array<std::size_t, 3> accepted{0, 0, 0};
  for (const auto &t : trials) {
    if (t.asv >= out.tau_asv && t.cm >= out.tau_cm) ++accepted[ClassIndex(t.label)];
  }
  out.raw_p_miss = static_cast<double>(totals[0] - accepted[0]) /
                   static_cast<double>(totals[0]);
  out.raw_p_fa_non = static_cast<double>(accepted[1]) / static_cast<double>(totals[1]);
  out.raw_p_fa_spf = static_cast<double>(accepted[2]) / static_cast<double>(totals[2]);
  return out;
}

SasvReport EvaluateSasv(const SasvScores &scores,
                        std::optional<std::span<const TandemTrial>> tandem,
                        const SasvCostConfig &cfg, const AsvThresholdPolicy &policy) {
  const SasvCurve curve = ComputeSasvCurve(scores);
  const det::ThresholdedValue min = MinADcf(curve, cfg);
  SasvReport report{min.value, min.threshold, std::nullopt, std::nullopt,
                    std::nullopt, std::nullopt};
  if (tandem) {
    report.t_dcf = TDcfConstrained(*tandem, policy, cfg).value;
    const TEerResult teer = TEer(*tandem);
    report.t_eer = teer.value;
    report.tau_asv = teer.tau_asv;
    report.tau_cm = teer.tau_cm;
  }
  return report;
}

}  // namespace asv5::tandem
