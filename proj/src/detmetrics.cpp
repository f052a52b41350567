#include "asv5/detmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "asv5/error.hpp"

namespace asv5::det {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void RequireNonEmpty(std::span<const double> bona, std::span<const double> spoof) {
  if (bona.empty()) throw Error(ErrorCode::kEmptyClass, "no bona fide scores");
  if (spoof.empty()) throw Error(ErrorCode::kEmptyClass, "no spoof scores");
}

void RequirePositive(double v, const char *what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must be a positive finite number");
  }
}

struct HullPoint {
  double x;  // p_fa
  double y;  // p_miss
  std::size_t index;  // into the curve
};

double Cross(const HullPoint &o, const HullPoint &a, const HullPoint &b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Lower convex hull of the ROC points in (p_fa, p_miss) space, ordered by
// increasing p_fa.
std::vector<HullPoint> RocConvexHull(const ErrorCurve &curve) {
  std::vector<HullPoint> pts;
  pts.reserve(curve.size());
  // Thresholds ascend, so p_fa descends; walk backwards for ascending x.
  for (std::size_t i = curve.size(); i-- > 0;) {
    HullPoint p{curve.p_fa[i], curve.p_miss[i], i};
    if (!pts.empty() && pts.back().x == p.x) {
      if (p.y < pts.back().y) pts.back() = p;
      continue;
    }
    pts.push_back(p);
  }
  std::vector<HullPoint> hull;
  for (const HullPoint &p : pts) {
    while (hull.size() >= 2 && Cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) {
      hull.pop_back();
    }
    hull.push_back(p);
  }
  return hull;
}

}  // namespace

CostConfig::CostConfig() : beta_(kDefaultBeta) {}

CostConfig CostConfig::FromBeta(double beta) {
  RequirePositive(beta, "beta");
  CostConfig cfg;
  cfg.beta_ = beta;
  return cfg;
}

CostConfig CostConfig::FromCosts(double c_miss, double c_fa, double pi_spf) {
  RequirePositive(c_miss, "c_miss");
  RequirePositive(c_fa, "c_fa");
  if (!(pi_spf > 0.0 && pi_spf < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pi_spf must lie in (0, 1)");
  }
  CostConfig cfg;
  cfg.beta_ = c_miss * (1.0 - pi_spf) / (c_fa * pi_spf);
  cfg.c_miss_ = c_miss;
  cfg.c_fa_ = c_fa;
  cfg.pi_spf_ = pi_spf;
  return cfg;
}

ErrorCurve ComputeErrorCurve(std::span<const double> bona,
                             std::span<const double> spoof) {
  RequireNonEmpty(bona, spoof);
  std::vector<double> b(bona.begin(), bona.end());
  std::vector<double> s(spoof.begin(), spoof.end());
  std::sort(b.begin(), b.end());
  std::sort(s.begin(), s.end());

  std::vector<double> pooled;
  pooled.reserve(b.size() + s.size());
  std::merge(b.begin(), b.end(), s.begin(), s.end(), std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  const double nb = static_cast<double>(b.size());
  const double ns = static_cast<double>(s.size());
  const std::size_t m = pooled.size();

  ErrorCurve curve;
  curve.thresholds.reserve(m + 1);
  curve.p_miss.reserve(m + 1);
  curve.p_fa.reserve(m + 1);

  // Operating point j accepts exactly the scores >= pooled[j].
  std::size_t bona_below = 0;
  std::size_t spoof_below = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double v = pooled[j];
    while (bona_below < b.size() && b[bona_below] < v) ++bona_below;
    while (spoof_below < s.size() && s[spoof_below] < v) ++spoof_below;
    double tau = -kInf;
    if (j > 0) {
      tau = std::midpoint(pooled[j - 1], v);
      // Adjacent doubles: the midpoint rounds onto the lower value.
      if (tau <= pooled[j - 1]) tau = v;
    }
    curve.thresholds.push_back(tau);
    curve.p_miss.push_back(static_cast<double>(bona_below) / nb);
    curve.p_fa.push_back(static_cast<double>(s.size() - spoof_below) / ns);
  }
  curve.thresholds.push_back(kInf);
  curve.p_miss.push_back(1.0);
  curve.p_fa.push_back(0.0);
  return curve;
}

ThresholdedValue MinDcf(const ErrorCurve &curve, const CostConfig &cfg) {
  ThresholdedValue best{kInf, kInf};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double c = Dcf(curve.p_miss[i], curve.p_fa[i], cfg);
    if (c < best.value) best = {c, curve.thresholds[i]};
  }
  return best;
}

double BayesThreshold(const CostConfig &cfg) { return -std::log(cfg.beta()); }

double DcfAt(std::span<const double> bona, std::span<const double> spoof,
             double threshold, const CostConfig &cfg) {
  RequireNonEmpty(bona, spoof);
  const auto miss = std::count_if(bona.begin(), bona.end(),
                                  [&](double x) { return x < threshold; });
  const auto fa = std::count_if(spoof.begin(), spoof.end(),
                                [&](double x) { return x >= threshold; });
  return Dcf(static_cast<double>(miss) / static_cast<double>(bona.size()),
             static_cast<double>(fa) / static_cast<double>(spoof.size()), cfg);
}

double ActDcf(std::span<const double> bona, std::span<const double> spoof,
              const CostConfig &cfg) {
  return DcfAt(bona, spoof, BayesThreshold(cfg), cfg);
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double Cllr(std::span<const double> bona, std::span<const double> spoof) {
  RequireNonEmpty(bona, spoof);
  // Terms are converted to bits before summation, so an all-zero input sums
  // exact ones and yields exactly 1 bit.
  constexpr double kLn2 = std::numbers::ln2;
  double sb = 0.0;
  for (double x : bona) sb += Softplus(-x) / kLn2;
  double ss = 0.0;
  for (double x : spoof) ss += Softplus(x) / kLn2;
  return 0.5 * (sb / static_cast<double>(bona.size()) +
                ss / static_cast<double>(spoof.size()));
}

ThresholdedValue Eer(const ErrorCurve &curve, EerMethod method) {
  if (method == EerMethod::kNearestCrossing) {
    ThresholdedValue best{kInf, kInf};
    double best_gap = kInf;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double gap = std::abs(curve.p_miss[i] - curve.p_fa[i]);
      if (gap < best_gap) {
        best_gap = gap;
        best = {0.5 * (curve.p_miss[i] + curve.p_fa[i]), curve.thresholds[i]};
      }
    }
    return best;
  }

  const auto hull = RocConvexHull(curve);
  // Along the hull p_miss - p_fa strictly decreases from 1 to -1.
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const double d = hull[k].y - hull[k].x;
    if (d > 0.0) continue;
    if (d == 0.0 || k == 0) {
      return {hull[k].x, curve.thresholds[hull[k].index]};
    }
    const HullPoint &a = hull[k - 1];
    const HullPoint &b = hull[k];
    const double da = a.y - a.x;
    const double t = da / (da - d);
    const double eer = a.x + t * (b.x - a.x);
    const std::size_t nearest = t <= 0.5 ? a.index : b.index;
    return {eer, curve.thresholds[nearest]};
  }
  // Unreachable for a valid curve: the last hull point is (1, 0).
  return {0.5, 0.0};
}

CmReport EvaluateCm(std::span<const double> bona, std::span<const double> spoof,
                    const CostConfig &cfg, EerMethod method) {
  const ErrorCurve curve = ComputeErrorCurve(bona, spoof);
  const ThresholdedValue min = MinDcf(curve, cfg);
  const ThresholdedValue eer = Eer(curve, method);
  return CmReport{min.value, ActDcf(bona, spoof, cfg), Cllr(bona, spoof),
                  eer.value, min.threshold, BayesThreshold(cfg)};
}

}  // namespace asv5::det
