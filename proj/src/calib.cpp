#include "asv5/calib.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "asv5/detmetrics.hpp"
#include "asv5/error.hpp"

namespace asv5::calib {

namespace {

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Cllr of (scale * s + offset), with gradient and Hessian in (scale, offset).
struct Objective {
  double value = 0.0;
  double g_scale = 0.0;
  double g_offset = 0.0;
  double h_ss = 0.0;
  double h_so = 0.0;
  double h_oo = 0.0;
};

Objective Evaluate(std::span<const double> bona, std::span<const double> spoof,
                   double scale, double offset, bool derivatives) {
  constexpr double kLn2 = std::numbers::ln2;
  Objective f;
  auto accumulate = [&](std::span<const double> xs, bool is_bona) {
    const double w = 0.5 / (kLn2 * static_cast<double>(xs.size()));
    for (double s : xs) {
      const double z = scale * s + offset;
      f.value += w * det::Softplus(is_bona ? -z : z);
      if (!derivatives) continue;
      const double dz = is_bona ? -Sigmoid(-z) : Sigmoid(z);
      const double hz = Sigmoid(z) * Sigmoid(-z);
      f.g_scale += w * dz * s;
      f.g_offset += w * dz;
      f.h_ss += w * hz * s * s;
      f.h_so += w * hz * s;
      f.h_oo += w * hz;
    }
  };
  accumulate(bona, true);
  accumulate(spoof, false);
  return f;
}

}  // namespace

double Logit(double p, double clamp) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "logit input " + std::to_string(p) + " outside [0, 1]");
  }
  if (p == 0.0) return -clamp;
  if (p == 1.0) return clamp;
  return std::log(p / (1.0 - p));
}

LogitResult LogitAll(std::span<const double> probabilities, double clamp) {
  LogitResult r;
  r.scores.reserve(probabilities.size());
  for (double p : probabilities) {
    if (p == 0.0 || p == 1.0) ++r.clamped;
    r.scores.push_back(Logit(p, clamp));
  }
  return r;
}

AffineCalibration FitAffine(std::span<const double> bona, std::span<const double> spoof,
                            const AffineFitOptions &options) {
  if (bona.empty() || spoof.empty()) {
    throw Error(ErrorCode::kEmptyClass, "calibration needs both classes");
  }
  for (auto xs : {bona, spoof}) {
    for (double s : xs) {
      if (!std::isfinite(s)) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite dev score");
      }
    }
  }
  const double first = bona.front();
  const auto same = [&](double s) { return s == first; };
  if (std::all_of(bona.begin(), bona.end(), same) &&
      std::all_of(spoof.begin(), spoof.end(), same)) {
    throw Error(ErrorCode::kDegenerateCalibration,
                "all dev scores are identical; scale is not identifiable");
  }

  AffineCalibration cal;
  Objective f = Evaluate(bona, spoof, cal.scale, cal.offset, true);
  TrainingSummary &t = cal.training;
  t.initial_objective = f.value;
  t.objective_trace.push_back(f.value);

  auto grad_norm = [](const Objective &o) { return std::hypot(o.g_scale, o.g_offset); };

  while (t.iterations < options.max_iterations) {
    if (grad_norm(f) < options.gradient_tolerance) {
      t.converged = true;
      break;
    }
    ++t.iterations;
    // Newton direction, Levenberg-damped when the Hessian is near singular.
    double hss = f.h_ss;
    double hoo = f.h_oo;
    double det = hss * hoo - f.h_so * f.h_so;
    double damping = 0.0;
    while (!(det > 1e-14 * std::max(1.0, hss * hoo)) && damping < 1e6) {
      damping = damping == 0.0 ? 1e-10 : damping * 10.0;
      hss = f.h_ss + damping;
      hoo = f.h_oo + damping;
      det = hss * hoo - f.h_so * f.h_so;
    }
    const double ds = -(hoo * f.g_scale - f.h_so * f.g_offset) / det;
    const double d_o = -(hss * f.g_offset - f.h_so * f.g_scale) / det;
    const double slope = f.g_scale * ds + f.g_offset * d_o;

    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      const double v = Evaluate(bona, spoof, cal.scale + step * ds,
                                cal.offset + step * d_o, false).value;
      if (v <= f.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no further decrease representable
    cal.scale += step * ds;
    cal.offset += step * d_o;
    f = Evaluate(bona, spoof, cal.scale, cal.offset, true);
    t.objective_trace.push_back(f.value);
  }
  if (!t.converged && grad_norm(f) < options.gradient_tolerance) t.converged = true;
  t.final_objective = f.value;
  t.gradient_norm = grad_norm(f);

  if (!(cal.scale > 0.0)) {
    throw Error(ErrorCode::kDegenerateCalibration,
                "fitted scale " + std::to_string(cal.scale) +
                    " is not order preserving; dev scores rank spoofs above bona fide");
  }
  return cal;
}

std::vector<double> ApplyAffine(const AffineCalibration &cal,
                                std::span<const double> scores) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(cal(s));
  return out;
}

double PavMapping::operator()(double score) const {
  if (llr.empty()) return 0.0;
  if (score <= upper.front()) return llr.front();
  if (score >= lower.back()) return llr.back();
  // First block whose upper end is >= score.
  const auto k = static_cast<std::size_t>(
      std::lower_bound(upper.begin(), upper.end(), score) - upper.begin());
  if (score >= lower[k]) return llr[k];
  const double t = (score - upper[k - 1]) / (lower[k] - upper[k - 1]);
  return llr[k - 1] + t * (llr[k] - llr[k - 1]);
}

std::vector<double> PavMapping::Apply(std::span<const double> scores) const {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back((*this)(s));
  return out;
}

PavMapping PavCalibrate(std::span<const double> bona, std::span<const double> spoof,
                        double clamp) {
  if (bona.empty() || spoof.empty()) {
    throw Error(ErrorCode::kEmptyClass, "PAV calibration needs both classes");
  }
  struct Item {
    double score;
    int label;
  };
  std::vector<Item> items;
  items.reserve(bona.size() + spoof.size());
  for (double s : bona) items.push_back({s, 1});
  for (double s : spoof) items.push_back({s, 0});
  std::sort(items.begin(), items.end(),
            [](const Item &a, const Item &b) { return a.score < b.score; });

  struct Block {
    double lower;
    double upper;
    long long positives;
    long long count;
  };
  std::vector<Block> stack;
  for (std::size_t i = 0; i < items.size();) {
    // Tied scores start in one block.
    Block b{items[i].score, items[i].score, 0, 0};
    while (i < items.size() && items[i].score == b.lower) {
      b.positives += items[i].label;
      ++b.count;
      ++i;
    }
    stack.push_back(b);
    // Pool while the previous block's mean is not below the last one's.
    while (stack.size() >= 2) {
      Block &prev = stack[stack.size() - 2];
      const Block &last = stack.back();
      if (prev.positives * last.count < last.positives * prev.count) break;
      prev.upper = last.upper;
      prev.positives += last.positives;
      prev.count += last.count;
      stack.pop_back();
    }
  }

  const auto nb = static_cast<double>(bona.size());
  const auto ns = static_cast<double>(spoof.size());
  PavMapping map;
  map.clamp = clamp;
  map.prior_log_odds = std::log(nb / ns);
  for (const Block &b : stack) {
    map.lower.push_back(b.lower);
    map.upper.push_back(b.upper);
    map.posterior.push_back(static_cast<double>(b.positives) /
                            static_cast<double>(b.count));
    double llr = 0.0;
    if (b.positives == 0) {
      llr = -clamp;
    } else if (b.positives == b.count) {
      llr = clamp;
    } else {
      // log of (block bona fide rate / block spoof rate).
      llr = std::log(static_cast<double>(b.positives) * ns /
                     (static_cast<double>(b.count - b.positives) * nb));
      llr = std::clamp(llr, -clamp, clamp);
    }
    map.llr.push_back(llr);
  }
  return map;
}

double CostBasis::Beta(double pi_spf) const {
  return c_miss * (1.0 - pi_spf) / (c_fa * pi_spf);
}

std::vector<double> PriorGrid(std::size_t n, double lo, double hi) {
  if (n < 2 || !(lo > 0.0 && lo < hi && hi < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "prior grid needs n >= 2 and 0 < lo < hi < 1");
  }
  const double a = std::log(lo / (1.0 - lo));
  const double b = std::log(hi / (1.0 - hi));
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    grid[k] = Sigmoid(x);
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

ApeCurve ApeSweep(std::span<const double> bona, std::span<const double> spoof,
                  const CostBasis &basis, std::span<const double> grid) {
  const det::ErrorCurve curve = det::ComputeErrorCurve(bona, spoof);
  std::vector<double> b(bona.begin(), bona.end());
  std::vector<double> s(spoof.begin(), spoof.end());
  std::sort(b.begin(), b.end());
  std::sort(s.begin(), s.end());

  ApeCurve out;
  out.points.reserve(grid.size());
  for (double pi : grid) {
    if (!(pi > 0.0 && pi < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "grid prior outside (0, 1)");
    }
    const auto cfg = det::CostConfig::FromBeta(basis.Beta(pi));
    const double beta = cfg.beta();
    const double tau = det::BayesThreshold(cfg);
    const auto miss = std::lower_bound(b.begin(), b.end(), tau) - b.begin();
    const auto fa = s.end() - std::lower_bound(s.begin(), s.end(), tau);
    const double act = det::Dcf(static_cast<double>(miss) / static_cast<double>(b.size()),
                                static_cast<double>(fa) / static_cast<double>(s.size()), cfg);
    const double min = det::MinDcf(curve, cfg).value;
    out.points.push_back({pi, beta, tau, act / (1.0 + beta), min / (1.0 + beta),
                          std::min(beta, 1.0) / (1.0 + beta)});
  }
  return out;
}

}  // namespace asv5::calib
