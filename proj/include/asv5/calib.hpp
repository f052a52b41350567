#pragma once

// Score calibration and calibration diagnostics.
//
//  * Logit: probability-like scores to LLR-like scores.
//  * Affine calibration trained by minimizing Cllr (logistic regression with
//    balanced class weights).
//  * Oracle PAV calibration: isotonic regression on the evaluation labels.
//    It uses the ground truth it is scored against, so it is a bound, not a
//    deployable calibrator.
//  * Normalized DCF sweep over a grid of spoof priors, with the dummy-system
//    bound min(beta, 1) / (1 + beta).

#include <cstddef>
#include <span>
#include <vector>

namespace asv5::calib {

inline constexpr double kDefaultClampLlr = 35.0;

// log(p / (1 - p)); p == 0 and p == 1 map to -clamp and +clamp. Throws for
// p outside [0, 1].
double Logit(double p, double clamp = kDefaultClampLlr);

struct LogitResult {
  std::vector<double> scores;
  std::size_t clamped = 0;
};

LogitResult LogitAll(std::span<const double> probabilities,
                     double clamp = kDefaultClampLlr);

struct AffineFitOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
};

struct TrainingSummary {
  int iterations = 0;
  double initial_objective = 0.0;  // Cllr in bits at (1, 0)
  double final_objective = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per accepted step
};

struct AffineCalibration {
  double scale = 1.0;
  double offset = 0.0;
  TrainingSummary training;

  double operator()(double score) const { return scale * score + offset; }
};

// Newton's method with backtracking from (scale, offset) = (1, 0) on the
// convex Cllr objective. Throws DegenerateCalibration when all dev scores
// coincide or the optimum is not order preserving (scale <= 0).
AffineCalibration FitAffine(std::span<const double> bona, std::span<const double> spoof,
                            const AffineFitOptions &options = {});

std::vector<double> ApplyAffine(const AffineCalibration &cal,
                                std::span<const double> scores);

// Monotone step function from scores to LLRs. Block k covers the score
// interval [lower[k], upper[k]] and maps it to llr[k]; gaps between blocks
// are bridged linearly and the end values extend to +-infinity.
struct PavMapping {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> posterior;  // bona fide fraction of the block
  std::vector<double> llr;
  double prior_log_odds = 0.0;    // log(n_bona / n_spoof), removed from llr
  double clamp = kDefaultClampLlr;

  double operator()(double score) const;
  std::vector<double> Apply(std::span<const double> scores) const;
  std::size_t size() const { return llr.size(); }
};

PavMapping PavCalibrate(std::span<const double> bona, std::span<const double> spoof,
                        double clamp = kDefaultClampLlr);

// Costs from which beta(pi) = c_miss * (1 - pi) / (c_fa * pi) is derived.
struct CostBasis {
  double c_miss = 1.0;
  double c_fa = 10.0;

  double Beta(double pi_spf) const;
};

// n priors uniformly spaced in log-odds, end points exactly lo and hi.
std::vector<double> PriorGrid(std::size_t n = 199, double lo = 0.001, double hi = 0.999);

struct ApePoint {
  double pi;
  double beta;
  double tau_bayes;
  double norm_act_dcf;  // unclipped
  double norm_min_dcf;
  double dummy_bound;

  double norm_act_dcf_clipped() const {
    return norm_act_dcf < dummy_bound ? norm_act_dcf : dummy_bound;
  }
};

struct ApeCurve {
  std::vector<ApePoint> points;
};

ApeCurve ApeSweep(std::span<const double> bona, std::span<const double> spoof,
                  const CostBasis &basis, std::span<const double> grid);

}  // namespace asv5::calib
