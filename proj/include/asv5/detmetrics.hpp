#pragma once

// Two-class countermeasure metrics: error curves, DCF, minDCF, actDCF, Cllr
// and EER. Bona fide is the positive class; a trial is accepted as bona fide
// iff its score is >= the threshold.

#include <optional>
#include <span>
#include <vector>

namespace asv5::det {

// Detection cost parameters. Either the normalized miss weight beta is given
// directly, or it is derived from costs and the spoof prior:
//   beta = c_miss * (1 - pi_spf) / (c_fa * pi_spf).
class CostConfig {
 public:
  static constexpr double kDefaultBeta = 1.9;

  // beta = 1.9.
  CostConfig();

  static CostConfig FromBeta(double beta);
  static CostConfig FromCosts(double c_miss, double c_fa, double pi_spf);

  double beta() const { return beta_; }
  bool derived() const { return c_miss_.has_value(); }
  std::optional<double> c_miss() const { return c_miss_; }
  std::optional<double> c_fa() const { return c_fa_; }
  std::optional<double> pi_spf() const { return pi_spf_; }

 private:
  double beta_;
  std::optional<double> c_miss_;
  std::optional<double> c_fa_;
  std::optional<double> pi_spf_;
};

// Operating points over all distinct decision thresholds. thresholds[0] is
// -inf (accept everything), the last is +inf (reject everything), the rest
// are midpoints between adjacent distinct pooled scores.
struct ErrorCurve {
  std::vector<double> thresholds;
  std::vector<double> p_miss;
  std::vector<double> p_fa;

  std::size_t size() const { return thresholds.size(); }
};

struct ThresholdedValue {
  double value;
  double threshold;
};

enum class EerMethod {
  kRocch,            // ROC convex hull with linear interpolation
  kNearestCrossing,  // operating point minimizing |p_miss - p_fa|
};

struct CmReport {
  double min_dcf;
  double act_dcf;
  double cllr;
  double eer;
  double tau_min;
  double tau_bayes;
};

ErrorCurve ComputeErrorCurve(std::span<const double> bona,
                             std::span<const double> spoof);

inline double Dcf(double p_miss, double p_fa, const CostConfig &cfg) {
  return cfg.beta() * p_miss + p_fa;
}

// Ties go to the smallest threshold.
ThresholdedValue MinDcf(const ErrorCurve &curve, const CostConfig &cfg);

double BayesThreshold(const CostConfig &cfg);

// DCF at an arbitrary threshold by direct counting.
double DcfAt(std::span<const double> bona, std::span<const double> spoof,
             double threshold, const CostConfig &cfg);

double ActDcf(std::span<const double> bona, std::span<const double> spoof,
              const CostConfig &cfg);

// Scores are read as natural-log likelihood ratios. Result in bits.
double Cllr(std::span<const double> bona, std::span<const double> spoof);

ThresholdedValue Eer(const ErrorCurve &curve, EerMethod method = EerMethod::kRocch);

CmReport EvaluateCm(std::span<const double> bona, std::span<const double> spoof,
                    const CostConfig &cfg, EerMethod method = EerMethod::kRocch);

// log(1 + exp(x)) without overflow.
double Softplus(double x);

}  // namespace asv5::det
