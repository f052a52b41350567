#pragma once

// Three-class metrics for spoofing-robust speaker verification: the
// normalized architecture-agnostic DCF (a-DCF), the ASV-constrained tandem
// DCF (t-DCF) and the concurrent tandem EER (t-EER).
//
// Only target trials should be accepted. With threshold tau a trial is
// accepted iff score >= tau; a tandem (ASV, CM) pair accepts iff both
// sub-systems accept.

#include <optional>
#include <span>
#include <vector>

#include "asv5/detmetrics.hpp"
#include "asv5/trialdata.hpp"

namespace asv5::tandem {

using trialdata::SasvLabel;

// a-DCF(tau) = alpha * P_miss + (1 - gamma) * P_fa,non + gamma * P_fa,spf.
class SasvCostConfig {
 public:
  static constexpr double kDefaultAlpha = 1.58;
  static constexpr double kDefaultGamma = 0.84;

  struct Costs {
    double c_miss;
    double c_fa_non;
    double c_fa_spf;
    double pi_tar;
    double pi_non;
    double pi_spf;
  };

  // alpha = 1.58, gamma = 0.84.
  SasvCostConfig();

  static SasvCostConfig FromAlphaGamma(double alpha, double gamma);
  // alpha = c_miss*pi_tar / N, gamma = c_fa_spf*pi_spf / N with
  // N = c_fa_non*pi_non + c_fa_spf*pi_spf.
  static SasvCostConfig FromCosts(const Costs &costs);
  // As FromCosts, but the derived constants must reproduce the stated
  // alpha and gamma within `tolerance`.
  static SasvCostConfig FromCostsChecked(const Costs &costs, double alpha,
                                         double gamma, double tolerance = 1e-6);

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  const std::optional<Costs> &costs() const { return costs_; }

 private:
  double alpha_;
  double gamma_;
  std::optional<Costs> costs_;
};

struct SasvScores {
  std::vector<double> target;
  std::vector<double> nontarget;
  std::vector<double> spoof;
};

struct SasvCurve {
  std::vector<double> thresholds;  // -inf, midpoints, +inf
  std::vector<double> p_miss;
  std::vector<double> p_fa_non;
  std::vector<double> p_fa_spf;

  std::size_t size() const { return thresholds.size(); }
};

struct TandemTrial {
  double asv;
  double cm;
  SasvLabel label;
};

inline double ADcf(double p_miss, double p_fa_non, double p_fa_spf,
                   const SasvCostConfig &cfg) {
  return cfg.alpha() * p_miss + (1.0 - cfg.gamma()) * p_fa_non +
         cfg.gamma() * p_fa_spf;
}

SasvCurve ComputeSasvCurve(const SasvScores &scores);

// Ties go to the smallest threshold.
det::ThresholdedValue MinADcf(const SasvCurve &curve, const SasvCostConfig &cfg);

// How the ASV threshold of the tandem system is fixed.
struct AsvThresholdPolicy {
  enum class Kind { kEerPoint, kFixed };
  Kind kind = Kind::kEerPoint;
  double threshold = 0.0;  // kFixed only

  static AsvThresholdPolicy EerPoint() { return {}; }
  static AsvThresholdPolicy Fixed(double t) { return {Kind::kFixed, t}; }
};

// ASV threshold under the policy. kEerPoint picks the target-vs-nontarget
// operating point minimizing |P_miss - P_fa| (smallest threshold on ties).
double AsvThreshold(std::span<const TandemTrial> trials,
                    const AsvThresholdPolicy &policy);

struct TDcfResult {
  double value;         // normalized; 1.0 = no better than a CM dummy
  double tau_cm;
  double tau_asv;
  double default_cost;  // unnormalized cost of the better CM dummy
};

// Minimum over CM thresholds of the tandem cost
//   alpha * P_miss^tdm + (1 - gamma) * P_fa,non^tdm + gamma * P_fa,spf^tdm
// at the policy's ASV threshold, divided by the cost of the better of the
// two CM dummies (accept all / reject all). Ties go to the smallest CM
// threshold.
TDcfResult TDcfConstrained(std::span<const TandemTrial> trials,
                           const AsvThresholdPolicy &policy,
                           const SasvCostConfig &cfg);

inline constexpr double kTEerTolerance = 1e-4;

struct TEerResult {
  double value;  // mean of the three interpolated rates
  double tau_asv;
  double tau_cm;
  // Interpolated rates at the solution; equal within the tolerance.
  double p_miss;
  double p_fa_non;
  double p_fa_spf;
  // Rates by direct counting at (tau_asv, tau_cm).
  double raw_p_miss;
  double raw_p_fa_non;
  double raw_p_fa_spf;
};

// Concurrent t-EER. Rates are extended between empirical operating points
// by bilinear interpolation over the (ASV, CM) threshold index grid. The
// ASV threshold is searched by bisection (outer); for each candidate the CM
// threshold equalizing P_miss and P_fa,spf is solved exactly (inner). Throws
// DegenerateTandem when no pair equalizes all three rates within tolerance.
TEerResult TEer(std::span<const TandemTrial> trials,
                double tolerance = kTEerTolerance);

struct SasvReport {
  double min_a_dcf;
  double tau_sasv;
  std::optional<double> t_dcf;
  std::optional<double> t_eer;
  std::optional<double> tau_asv;
  std::optional<double> tau_cm;
};

// Tandem metrics are filled in iff `tandem` is given.
SasvReport EvaluateSasv(const SasvScores &scores,
                        std::optional<std::span<const TandemTrial>> tandem,
                        const SasvCostConfig &cfg,
                        const AsvThresholdPolicy &policy = AsvThresholdPolicy::EerPoint());

}  // namespace asv5::tandem
