#pragma once

// Brute-force reference implementations. They evaluate the metric
// definitions by direct counting at every candidate threshold and share no
// code with the production metrics; tests and the acceptance suite compare
// the two. Quadratic (or exponential, for PAV) cost: small inputs only.

#include <cstddef>
#include <span>
#include <vector>

namespace asv5::sim::oracle {

// Candidate thresholds: -inf, midpoints between adjacent distinct values,
// +inf.
std::vector<double> CandidateThresholds(std::vector<double> values);

struct Rates2 {
  double p_miss;
  double p_fa;
};

Rates2 RatesAt(std::span<const double> bona, std::span<const double> spoof, double tau);

// min over candidates of beta * p_miss + p_fa. Total trials <= 10^4.
double BruteMinDcf(std::span<const double> bona, std::span<const double> spoof,
                   double beta);

double BruteMinADcf(std::span<const double> target, std::span<const double> nontarget,
                    std::span<const double> spoof, double alpha, double gamma);

enum class Cls { kTarget, kNontarget, kSpoof };

struct Trial {
  double asv;
  double cm;
  Cls cls;
};

struct Rates3 {
  double p_miss;
  double p_fa_non;
  double p_fa_spf;
};

// Tandem accept = asv >= tau_asv and cm >= tau_cm.
Rates3 TandemRatesAt(std::span<const Trial> trials, double tau_asv, double tau_cm);

// Candidate ASV threshold minimizing |p_miss - p_fa| on target vs nontarget
// ASV scores (smallest on ties).
double BruteAsvEerThreshold(std::span<const Trial> trials);

// Normalized ASV-constrained t-DCF at the given ASV threshold.
double BruteTDcf(std::span<const Trial> trials, double tau_asv, double alpha,
                 double gamma);

// Isotonic regression of labels (1 = bona fide) on scores by enumerating
// every partition of the distinct-score groups into contiguous blocks.
// Returns the fitted value for each input item, in input order. Limited to
// 8 distinct scores and 16 items.
std::vector<double> BrutePav(std::span<const double> scores, std::span<const int> labels);

}  // namespace asv5::sim::oracle
