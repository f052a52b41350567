#include "asv5/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "asv5/error.hpp"

namespace asv5::sim::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Fraction(std::size_t count, std::size_t total) {
  return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

std::vector<double> CandidateThresholds(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<double> out{-kInf};
  for (std::size_t i = 1; i < values.size(); ++i) {
    double t = (values[i - 1] + values[i]) / 2.0;
    if (t <= values[i - 1]) t = values[i];
    out.push_back(t);
  }
  out.push_back(kInf);
  return out;
}

Rates2 RatesAt(std::span<const double> bona, std::span<const double> spoof, double tau) {
  std::size_t miss = 0;
  for (double x : bona) miss += x < tau ? 1 : 0;
  std::size_t fa = 0;
  for (double x : spoof) fa += x >= tau ? 1 : 0;
  return {Fraction(miss, bona.size()), Fraction(fa, spoof.size())};
}

double BruteMinDcf(std::span<const double> bona, std::span<const double> spoof,
                   double beta) {
  if (bona.size() + spoof.size() > 10000) {
    throw Error(ErrorCode::kInvalidArgument, "oracle limited to 10^4 trials");
  }
  std::vector<double> all(bona.begin(), bona.end());
  all.insert(all.end(), spoof.begin(), spoof.end());
  double best = kInf;
  for (double tau : CandidateThresholds(all)) {
    const Rates2 r = RatesAt(bona, spoof, tau);
    best = std::min(best, beta * r.p_miss + r.p_fa);
  }
  return best;
}

double BruteMinADcf(std::span<const double> target, std::span<const double> nontarget,
                    std::span<const double> spoof, double alpha, double gamma) {
  std::vector<double> all(target.begin(), target.end());
  all.insert(all.end(), nontarget.begin(), nontarget.end());
  all.insert(all.end(), spoof.begin(), spoof.end());
  double best = kInf;
  for (double tau : CandidateThresholds(all)) {
    std::size_t miss = 0;
    for (double x : target) miss += x < tau ? 1 : 0;
    std::size_t fa_non = 0;
    for (double x : nontarget) fa_non += x >= tau ? 1 : 0;
    std::size_t fa_spf = 0;
    for (double x : spoof) fa_spf += x >= tau ? 1 : 0;
    const double c = alpha * Fraction(miss, target.size()) +
                     (1.0 - gamma) * Fraction(fa_non, nontarget.size()) +
                     gamma * Fraction(fa_spf, spoof.size());
    best = std::min(best, c);
  }
  return best;
}

Rates3 TandemRatesAt(std::span<const Trial> trials, double tau_asv, double tau_cm) {
  std::size_t n[3] = {0, 0, 0};
  std::size_t acc[3] = {0, 0, 0};
  for (const Trial &t : trials) {
    const auto c = static_cast<int>(t.cls);
    ++n[c];
    if (t.asv >= tau_asv && t.cm >= tau_cm) ++acc[c];
  }
  return {Fraction(n[0] - acc[0], n[0]), Fraction(acc[1], n[1]), Fraction(acc[2], n[2])};
}

double BruteAsvEerThreshold(std::span<const Trial> trials) {
  std::vector<double> tar;
  std::vector<double> non;
  for (const Trial &t : trials) {
    if (t.cls == Cls::kTarget) tar.push_back(t.asv);
    if (t.cls == Cls::kNontarget) non.push_back(t.asv);
  }
  std::vector<double> all(tar);
  all.insert(all.end(), non.begin(), non.end());
  double best_gap = kInf;
  double best_tau = kInf;
  for (double tau : CandidateThresholds(all)) {
    const Rates2 r = RatesAt(tar, non, tau);
    const double gap = std::abs(r.p_miss - r.p_fa);
    if (gap < best_gap) {
      best_gap = gap;
      best_tau = tau;
    }
  }
  return best_tau;
}

double BruteTDcf(std::span<const Trial> trials, double tau_asv, double alpha,
                 double gamma) {
  auto cost = [&](double tau_cm) {
    const Rates3 r = TandemRatesAt(trials, tau_asv, tau_cm);
    return alpha * r.p_miss + (1.0 - gamma) * r.p_fa_non + gamma * r.p_fa_spf;
  };
  std::vector<double> cms;
  for (const Trial &t : trials) cms.push_back(t.cm);
  const double dummy = std::min(cost(-kInf), cost(kInf));
  double best = kInf;
  for (double tau : CandidateThresholds(cms)) best = std::min(best, cost(tau));
  return best / dummy;
}

std::vector<double> BrutePav(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty() || scores.size() > 16) {
    throw Error(ErrorCode::kInvalidArgument, "brute PAV needs 1..16 labelled items");
  }
  // Distinct score groups in ascending order.
  std::map<double, std::pair<long long, long long>> groups;  // score -> (positives, count)
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto &g = groups[scores[i]];
    g.first += labels[i];
    g.second += 1;
  }
  if (groups.size() > 8) {
    throw Error(ErrorCode::kInvalidArgument, "brute PAV limited to 8 distinct scores");
  }
  std::vector<std::pair<long long, long long>> g;
  std::vector<double> keys;
  for (const auto &[k, v] : groups) {
    keys.push_back(k);
    g.push_back(v);
  }
  const std::size_t k = g.size();
  double best_err = kInf;
  std::vector<double> best_fit;
  // Bit i of `cuts` set = a block boundary after group i.
  for (unsigned cuts = 0; cuts < (1u << (k - 1)); ++cuts) {
    std::vector<double> fit(k);
    std::vector<double> means;
    std::size_t start = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool end = i == k - 1 || (cuts >> i) & 1u;
      if (!end) continue;
      long long pos = 0;
      long long cnt = 0;
      for (std::size_t j = start; j <= i; ++j) {
        pos += g[j].first;
        cnt += g[j].second;
      }
      const double mean = static_cast<double>(pos) / static_cast<double>(cnt);
      means.push_back(mean);
      for (std::size_t j = start; j <= i; ++j) fit[j] = mean;
      start = i + 1;
    }
    if (!std::is_sorted(means.begin(), means.end())) continue;
    double err = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      // Sum of squared residuals of the group's 0/1 labels around fit[j].
      const double p = static_cast<double>(g[j].first);
      const double n = static_cast<double>(g[j].second);
      err += p * (1.0 - fit[j]) * (1.0 - fit[j]) + (n - p) * fit[j] * fit[j];
    }
    if (err < best_err - 1e-12) {
      best_err = err;
      best_fit = fit;
    }
  }
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) {
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(keys.begin(), keys.end(), s) - keys.begin());
    out.push_back(best_fit[idx]);
  }
  return out;
}

}  // namespace asv5::sim::oracle
