#pragma once

// Condition-sliced metrics, top-half aggregation, ranking and attack-group
// roll-ups.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asv5/detmetrics.hpp"
#include "asv5/tandem.hpp"
#include "asv5/trialdata.hpp"

namespace asv5::analysis {

enum class AttackGroup { kTts, kVc, kAdversarial };

std::string_view GroupName(AttackGroup group);
std::optional<AttackGroup> ParseGroup(std::string_view name);

// attack id -> group. Text format: one "<attack> <group>" pair per line,
// group one of TTS, VC, adversarial; '#' starts a comment line.
class AttackGroupMap {
 public:
  // Evaluation-set attacks A17..A32.
  static AttackGroupMap Default();
  static AttackGroupMap Parse(std::istream &in, std::string_view source);
  static AttackGroupMap ParseFile(const std::filesystem::path &path);

  void Set(std::string attack, AttackGroup group);
  bool Contains(const std::string &attack) const;
  // Throws UnmappedAttack.
  AttackGroup GroupOf(const std::string &attack) const;
  const std::map<std::string, AttackGroup> &entries() const { return entries_; }

 private:
  std::map<std::string, AttackGroup> entries_;
};

// Which bona fide trials accompany the spoof trials of an attack slice.
enum class PairingPolicy {
  kPoolBonafide,    // every bona fide trial
  kMatchCondition,  // bona fide trials whose (codec, quality) occurs among
                    // the slice's spoof trials
};

std::string_view PolicyName(PairingPolicy policy);
std::optional<PairingPolicy> ParsePolicy(std::string_view name);

struct Selector {
  enum class Kind { kAll, kAttack, kGroup, kCodec, kCodecQuality };

  Kind kind = Kind::kAll;
  std::string attack;
  AttackGroup group = AttackGroup::kTts;
  std::optional<std::string> codec;  // nullopt = uncoded
  std::optional<int> quality;

  static Selector All();
  static Selector Attack(std::string id);
  static Selector Group(AttackGroup g);
  static Selector Codec(std::optional<std::string> codec);
  static Selector CodecQuality(std::optional<std::string> codec, std::optional<int> quality);

  // "all", "attack=A17", "group=TTS", "codec=opus", "codec=opus:3".
  std::string Label() const;
};

enum class SliceAxis { kAttack, kGroup, kCodec, kCodecQuality };

std::optional<SliceAxis> ParseAxis(std::string_view name);

// Every slice along `axis` that occurs in the keys, in label order.
std::vector<Selector> EnumerateSlices(const trialdata::Track1Set &set, SliceAxis axis,
                                      const AttackGroupMap &groups);
std::vector<Selector> EnumerateSlices(const trialdata::Track2Set &set, SliceAxis axis,
                                      const AttackGroupMap &groups);

struct CmScores {
  std::vector<double> bona;
  std::vector<double> spoof;
};

CmScores SplitCm(const trialdata::Track1Set &set);
tandem::SasvScores SplitSasv(const trialdata::Track2Set &set);
// Requires triplet scores.
std::vector<tandem::TandemTrial> TandemTrials(const trialdata::Track2Set &set);

// Trial subset of one slice. Throws EmptySlice when a class ends up empty,
// UnmappedAttack for group slices over attacks missing from the map.
trialdata::Track1Set SelectSlice(const trialdata::Track1Set &set, const Selector &sel,
                                 PairingPolicy policy, const AttackGroupMap &groups);
trialdata::Track2Set SelectSlice(const trialdata::Track2Set &set, const Selector &sel,
                                 PairingPolicy policy, const AttackGroupMap &groups);

struct SliceReport {
  std::string slice;
  PairingPolicy policy;
  std::size_t n_bona = 0;  // Track 1 bona fide, Track 2 targets
  std::size_t n_nontarget = 0;
  std::size_t n_spoof = 0;
  std::variant<det::CmReport, tandem::SasvReport> metrics;

  // minDCF (Track 1) or min a-DCF (Track 2).
  double primary() const;
};

std::vector<SliceReport> SliceMetrics(const trialdata::Track1Set &set,
                                      std::span<const Selector> slices,
                                      PairingPolicy policy, const AttackGroupMap &groups,
                                      const det::CostConfig &cfg,
                                      det::EerMethod eer = det::EerMethod::kRocch);

// Tandem metrics are computed per slice iff `with_tandem` and the scores
// carry triplets.
std::vector<SliceReport> SliceMetrics(const trialdata::Track2Set &set,
                                      std::span<const Selector> slices,
                                      PairingPolicy policy, const AttackGroupMap &groups,
                                      const tandem::SasvCostConfig &cfg, bool with_tandem,
                                      const tandem::AsvThresholdPolicy &asv =
                                          tandem::AsvThresholdPolicy::EerPoint());

enum class MedianConvention { kAverageMiddle, kLowerMiddle };

double Median(std::vector<double> values,
              MedianConvention convention = MedianConvention::kAverageMiddle);

struct Quantiles {
  double min;
  double q1;
  double median;
  double q3;
  double max;
};

// Quartiles by linear interpolation between order statistics; the median
// follows `convention`.
Quantiles BoxStats(std::vector<double> values,
                   MedianConvention convention = MedianConvention::kAverageMiddle);

struct SubmissionSlices {
  std::string id;
  double overall;  // primary metric on the full evaluation set
  std::map<std::string, double> slices;
};

// The ceil(n/2) submissions with the lowest overall metric (ties by id).
std::vector<std::string> TopHalf(std::span<const SubmissionSlices> submissions);

struct SliceAggregate {
  std::vector<std::string> cohort;
  double median;
  Quantiles box;
};

// Per slice label: median (and box statistics) over the top-half cohort.
// Throws TooFewSubmissions (< 2) and TrialSetMismatch when a cohort member
// lacks a slice another member has.
std::map<std::string, SliceAggregate> MedianTopHalf(
    std::span<const SubmissionSlices> submissions,
    MedianConvention convention = MedianConvention::kAverageMiddle);

struct Submission {
  std::string id;
  std::string trial_set_checksum;
  double primary;
  std::map<std::string, double> secondary;
};

struct LeaderboardEntry {
  std::size_t rank;  // 1-based
  Submission submission;
};

struct Leaderboard {
  trialdata::Track track;
  std::string condition;  // "closed" or "open"; metadata only
  std::string primary_metric;
  std::vector<LeaderboardEntry> entries;
};

// Ascending primary metric, ties by id. Throws TrialSetMismatch when the
// checksums differ.
Leaderboard Rank(std::vector<Submission> submissions, trialdata::Track track,
                 std::string condition);

struct GroupRollup {
  AttackGroup group;
  std::map<std::string, double> values;  // attack -> value
  std::string easiest;  // lowest value, ties by id
  std::string hardest;  // highest value, ties by id
};

// Groups per-attack values. Every attack must be mapped (UnmappedAttack).
// Without `requested`, every group with at least one attack is reported;
// a requested group with no attacks throws EmptyGroup, as does an empty
// input.
std::vector<GroupRollup> RollupGroups(const std::map<std::string, double> &per_attack,
                                      const AttackGroupMap &groups,
                                      std::optional<std::vector<AttackGroup>> requested =
                                          std::nullopt);

// SHA-256 (hex) over the canonical trial list of a joined set.
std::string TrialSetChecksum(const trialdata::Track1Set &set);
std::string TrialSetChecksum(const trialdata::Track2Set &set);

}  // namespace asv5::analysis
