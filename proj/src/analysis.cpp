#include "asv5/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "asv5/checksum.hpp"
#include "asv5/error.hpp"

namespace asv5::analysis {

using trialdata::CmLabel;
using trialdata::Condition;
using trialdata::SasvLabel;
using trialdata::Track1Set;
using trialdata::Track2Set;

std::string_view GroupName(AttackGroup group) {
  switch (group) {
    case AttackGroup::kTts:
      return "TTS";
    case AttackGroup::kVc:
      return "VC";
    case AttackGroup::kAdversarial:
      return "adversarial";
  }
  return "?";
}

std::optional<AttackGroup> ParseGroup(std::string_view name) {
  if (name == "TTS" || name == "tts") return AttackGroup::kTts;
  if (name == "VC" || name == "vc") return AttackGroup::kVc;
  if (name == "adversarial") return AttackGroup::kAdversarial;
  return std::nullopt;
}

AttackGroupMap AttackGroupMap::Default() {
  AttackGroupMap m;
  for (const char *a : {"A17", "A19", "A21", "A22", "A28", "A29"}) m.Set(a, AttackGroup::kTts);
  for (const char *a : {"A24", "A25", "A26"}) m.Set(a, AttackGroup::kVc);
  for (const char *a : {"A18", "A20", "A23", "A27", "A30", "A31", "A32"}) {
    m.Set(a, AttackGroup::kAdversarial);
  }
  return m;
}

AttackGroupMap AttackGroupMap::Parse(std::istream &in, std::string_view source) {
  AttackGroupMap m;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream ss(line);
    std::string attack;
    if (!(ss >> attack) || attack[0] == '#') continue;
    std::string group;
    std::string extra;
    auto where = [&] { return std::string(source) + ":" + std::to_string(row) + ": "; };
    if (!(ss >> group) || (ss >> extra)) {
      throw Error(ErrorCode::kMalformedKey, where() + "expected '<attack> <group>'");
    }
    const auto g = ParseGroup(group);
    if (!g) {
      throw Error(ErrorCode::kUnknownLabel,
                  where() + "group must be TTS, VC or adversarial, got '" + group + "'");
    }
    if (m.Contains(attack)) {
      throw Error(ErrorCode::kDuplicateTrial, where() + "attack " + attack + " listed twice");
    }
    m.Set(attack, *g);
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read error on " + std::string(source));
  return m;
}

AttackGroupMap AttackGroupMap::ParseFile(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return Parse(in, path.string());
}

void AttackGroupMap::Set(std::string attack, AttackGroup group) {
  entries_[std::move(attack)] = group;
}

bool AttackGroupMap::Contains(const std::string &attack) const {
  return entries_.contains(attack);
}

AttackGroup AttackGroupMap::GroupOf(const std::string &attack) const {
  auto it = entries_.find(attack);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kUnmappedAttack, "attack " + attack + " has no group");
  }
  return it->second;
}

std::string_view PolicyName(PairingPolicy policy) {
  return policy == PairingPolicy::kPoolBonafide ? "pool-bonafide" : "match-condition";
}

std::optional<PairingPolicy> ParsePolicy(std::string_view name) {
  if (name == "pool-bonafide") return PairingPolicy::kPoolBonafide;
  if (name == "match-condition") return PairingPolicy::kMatchCondition;
  return std::nullopt;
}

Selector Selector::All() { return {}; }

Selector Selector::Attack(std::string id) {
  Selector s;
  s.kind = Kind::kAttack;
  s.attack = std::move(id);
  return s;
}

Selector Selector::Group(AttackGroup g) {
  Selector s;
  s.kind = Kind::kGroup;
  s.group = g;
  return s;
}

Selector Selector::Codec(std::optional<std::string> codec) {
  Selector s;
  s.kind = Kind::kCodec;
  s.codec = std::move(codec);
  return s;
}

Selector Selector::CodecQuality(std::optional<std::string> codec, std::optional<int> quality) {
  if (codec.has_value() != quality.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "codec and quality must be given together");
  }
  Selector s;
  s.kind = Kind::kCodecQuality;
  s.codec = std::move(codec);
  s.quality = quality;
  return s;
}

std::string Selector::Label() const {
  const std::string c = codec.value_or(std::string(trialdata::kNoCodec));
  switch (kind) {
    case Kind::kAll:
      return "all";
    case Kind::kAttack:
      return "attack=" + attack;
    case Kind::kGroup:
      return "group=" + std::string(GroupName(group));
    case Kind::kCodec:
      return "codec=" + c;
    case Kind::kCodecQuality:
      return quality ? "codec=" + c + ":" + std::to_string(*quality) : "codec=" + c;
  }
  return "?";
}

std::optional<SliceAxis> ParseAxis(std::string_view name) {
  if (name == "attack") return SliceAxis::kAttack;
  if (name == "group") return SliceAxis::kGroup;
  if (name == "codec") return SliceAxis::kCodec;
  if (name == "codec-quality") return SliceAxis::kCodecQuality;
  return std::nullopt;
}

namespace {

bool IsBona(CmLabel l) { return l == CmLabel::kBonafide; }
bool IsBona(SasvLabel l) { return l != SasvLabel::kSpoof; }

template <class Set>
std::vector<Selector> Enumerate(const Set &set, SliceAxis axis, const AttackGroupMap &groups) {
  std::vector<Selector> out;
  switch (axis) {
    case SliceAxis::kAttack: {
      std::set<std::string> ids;
      for (const auto &t : set.trials) {
        if (t.key.condition.attack) ids.insert(*t.key.condition.attack);
      }
      for (const auto &id : ids) out.push_back(Selector::Attack(id));
      break;
    }
    case SliceAxis::kGroup: {
      std::set<AttackGroup> gs;
      for (const auto &t : set.trials) {
        if (t.key.condition.attack) gs.insert(groups.GroupOf(*t.key.condition.attack));
      }
      for (AttackGroup g : gs) out.push_back(Selector::Group(g));
      break;
    }
    case SliceAxis::kCodec: {
      std::set<std::optional<std::string>> cs;
      for (const auto &t : set.trials) cs.insert(t.key.condition.codec);
      for (const auto &c : cs) out.push_back(Selector::Codec(c));
      break;
    }
    case SliceAxis::kCodecQuality: {
      std::set<std::pair<std::optional<std::string>, std::optional<int>>> cs;
      for (const auto &t : set.trials) {
        cs.insert({t.key.condition.codec, t.key.condition.quality});
      }
      for (const auto &[c, q] : cs) out.push_back(Selector::CodecQuality(c, q));
      break;
    }
  }
  return out;
}

bool SpoofMatches(const Condition &c, const Selector &sel, const AttackGroupMap &groups) {
  switch (sel.kind) {
    case Selector::Kind::kAll:
      return true;
    case Selector::Kind::kAttack:
      return c.attack && *c.attack == sel.attack;
    case Selector::Kind::kGroup:
      return c.attack && groups.GroupOf(*c.attack) == sel.group;
    case Selector::Kind::kCodec:
      return c.codec == sel.codec;
    case Selector::Kind::kCodecQuality:
      return c.codec == sel.codec && c.quality == sel.quality;
  }
  return false;
}

template <class Set>
Set Select(const Set &set, const Selector &sel, PairingPolicy policy,
           const AttackGroupMap &groups) {
  using Coded = std::pair<std::optional<std::string>, std::optional<int>>;
  const bool attack_axis =
      sel.kind == Selector::Kind::kAttack || sel.kind == Selector::Kind::kGroup;

  std::set<Coded> spoof_conditions;
  std::vector<bool> keep(set.trials.size(), false);
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    const auto &k = set.trials[i].key;
    if (IsBona(k.label)) continue;
    if (SpoofMatches(k.condition, sel, groups)) {
      keep[i] = true;
      spoof_conditions.insert({k.condition.codec, k.condition.quality});
    }
  }
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    const auto &k = set.trials[i].key;
    if (!IsBona(k.label)) continue;
    if (!attack_axis) {
      keep[i] = SpoofMatches(k.condition, sel, groups);
    } else if (policy == PairingPolicy::kPoolBonafide) {
      keep[i] = true;
    } else {
      keep[i] = spoof_conditions.contains({k.condition.codec, k.condition.quality});
    }
  }

  Set out;
  for (std::size_t i = 0; i < set.trials.size(); ++i) {
    if (!keep[i]) continue;
    out.trials.push_back(set.trials[i]);
    ++out.counts[set.trials[i].key.label];
  }
  return out;
}

void RequireNonEmpty(const Track1Set &s, const Selector &sel) {
  if (s.count(CmLabel::kBonafide) == 0 || s.count(CmLabel::kSpoof) == 0) {
    throw Error(ErrorCode::kEmptySlice,
                "slice " + sel.Label() + " lacks bona fide or spoof trials");
  }
}

void RequireNonEmpty(const Track2Set &s, const Selector &sel) {
  if (s.count(SasvLabel::kTarget) == 0 || s.count(SasvLabel::kNontarget) == 0 ||
      s.count(SasvLabel::kSpoof) == 0) {
    throw Error(ErrorCode::kEmptySlice,
                "slice " + sel.Label() + " lacks target, nontarget or spoof trials");
  }
}

}  // namespace

std::vector<Selector> EnumerateSlices(const Track1Set &set, SliceAxis axis,
                                      const AttackGroupMap &groups) {
  return Enumerate(set, axis, groups);
}

std::vector<Selector> EnumerateSlices(const Track2Set &set, SliceAxis axis,
                                      const AttackGroupMap &groups) {
  return Enumerate(set, axis, groups);
}

CmScores SplitCm(const Track1Set &set) {
  CmScores out;
  for (const auto &t : set.trials) {
    (t.key.label == CmLabel::kBonafide ? out.bona : out.spoof).push_back(t.score.score);
  }
  return out;
}

tandem::SasvScores SplitSasv(const Track2Set &set) {
  tandem::SasvScores out;
  for (const auto &t : set.trials) {
    switch (t.key.label) {
      case SasvLabel::kTarget:
        out.target.push_back(t.score.score);
        break;
      case SasvLabel::kNontarget:
        out.nontarget.push_back(t.score.score);
        break;
      case SasvLabel::kSpoof:
        out.spoof.push_back(t.score.score);
        break;
    }
  }
  return out;
}

std::vector<tandem::TandemTrial> TandemTrials(const Track2Set &set) {
  if (!set.has_triplets()) {
    throw Error(ErrorCode::kInvalidArgument, "tandem metrics need cm and asv scores");
  }
  std::vector<tandem::TandemTrial> out;
  out.reserve(set.trials.size());
  for (const auto &t : set.trials) out.push_back({*t.score.asv, *t.score.cm, t.key.label});
  return out;
}

Track1Set SelectSlice(const Track1Set &set, const Selector &sel, PairingPolicy policy,
                      const AttackGroupMap &groups) {
  Track1Set out = Select(set, sel, policy, groups);
  RequireNonEmpty(out, sel);
  return out;
}

Track2Set SelectSlice(const Track2Set &set, const Selector &sel, PairingPolicy policy,
                      const AttackGroupMap &groups) {
  Track2Set out = Select(set, sel, policy, groups);
  RequireNonEmpty(out, sel);
  return out;
}

double SliceReport::primary() const {
  if (const auto *cm = std::get_if<det::CmReport>(&metrics)) return cm->min_dcf;
  return std::get<tandem::SasvReport>(metrics).min_a_dcf;
}

std::vector<SliceReport> SliceMetrics(const Track1Set &set, std::span<const Selector> slices,
                                      PairingPolicy policy, const AttackGroupMap &groups,
                                      const det::CostConfig &cfg, det::EerMethod eer) {
  std::vector<SliceReport> out;
  for (const Selector &sel : slices) {
    const Track1Set sub = SelectSlice(set, sel, policy, groups);
    const CmScores s = SplitCm(sub);
    SliceReport r{sel.Label(), policy, s.bona.size(), 0, s.spoof.size(),
                  det::EvaluateCm(s.bona, s.spoof, cfg, eer)};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SliceReport> SliceMetrics(const Track2Set &set, std::span<const Selector> slices,
                                      PairingPolicy policy, const AttackGroupMap &groups,
                                      const tandem::SasvCostConfig &cfg, bool with_tandem,
                                      const tandem::AsvThresholdPolicy &asv) {
  std::vector<SliceReport> out;
  for (const Selector &sel : slices) {
    const Track2Set sub = SelectSlice(set, sel, policy, groups);
    const tandem::SasvScores s = SplitSasv(sub);
    std::optional<std::vector<tandem::TandemTrial>> trials;
    if (with_tandem && sub.has_triplets()) trials = TandemTrials(sub);
    std::optional<std::span<const tandem::TandemTrial>> view;
    if (trials) view = std::span<const tandem::TandemTrial>(*trials);
    SliceReport r{sel.Label(), policy, s.target.size(), s.nontarget.size(), s.spoof.size(),
                  tandem::EvaluateSasv(s, view, cfg, asv)};
    out.push_back(std::move(r));
  }
  return out;
}

double Median(std::vector<double> values, MedianConvention convention) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "median of no values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  if (convention == MedianConvention::kLowerMiddle) return values[n / 2 - 1];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Quantiles BoxStats(std::vector<double> values, MedianConvention convention) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "quantiles of no values");
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double h = static_cast<double>(values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), q(0.25), Median(values, convention), q(0.75), values.back()};
}

std::vector<std::string> TopHalf(std::span<const SubmissionSlices> submissions) {
  if (submissions.size() < 2) {
    throw Error(ErrorCode::kTooFewSubmissions, "need at least 2 submissions, got " +
                                                   std::to_string(submissions.size()));
  }
  std::vector<const SubmissionSlices *> order;
  std::set<std::string> ids;
  for (const auto &s : submissions) {
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate submission id " + s.id);
    }
    order.push_back(&s);
  }
  std::sort(order.begin(), order.end(), [](const auto *a, const auto *b) {
    return std::tie(a->overall, a->id) < std::tie(b->overall, b->id);
  });
  const std::size_t k = (submissions.size() + 1) / 2;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i]->id);
  return out;
}

std::map<std::string, SliceAggregate> MedianTopHalf(
    std::span<const SubmissionSlices> submissions, MedianConvention convention) {
  const std::vector<std::string> cohort = TopHalf(submissions);
  std::vector<const SubmissionSlices *> members;
  for (const auto &id : cohort) {
    for (const auto &s : submissions) {
      if (s.id == id) members.push_back(&s);
    }
  }
  std::set<std::string> labels;
  for (const auto *m : members) {
    for (const auto &[label, v] : m->slices) labels.insert(label);
  }
  std::map<std::string, SliceAggregate> out;
  for (const auto &label : labels) {
    std::vector<double> values;
    for (const auto *m : members) {
      auto it = m->slices.find(label);
      if (it == m->slices.end()) {
        throw Error(ErrorCode::kTrialSetMismatch,
                    "submission " + m->id + " has no value for slice " + label);
      }
      values.push_back(it->second);
    }
    out[label] = {cohort, Median(values, convention), BoxStats(values, convention)};
  }
  return out;
}

Leaderboard Rank(std::vector<Submission> submissions, trialdata::Track track,
                 std::string condition) {
  if (submissions.empty()) {
    throw Error(ErrorCode::kTooFewSubmissions, "no submissions to rank");
  }
  std::set<std::string> ids;
  for (const auto &s : submissions) {
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate submission id " + s.id);
    }
    if (!std::isfinite(s.primary)) {
      throw Error(ErrorCode::kInvalidArgument, "submission " + s.id + " has a non-finite metric");
    }
    if (s.trial_set_checksum != submissions.front().trial_set_checksum) {
      throw Error(ErrorCode::kTrialSetMismatch,
                  "submission " + s.id + " was scored on a different trial set than " +
                      submissions.front().id);
    }
  }
  std::sort(submissions.begin(), submissions.end(), [](const auto &a, const auto &b) {
    return std::tie(a.primary, a.id) < std::tie(b.primary, b.id);
  });
  Leaderboard board{track, std::move(condition),
                    track == trialdata::Track::kOne ? "min_dcf" : "min_a_dcf", {}};
  for (std::size_t i = 0; i < submissions.size(); ++i) {
    board.entries.push_back({i + 1, std::move(submissions[i])});
  }
  return board;
}

std::vector<GroupRollup> RollupGroups(const std::map<std::string, double> &per_attack,
                                      const AttackGroupMap &groups,
                                      std::optional<std::vector<AttackGroup>> requested) {
  if (per_attack.empty()) throw Error(ErrorCode::kEmptyGroup, "no attack values to group");
  std::map<AttackGroup, std::map<std::string, double>> by_group;
  for (const auto &[attack, v] : per_attack) by_group[groups.GroupOf(attack)][attack] = v;

  std::vector<AttackGroup> wanted;
  if (requested) {
    wanted = *requested;
  } else {
    for (const auto &[g, vals] : by_group) wanted.push_back(g);
  }
  std::vector<GroupRollup> out;
  for (AttackGroup g : wanted) {
    auto it = by_group.find(g);
    if (it == by_group.end()) {
      throw Error(ErrorCode::kEmptyGroup,
                  "group " + std::string(GroupName(g)) + " has no attacks");
    }
    GroupRollup r{g, it->second, {}, {}};
    double lo = 0.0;
    double hi = 0.0;
    for (const auto &[attack, v] : r.values) {
      if (r.easiest.empty() || v < lo) {
        lo = v;
        r.easiest = attack;
      }
      if (r.hardest.empty() || v > hi) {
        hi = v;
        r.hardest = attack;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string TrialSetChecksum(const Track1Set &set) {
  std::string text;
  for (const auto &t : set.trials) {
    text += t.key.trial.str();
    text += ' ';
    text += trialdata::LabelName(t.key.label);
    text += '\n';
  }
  return Sha256Hex(text);
}

std::string TrialSetChecksum(const Track2Set &set) {
  std::string text;
  for (const auto &t : set.trials) {
    text += t.key.enroll;
    text += ' ';
    text += t.key.trial.str();
    text += ' ';
    text += trialdata::LabelName(t.key.label);
    text += '\n';
  }
  return Sha256Hex(text);
}

}  // namespace asv5::analysis
