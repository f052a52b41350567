#include "asv5/trialdata.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <utility>

#include "asv5/error.hpp"

namespace asv5::trialdata {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::vector<std::string_view> Tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && IsSpace(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !IsSpace(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool IsContent(const std::vector<std::string_view> &tokens) {
  return !tokens.empty() && tokens.front().front() != '#';
}

std::string Where(std::string_view source, std::size_t row) {
  return std::string(source) + ":" + std::to_string(row);
}

std::optional<double> ParseDouble(std::string_view token) {
  double value = 0.0;
  const char *first = token.data();
  const char *last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

double ParseScoreToken(std::string_view token, std::string_view source,
                       std::size_t row) {
  auto value = ParseDouble(token);
  if (!value) {
    throw Error(ErrorCode::kMalformedScore,
                Where(source, row) + ": not a number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(*value)) {
    throw Error(ErrorCode::kMalformedScore,
                Where(source, row) + ": non-finite score '" + std::string(token) + "'");
  }
  return *value;
}

std::ifstream OpenOrThrow(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }
  return in;
}

CmLabel ParseCmLabel(std::string_view token, std::string_view source,
                     std::size_t row) {
  if (token == "bonafide") return CmLabel::kBonafide;
  if (token == "spoof") return CmLabel::kSpoof;
  throw Error(ErrorCode::kUnknownLabel,
              Where(source, row) + ": '" + std::string(token) + "'");
}

SasvLabel ParseSasvLabel(std::string_view token, std::string_view source,
                         std::size_t row) {
  if (token == "target") return SasvLabel::kTarget;
  if (token == "nontarget") return SasvLabel::kNontarget;
  if (token == "spoof") return SasvLabel::kSpoof;
  throw Error(ErrorCode::kUnknownLabel,
              Where(source, row) + ": '" + std::string(token) + "'");
}

Condition ParseCondition(std::string_view attack, std::string_view codec,
                         std::string_view quality, std::string_view source,
                         std::size_t row) {
  Condition c;
  if (attack != kNoAttack) c.attack = std::string(attack);
  if (codec != kNoCodec) c.codec = std::string(codec);
  if (quality != kNoQuality) {
    int q = 0;
    auto [ptr, ec] =
        std::from_chars(quality.data(), quality.data() + quality.size(), q);
    if (ec != std::errc() || ptr != quality.data() + quality.size()) {
      throw Error(ErrorCode::kMalformedKey,
                  Where(source, row) + ": quality '" + std::string(quality) +
                      "' is not an integer");
    }
    if (q < 1 || q > 5) {
      throw Error(ErrorCode::kQualityOutOfRange,
                  Where(source, row) + ": quality " + std::to_string(q) +
                      " outside 1..5");
    }
    c.quality = q;
  }
  if (c.codec.has_value() != c.quality.has_value()) {
    throw Error(ErrorCode::kCodecQualityMismatch,
                Where(source, row) + ": codec '" + std::string(codec) +
                    "' with quality '" + std::string(quality) + "'");
  }
  return c;
}

TrialId MakeTrialId(std::string_view token) { return TrialId(std::string(token)); }

void WriteCondition(std::ostream &out, const Condition &c) {
  out << (c.attack ? *c.attack : std::string(kNoAttack)) << ' '
      << (c.codec ? *c.codec : std::string(kNoCodec)) << ' ';
  if (c.quality) {
    out << *c.quality;
  } else {
    out << kNoQuality;
  }
}

// Identity used to match scores with keys. Track 1 trials are keyed by
// trial id; Track 2 trials by (enrollment, trial) since one test utterance
// can be scored against several speaker models.
using MatchKey = std::pair<std::string, std::string>;

MatchKey MatchKeyOf(const ScoreRecord &r) {
  return {r.enroll.value_or(std::string()), r.trial.str()};
}
MatchKey MatchKeyOf(const Track1Key &k) { return {std::string(), k.trial.str()}; }
MatchKey MatchKeyOf(const Track2Key &k) { return {k.enroll, k.trial.str()}; }

std::string Describe(const MatchKey &k) {
  return k.first.empty() ? k.second : k.first + " " + k.second;
}

template <class Key>
JoinedTrialSet<Key> JoinImpl(const ScoreSet &scores, std::span<const Key> keys,
                             JoinMode mode, Track expected) {
  if (scores.track != expected) {
    throw Error(ErrorCode::kTrackMismatch,
                "score set is " + std::string(TrackName(scores.track)) +
                    " but keys are " + std::string(TrackName(expected)));
  }
  std::map<MatchKey, const Key *> by_id;
  for (const Key &k : keys) by_id.emplace(MatchKeyOf(k), &k);

  JoinedTrialSet<Key> out;
  std::set<MatchKey> scored;
  for (const ScoreRecord &r : scores.records) {
    MatchKey id = MatchKeyOf(r);
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kUnmatchedScore,
                  "no key entry for scored trial '" + Describe(id) + "'");
    }
    scored.insert(id);
    out.trials.push_back({*it->second, r});
  }
  for (const auto &[id, key] : by_id) {
    if (scored.count(id)) continue;
    if (mode == JoinMode::kStrict) {
      throw Error(ErrorCode::kMissingScore,
                  "no score for key trial '" + Describe(id) + "'");
    }
    out.warnings.push_back("unscored trial '" + Describe(id) + "'");
  }
  std::sort(out.trials.begin(), out.trials.end(),
            [](const JoinedTrial<Key> &a, const JoinedTrial<Key> &b) {
              const MatchKey ka = MatchKeyOf(a.key);
              const MatchKey kb = MatchKeyOf(b.key);
              return std::tie(ka.second, ka.first) < std::tie(kb.second, kb.first);
            });
  for (const auto &t : out.trials) ++out.counts[t.key.label];
  return out;
}

template <class Set, class Label>
void RequireClassesImpl(const Set &set, std::span<const Label> labels) {
  for (Label l : labels) {
    if (set.count(l) == 0) {
      throw Error(ErrorCode::kEmptyClass,
                  "no '" + std::string(LabelName(l)) + "' trials");
    }
  }
}

}  // namespace

std::string_view TrackName(Track track) {
  return track == Track::kOne ? "track1" : "track2";
}

TrialId::TrialId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty trial id");
  }
  if (std::any_of(value_.begin(), value_.end(), IsSpace)) {
    throw Error(ErrorCode::kInvalidArgument,
                "trial id contains whitespace: '" + value_ + "'");
  }
}

std::string_view LabelName(CmLabel label) {
  return label == CmLabel::kBonafide ? "bonafide" : "spoof";
}

std::string_view LabelName(SasvLabel label) {
  switch (label) {
    case SasvLabel::kTarget: return "target";
    case SasvLabel::kNontarget: return "nontarget";
    case SasvLabel::kSpoof: return "spoof";
  }
  return "?";
}

ScoreSet ParseScores(std::istream &in, Track track, std::string_view source) {
  ScoreSet set;
  set.track = track;
  std::set<MatchKey> seen;
  std::optional<bool> triplets;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto tok = Tokenize(line);
    if (!IsContent(tok)) continue;

    ScoreRecord r{std::nullopt, TrialId("?"), 0.0, std::nullopt, std::nullopt};
    if (track == Track::kOne) {
      if (tok.size() != 2) {
        throw Error(ErrorCode::kMalformedScore,
                    Where(source, row) + ": expected 2 columns, got " +
                        std::to_string(tok.size()));
      }
      r.trial = MakeTrialId(tok[0]);
      r.score = ParseScoreToken(tok[1], source, row);
    } else {
      if (tok.size() != 3 && tok.size() != 5) {
        throw Error(ErrorCode::kMalformedScore,
                    Where(source, row) + ": expected 3 or 5 columns, got " +
                        std::to_string(tok.size()));
      }
      r.enroll = std::string(tok[0]);
      r.trial = MakeTrialId(tok[1]);
      r.score = ParseScoreToken(tok[2], source, row);
      const bool is_triplet = tok.size() == 5;
      if (triplets && *triplets != is_triplet) {
        throw Error(ErrorCode::kMixedTriplets,
                    Where(source, row) +
                        ": rows mix SASV-only and triplet scores");
      }
      triplets = is_triplet;
      if (is_triplet) {
        r.cm = ParseScoreToken(tok[3], source, row);
        r.asv = ParseScoreToken(tok[4], source, row);
      }
    }
    if (!seen.insert(MatchKeyOf(r)).second) {
      throw Error(ErrorCode::kDuplicateTrial,
                  Where(source, row) + ": '" + Describe(MatchKeyOf(r)) + "'");
    }
    set.records.push_back(std::move(r));
  }
  return set;
}

ScoreSet ParseScoresFile(const std::filesystem::path &path, Track track) {
  auto in = OpenOrThrow(path);
  return ParseScores(in, track, path.string());
}

std::vector<Track1Key> ParseTrack1Keys(std::istream &in, std::string_view source) {
  std::vector<Track1Key> keys;
  std::set<std::string> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto tok = Tokenize(line);
    if (!IsContent(tok)) continue;
    if (tok.size() != 5) {
      throw Error(ErrorCode::kMalformedKey,
                  Where(source, row) + ": expected 5 columns, got " +
                      std::to_string(tok.size()));
    }
    Track1Key k{MakeTrialId(tok[0]), ParseCmLabel(tok[1], source, row),
                ParseCondition(tok[2], tok[3], tok[4], source, row)};
    const bool bonafide = k.label == CmLabel::kBonafide;
    if (bonafide == k.condition.attack.has_value()) {
      throw Error(ErrorCode::kLabelAttackMismatch,
                  Where(source, row) + ": label '" +
                      std::string(LabelName(k.label)) + "' with attack '" +
                      std::string(tok[2]) + "'");
    }
    if (!seen.insert(k.trial.str()).second) {
      throw Error(ErrorCode::kDuplicateTrial,
                  Where(source, row) + ": '" + k.trial.str() + "'");
    }
    keys.push_back(std::move(k));
  }
  return keys;
}

std::vector<Track1Key> ParseTrack1KeysFile(const std::filesystem::path &path) {
  auto in = OpenOrThrow(path);
  return ParseTrack1Keys(in, path.string());
}

std::vector<Track2Key> ParseTrack2Keys(std::istream &in, std::string_view source) {
  std::vector<Track2Key> keys;
  std::set<MatchKey> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto tok = Tokenize(line);
    if (!IsContent(tok)) continue;
    if (tok.size() != 6) {
      throw Error(ErrorCode::kMalformedKey,
                  Where(source, row) + ": expected 6 columns, got " +
                      std::to_string(tok.size()));
    }
    Track2Key k{std::string(tok[0]), MakeTrialId(tok[1]),
                ParseSasvLabel(tok[2], source, row),
                ParseCondition(tok[3], tok[4], tok[5], source, row)};
    if (k.label != SasvLabel::kSpoof && k.condition.attack) {
      throw Error(ErrorCode::kLabelAttackMismatch,
                  Where(source, row) + ": label '" +
                      std::string(LabelName(k.label)) + "' with attack '" +
                      std::string(tok[3]) + "'");
    }
    if (!seen.insert(MatchKeyOf(k)).second) {
      throw Error(ErrorCode::kDuplicateTrial,
                  Where(source, row) + ": '" + Describe(MatchKeyOf(k)) + "'");
    }
    keys.push_back(std::move(k));
  }
  return keys;
}

std::vector<Track2Key> ParseTrack2KeysFile(const std::filesystem::path &path) {
  auto in = OpenOrThrow(path);
  return ParseTrack2Keys(in, path.string());
}

std::string FormatNumber(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void WriteScores(std::ostream &out, const ScoreSet &scores) {
  for (const ScoreRecord &r : scores.records) {
    if (scores.track == Track::kTwo) out << r.enroll.value_or("-") << ' ';
    out << r.trial.str() << ' ' << FormatNumber(r.score);
    if (r.has_triplet()) {
      out << ' ' << FormatNumber(*r.cm) << ' ' << FormatNumber(*r.asv);
    }
    out << '\n';
  }
}

void WriteKeys(std::ostream &out, std::span<const Track1Key> keys) {
  for (const Track1Key &k : keys) {
    out << k.trial.str() << ' ' << LabelName(k.label) << ' ';
    WriteCondition(out, k.condition);
    out << '\n';
  }
}

void WriteKeys(std::ostream &out, std::span<const Track2Key> keys) {
  for (const Track2Key &k : keys) {
    out << k.enroll << ' ' << k.trial.str() << ' ' << LabelName(k.label) << ' ';
    WriteCondition(out, k.condition);
    out << '\n';
  }
}

Track1Set Join(const ScoreSet &scores, std::span<const Track1Key> keys,
               JoinMode mode) {
  return JoinImpl(scores, keys, mode, Track::kOne);
}

Track2Set Join(const ScoreSet &scores, std::span<const Track2Key> keys,
               JoinMode mode) {
  return JoinImpl(scores, keys, mode, Track::kTwo);
}

void RequireClasses(const Track1Set &set, std::span<const CmLabel> labels) {
  RequireClassesImpl(set, labels);
}

void RequireClasses(const Track2Set &set, std::span<const SasvLabel> labels) {
  RequireClassesImpl(set, labels);
}

}  // namespace asv5::trialdata
