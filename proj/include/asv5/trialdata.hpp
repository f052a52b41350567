#pragma once

// Score files, key files and the join between them.
//
// Score file, Track 1:  <trial_id> <score>
// Score file, Track 2:  <enroll_id> <trial_id> <sasv> [<cm> <asv>]
// Key file,   Track 1:  <trial_id> <label> <attack> <codec> <quality>
// Key file,   Track 2:  <enroll_id> <trial_id> <label> <attack> <codec> <quality>
//
// Columns are whitespace separated; blank lines and lines starting with '#'
// are ignored. "-" marks an absent attack or quality, "none" an absent codec.
// See docs/formats.md for the full description.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asv5::trialdata {

enum class Track { kOne = 1, kTwo = 2 };

std::string_view TrackName(Track track);

// Opaque, non-empty, whitespace-free trial token.
class TrialId {
 public:
  explicit TrialId(std::string value);

  const std::string &str() const { return value_; }

  friend auto operator<=>(const TrialId &, const TrialId &) = default;

 private:
  std::string value_;
};

enum class CmLabel { kBonafide, kSpoof };
enum class SasvLabel { kTarget, kNontarget, kSpoof };

std::string_view LabelName(CmLabel label);
std::string_view LabelName(SasvLabel label);

inline constexpr std::string_view kNoAttack = "-";
inline constexpr std::string_view kNoCodec = "none";
inline constexpr std::string_view kNoQuality = "-";

struct Condition {
  std::optional<std::string> attack;
  std::optional<std::string> codec;
  std::optional<int> quality;  // 1..5, present iff codec is

  friend bool operator==(const Condition &, const Condition &) = default;
  friend auto operator<=>(const Condition &, const Condition &) = default;
};

struct Track1Key {
  TrialId trial;
  CmLabel label;
  Condition condition;
};

struct Track2Key {
  std::string enroll;
  TrialId trial;
  SasvLabel label;
  Condition condition;
};

struct ScoreRecord {
  std::optional<std::string> enroll;  // Track 2 only
  TrialId trial;
  double score;  // CM score (Track 1) or SASV score (Track 2)
  std::optional<double> cm;
  std::optional<double> asv;

  bool has_triplet() const { return cm.has_value(); }
};

struct ScoreSet {
  Track track = Track::kOne;
  std::vector<ScoreRecord> records;

  // True iff every record carries cm and asv scores. Parsing guarantees
  // that either all or none do.
  bool has_triplets() const {
    return !records.empty() && records.front().has_triplet();
  }
};

// `source` names the stream in error messages (usually the file path).
ScoreSet ParseScores(std::istream &in, Track track, std::string_view source);
ScoreSet ParseScoresFile(const std::filesystem::path &path, Track track);

std::vector<Track1Key> ParseTrack1Keys(std::istream &in, std::string_view source);
std::vector<Track1Key> ParseTrack1KeysFile(const std::filesystem::path &path);
std::vector<Track2Key> ParseTrack2Keys(std::istream &in, std::string_view source);
std::vector<Track2Key> ParseTrack2KeysFile(const std::filesystem::path &path);

// Canonical writers: single-space separators, shortest round-trip number
// formatting, no comments.
void WriteScores(std::ostream &out, const ScoreSet &scores);
void WriteKeys(std::ostream &out, std::span<const Track1Key> keys);
void WriteKeys(std::ostream &out, std::span<const Track2Key> keys);

std::string FormatNumber(double value);

enum class JoinMode { kStrict, kPermissive };

template <class Key>
struct JoinedTrial {
  Key key;
  ScoreRecord score;
};

template <class Key>
struct JoinedTrialSet {
  using Label = decltype(Key::label);

  // Canonical order: by trial id, then enrollment id.
  std::vector<JoinedTrial<Key>> trials;
  std::map<Label, std::size_t> counts;
  // Keys without a score (permissive mode only).
  std::vector<std::string> warnings;

  std::size_t count(Label label) const {
    auto it = counts.find(label);
    return it == counts.end() ? 0 : it->second;
  }
  bool has_triplets() const {
    return !trials.empty() && trials.front().score.has_triplet();
  }
};

using Track1Set = JoinedTrialSet<Track1Key>;
using Track2Set = JoinedTrialSet<Track2Key>;

Track1Set Join(const ScoreSet &scores, std::span<const Track1Key> keys,
               JoinMode mode = JoinMode::kStrict);
Track2Set Join(const ScoreSet &scores, std::span<const Track2Key> keys,
               JoinMode mode = JoinMode::kStrict);

// Throws EmptyClass unless every listed label has at least one trial.
void RequireClasses(const Track1Set &set, std::span<const CmLabel> labels);
void RequireClasses(const Track2Set &set, std::span<const SasvLabel> labels);

}  // namespace asv5::trialdata
