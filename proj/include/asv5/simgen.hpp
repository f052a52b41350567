#pragma once

// Deterministic synthetic scores with analytic ground truth.
//
// Generator (frozen, documented in docs/simulation.md):
//   bits    std::mt19937_64 seeded with the 64-bit seed
//   uniform u = (bits >> 11) * 2^-53, in [0, 1)
//   normal  Box-Muller, cosine branch only:
//           z = sqrt(-2 ln(1 - u1)) * cos(2 pi u2)
// Every normal draw consumes exactly two 64-bit outputs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "asv5/tandem.hpp"
#include "asv5/trialdata.hpp"

namespace asv5::sim {

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double Uniform();
  double Normal();

 private:
  std::mt19937_64 engine_;
};

// Unit-variance Gaussian classes.
struct GaussianModel {
  double mu_bona = 1.0;
  double mu_spoof = -1.0;
  std::size_t n_bona = 1000;
  std::size_t n_spoof = 1000;
  std::uint64_t seed = 1;

  // Means +d/2 and -d/2.
  static GaussianModel Symmetric(double d, std::size_t n_bona, std::size_t n_spoof,
                                 std::uint64_t seed);

  double separation() const { return mu_bona - mu_spoof; }
};

struct ClassScores {
  std::vector<double> bona;
  std::vector<double> spoof;
};

// Bona fide draws first, then spoof draws, from one stream.
ClassScores Sample(const GaussianModel &model);

// Same draws mapped to their exact log-likelihood ratio under the model,
// d * (s - (mu_bona + mu_spoof) / 2): perfectly calibrated LLRs.
ClassScores SampleLlr(const GaussianModel &model);

// Phi(-d / 2) = erfc(d / (2 sqrt 2)) / 2.
double AnalyticEer(double d);

// Tandem population. Targets and spoofs share the high ASV mean (+d_asv/2),
// nontargets sit at -d_asv/2; bona fide trials (targets and nontargets) have
// CM mean +d_cm/2 and spoofs -d_cm/2.
struct TandemModel {
  double d_asv = 2.0;
  double d_cm = 2.0;
  std::size_t n_per_class = 1000;
  std::uint64_t seed = 1;
};

// Order: all targets, then nontargets, then spoofs; per trial the ASV draw
// precedes the CM draw.
std::vector<tandem::TandemTrial> SampleTandem(const TandemModel &model);

struct AttackSpec {
  std::string id;
  double d_cm = 2.0;  // CM separation from bona fide
};

struct ConditionSpec {
  std::optional<std::string> codec;  // nullopt = uncoded
  std::optional<int> quality;
  double factor = 1.0;  // multiplies every class separation
};

enum class ScoreScale { kLlrLike, kProbability };

struct ChallengeConfig {
  trialdata::Track track = trialdata::Track::kOne;
  std::uint64_t seed = 1;
  std::vector<AttackSpec> attacks;
  std::vector<ConditionSpec> conditions{ConditionSpec{}};
  std::size_t n_bona = 200;    // per condition (targets for Track 2)
  std::size_t n_nontarget = 200;  // per condition, Track 2
  std::size_t n_spoof = 100;   // per attack and condition
  double d_asv = 4.0;          // Track 2 target/nontarget separation
  bool triplets = true;        // Track 2: emit cm and asv columns
  std::size_t n_speakers = 10; // Track 2 enrollment models
  ScoreScale scale = ScoreScale::kLlrLike;
};

struct SyntheticChallenge {
  trialdata::ScoreSet scores;
  std::vector<trialdata::Track1Key> track1_keys;
  std::vector<trialdata::Track2Key> track2_keys;
  std::size_t n_bonafide = 0;  // Track 1 bona fide or Track 2 target
  std::size_t n_nontarget = 0;
  std::size_t n_spoof = 0;
};

SyntheticChallenge GenerateChallenge(const ChallengeConfig &config);

}  // namespace asv5::sim
