#include "asv5/simgen.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "asv5/error.hpp"

namespace asv5::sim {

namespace {

std::string TrialName(const char *prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%07zu", prefix, index);
  return buf;
}

double Squash(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double NormalStream::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::Normal() {
  const double u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

GaussianModel GaussianModel::Symmetric(double d, std::size_t n_bona,
                                       std::size_t n_spoof, std::uint64_t seed) {
  if (!(d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "separation must be >= 0");
  if (n_bona == 0 || n_spoof == 0) {
    throw Error(ErrorCode::kInvalidArgument, "class counts must be >= 1");
  }
  return {d / 2.0, -d / 2.0, n_bona, n_spoof, seed};
}

ClassScores Sample(const GaussianModel &model) {
  if (model.separation() < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "bona fide mean below spoof mean");
  }
  NormalStream rng(model.seed);
  ClassScores out;
  out.bona.reserve(model.n_bona);
  out.spoof.reserve(model.n_spoof);
  for (std::size_t i = 0; i < model.n_bona; ++i) out.bona.push_back(model.mu_bona + rng.Normal());
  for (std::size_t i = 0; i < model.n_spoof; ++i) out.spoof.push_back(model.mu_spoof + rng.Normal());
  return out;
}

ClassScores SampleLlr(const GaussianModel &model) {
  ClassScores s = Sample(model);
  const double d = model.separation();
  const double mid = 0.5 * (model.mu_bona + model.mu_spoof);
  for (double &x : s.bona) x = d * (x - mid);
  for (double &x : s.spoof) x = d * (x - mid);
  return s;
}

double AnalyticEer(double d) {
  if (!(d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "separation must be >= 0");
  return 0.5 * std::erfc(d / (2.0 * std::numbers::sqrt2));
}

std::vector<tandem::TandemTrial> SampleTandem(const TandemModel &model) {
  using trialdata::SasvLabel;
  NormalStream rng(model.seed);
  std::vector<tandem::TandemTrial> out;
  out.reserve(3 * model.n_per_class);
  const double a = model.d_asv / 2.0;
  const double c = model.d_cm / 2.0;
  auto draw = [&](double asv_mean, double cm_mean, SasvLabel label) {
    for (std::size_t i = 0; i < model.n_per_class; ++i) {
      const double asv = asv_mean + rng.Normal();
      const double cm = cm_mean + rng.Normal();
      out.push_back({asv, cm, label});
    }
  };
  draw(a, c, SasvLabel::kTarget);
  draw(-a, c, SasvLabel::kNontarget);
  draw(a, -c, SasvLabel::kSpoof);
  return out;
}

SyntheticChallenge GenerateChallenge(const ChallengeConfig &config) {
  using namespace trialdata;
  if (config.attacks.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one attack is required");
  }
  if (config.conditions.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one condition is required");
  }
  if (config.n_bona == 0 || config.n_spoof == 0 ||
      (config.track == Track::kTwo && (config.n_nontarget == 0 || config.n_speakers == 0))) {
    throw Error(ErrorCode::kInvalidArgument, "class counts must be >= 1");
  }
  for (const auto &c : config.conditions) {
    if (c.codec.has_value() != c.quality.has_value()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "a coded condition needs a quality level and vice versa");
    }
  }

  NormalStream rng(config.seed);
  SyntheticChallenge out;
  out.scores.track = config.track;
  std::size_t next_id = 0;
  const bool prob = config.scale == ScoreScale::kProbability;

  if (config.track == Track::kOne) {
    auto emit = [&](double mean, CmLabel label, const Condition &cond) {
      const double raw = mean + rng.Normal();
      TrialId id(TrialName("T1_", ++next_id));
      out.scores.records.push_back({std::nullopt, id, prob ? Squash(raw) : raw,
                                    std::nullopt, std::nullopt});
      out.track1_keys.push_back({id, label, cond});
    };
    for (const ConditionSpec &c : config.conditions) {
      const Condition bona_cond{std::nullopt, c.codec, c.quality};
      for (std::size_t i = 0; i < config.n_bona; ++i) {
        emit(c.factor, CmLabel::kBonafide, bona_cond);
      }
      out.n_bonafide += config.n_bona;
      for (const AttackSpec &a : config.attacks) {
        const Condition spoof_cond{a.id, c.codec, c.quality};
        for (std::size_t i = 0; i < config.n_spoof; ++i) {
          emit(c.factor * (1.0 - a.d_cm), CmLabel::kSpoof, spoof_cond);
        }
        out.n_spoof += config.n_spoof;
      }
    }
    return out;
  }

  std::size_t speaker = 0;
  auto emit = [&](double asv_mean, double cm_mean, SasvLabel label,
                  const Condition &cond) {
    const double asv = asv_mean + rng.Normal();
    const double cm = cm_mean + rng.Normal();
    const double sasv = asv + cm;
    std::string enroll = TrialName("spk", speaker++ % config.n_speakers);
    TrialId id(TrialName("T2_", ++next_id));
    ScoreRecord r{enroll, id, prob ? Squash(sasv) : sasv, std::nullopt, std::nullopt};
    if (config.triplets) {
      r.cm = cm;
      r.asv = asv;
    }
    out.scores.records.push_back(std::move(r));
    out.track2_keys.push_back({std::move(enroll), id, label, cond});
  };
  for (const ConditionSpec &c : config.conditions) {
    const double half_asv = c.factor * config.d_asv / 2.0;
    const Condition bona_cond{std::nullopt, c.codec, c.quality};
    for (std::size_t i = 0; i < config.n_bona; ++i) {
      emit(half_asv, c.factor, SasvLabel::kTarget, bona_cond);
    }
    for (std::size_t i = 0; i < config.n_nontarget; ++i) {
      emit(-half_asv, c.factor, SasvLabel::kNontarget, bona_cond);
    }
    out.n_bonafide += config.n_bona;
    out.n_nontarget += config.n_nontarget;
    for (const AttackSpec &a : config.attacks) {
      const Condition spoof_cond{a.id, c.codec, c.quality};
      for (std::size_t i = 0; i < config.n_spoof; ++i) {
        emit(half_asv, c.factor * (1.0 - a.d_cm), SasvLabel::kSpoof, spoof_cond);
      }
      out.n_spoof += config.n_spoof;
    }
  }
  return out;
}

}  // namespace asv5::sim
