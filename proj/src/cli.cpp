#include "asv5/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asv5/analysis.hpp"
#include "asv5/calib.hpp"
#include "asv5/checksum.hpp"
#include "asv5/detmetrics.hpp"
#include "asv5/report.hpp"
#include "asv5/simgen.hpp"
#include "asv5/tandem.hpp"
#include "asv5/trialdata.hpp"

#ifndef ASV5_VERSION
#define ASV5_VERSION "0.0.0"
#endif

namespace asv5::cli {

namespace fs = std::filesystem;
using report::Json;
using report::Number;

int ExitCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return kExitUsage;
    case ErrorKind::kParse:
      return kExitParse;
    case ErrorKind::kProtocolMismatch:
      return kExitProtocol;
    case ErrorKind::kDegenerate:
      return kExitDegenerate;
  }
  return kExitInternal;
}

namespace {

struct Common {
  std::string out_dir = ".";
  std::string condition = "closed";
  bool table = false;
};

struct CmCostFlags {
  std::optional<double> beta;
  std::optional<double> c_miss;
  std::optional<double> c_fa;
  std::optional<double> pi_spoof;
};

struct SasvCostFlags {
  std::optional<double> alpha;
  std::optional<double> gamma;
  std::optional<double> c_miss;
  std::optional<double> c_fa_non;
  std::optional<double> c_fa_spoof;
  std::optional<double> pi_target;
  std::optional<double> pi_nontarget;
  std::optional<double> pi_spoof;
};

struct Track1Opts {
  std::string scores;
  std::string keys;
  std::string id;
  std::string eer = "rocch";
  bool permissive = false;
  CmCostFlags cost;
};

struct Track2Opts {
  std::string scores;
  std::string keys;
  std::string id;
  std::optional<double> asv_threshold;
  bool permissive = false;
  SasvCostFlags cost;
};

struct CalibrateOpts {
  std::string method;
  std::string scores;
  std::string keys;
  std::string dev_scores;
  std::string dev_keys;
  std::string calibration;
  CmCostFlags cost;
};

struct ApeOpts {
  std::string scores;
  std::string keys;
  std::string transform = "none";
  double c_miss = 1.0;
  double c_fa = 10.0;
  std::size_t grid_size = 199;
  double pi_min = 0.001;
  double pi_max = 0.999;
  bool svg = false;
};

struct BreakdownOpts {
  int track = 1;
  std::vector<std::string> submissions;
  std::string scores;
  std::string keys;
  std::vector<std::string> by{"attack"};
  std::string policy = "pool-bonafide";
  std::string groups;
  std::string median = "average";
  bool tandem = false;
  bool no_rollup = false;
  bool svg = false;
  CmCostFlags cm_cost;
  SasvCostFlags sasv_cost;
};

struct RankOpts {
  int track = 1;
  std::vector<std::string> submissions;
  std::vector<std::string> reports;
  std::string keys;
  bool permissive = false;
  CmCostFlags cm_cost;
  SasvCostFlags sasv_cost;
};

struct SimulateOpts {
  int track = 1;
  std::uint64_t seed = 1;
  std::vector<std::string> attacks;
  std::vector<std::string> conditions;
  std::size_t n_bona = 200;
  std::size_t n_nontarget = 200;
  std::size_t n_spoof = 100;
  std::size_t speakers = 10;
  double d_asv = 4.0;
  bool sasv_only = false;
  bool probability = false;
};

Error Usage(const std::string &msg) { return Error(ErrorCode::kInvalidArgument, msg); }

// Collects input checksums and written files for the report and manifest.
class RunContext {
 public:
  RunContext(std::string command, const Common &common)
      : command_(std::move(command)), dir_(common.out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw Error(ErrorCode::kIo, "cannot create output directory " + dir_.string());
    }
  }

  std::string AddInput(const std::string &role, const fs::path &path) {
    const std::string sha = Sha256File(path);
    Json j;
    j["file"] = path.filename().string();
    j["sha256"] = sha;
    inputs_[role] = j;
    full_paths_[role] = path.string();
    return sha;
  }

  const Json &inputs() const { return inputs_; }

  void Write(const std::string &name, const std::string &content) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + p.string());
    f << content;
    f.close();
    if (!f) throw Error(ErrorCode::kIo, "write failed for " + p.string());
    outputs_.push_back(name);
  }

  void WriteManifest(const std::vector<std::string> &argv, const std::string &config) {
    Json m;
    m["tool"] = "asv5eval";
    m["version"] = ASV5_VERSION;
    m["command"] = command_;
    m["argv"] = argv;
    m["config"] = config;
    Json in = inputs_;
    for (auto &[role, j] : in.items()) j["path"] = full_paths_[role];
    m["inputs"] = in;
    m["outputs"] = outputs_;
    m["created_utc"] = Timestamp();
    Write("manifest.json", report::Dump(m));
  }

 private:
  static std::string Timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  fs::path dir_;
  Json inputs_ = Json::object();
  std::map<std::string, std::string> full_paths_;
  std::vector<std::string> outputs_;
};

void AddCmCostOptions(CLI::App *sub, CmCostFlags &f) {
  auto *beta = sub->add_option("--beta", f.beta, "Normalized miss weight (default 1.9)");
  auto *cm = sub->add_option("--c-miss", f.c_miss, "Cost of a bona fide miss");
  auto *cf = sub->add_option("--c-fa", f.c_fa, "Cost of a spoof false alarm");
  auto *pi = sub->add_option("--pi-spoof", f.pi_spoof, "Spoof prior");
  beta->excludes(cm)->excludes(cf)->excludes(pi);
}

void AddSasvCostOptions(CLI::App *sub, SasvCostFlags &f) {
  sub->add_option("--alpha", f.alpha, "a-DCF miss weight (default 1.58)");
  sub->add_option("--gamma", f.gamma, "a-DCF spoof share of false alarms (default 0.84)");
  sub->add_option("--c-miss", f.c_miss, "Cost of a target miss");
  sub->add_option("--c-fa-nontarget", f.c_fa_non, "Cost of a nontarget false alarm");
  sub->add_option("--c-fa-spoof", f.c_fa_spoof, "Cost of a spoof false alarm");
  sub->add_option("--pi-target", f.pi_target, "Target prior");
  sub->add_option("--pi-nontarget", f.pi_nontarget, "Nontarget prior");
  sub->add_option("--pi-spoof", f.pi_spoof, "Spoof prior");
}

det::CostConfig ResolveCm(const CmCostFlags &f) {
  const int given = f.c_miss.has_value() + f.c_fa.has_value() + f.pi_spoof.has_value();
  if (given == 0) return f.beta ? det::CostConfig::FromBeta(*f.beta) : det::CostConfig();
  if (given != 3) throw Usage("--c-miss, --c-fa and --pi-spoof must be given together");
  return det::CostConfig::FromCosts(*f.c_miss, *f.c_fa, *f.pi_spoof);
}

tandem::SasvCostConfig ResolveSasv(const SasvCostFlags &f) {
  const int given = f.c_miss.has_value() + f.c_fa_non.has_value() + f.c_fa_spoof.has_value() +
                    f.pi_target.has_value() + f.pi_nontarget.has_value() +
                    f.pi_spoof.has_value();
  if (given == 0) {
    return tandem::SasvCostConfig::FromAlphaGamma(
        f.alpha.value_or(tandem::SasvCostConfig::kDefaultAlpha),
        f.gamma.value_or(tandem::SasvCostConfig::kDefaultGamma));
  }
  if (given != 6) throw Usage("all six cost and prior options must be given together");
  const tandem::SasvCostConfig::Costs c{*f.c_miss,    *f.c_fa_non,    *f.c_fa_spoof,
                                        *f.pi_target, *f.pi_nontarget, *f.pi_spoof};
  if (f.alpha.has_value() != f.gamma.has_value()) {
    throw Usage("--alpha and --gamma must be given together");
  }
  if (f.alpha) return tandem::SasvCostConfig::FromCostsChecked(c, *f.alpha, *f.gamma);
  return tandem::SasvCostConfig::FromCosts(c);
}

det::EerMethod ResolveEer(const std::string &name) {
  return name == "nearest" ? det::EerMethod::kNearestCrossing : det::EerMethod::kRocch;
}

std::string EerName(det::EerMethod m) {
  return m == det::EerMethod::kRocch ? "rocch" : "nearest";
}

trialdata::JoinMode ResolveJoin(bool permissive) {
  return permissive ? trialdata::JoinMode::kPermissive : trialdata::JoinMode::kStrict;
}

std::string DefaultId(const std::string &id, const std::string &scores) {
  return id.empty() ? fs::path(scores).stem().string() : id;
}

std::string Fixed(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

Json AsvPolicyJson(const tandem::AsvThresholdPolicy &p) {
  Json j;
  if (p.kind == tandem::AsvThresholdPolicy::Kind::kEerPoint) {
    j["kind"] = "eer-point";
  } else {
    j["kind"] = "fixed";
    j["threshold"] = Number(p.threshold);
  }
  return j;
}

tandem::AsvThresholdPolicy ResolveAsvPolicy(const std::optional<double> &t) {
  return t ? tandem::AsvThresholdPolicy::Fixed(*t) : tandem::AsvThresholdPolicy::EerPoint();
}

std::pair<std::string, std::string> SplitSubmission(const std::string &spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) return {fs::path(spec).stem().string(), spec};
  if (eq == 0 || eq + 1 == spec.size()) throw Usage("expected ID=PATH, got '" + spec + "'");
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

// ---- track1-eval -----------------------------------------------------------

int Track1Eval(const Track1Opts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  const det::CostConfig cfg = ResolveCm(o.cost);
  const det::EerMethod eer = ResolveEer(o.eer);
  const ScoreSet scores = ParseScoresFile(o.scores, Track::kOne);
  const auto keys = ParseTrack1KeysFile(o.keys);
  ctx.AddInput("scores", o.scores);
  ctx.AddInput("keys", o.keys);
  const Track1Set set = Join(scores, keys, ResolveJoin(o.permissive));
  const CmLabel need[] = {CmLabel::kBonafide, CmLabel::kSpoof};
  RequireClasses(set, need);
  const auto split = analysis::SplitCm(set);
  const det::CmReport r = det::EvaluateCm(split.bona, split.spoof, cfg, eer);
  const std::string id = DefaultId(o.id, o.scores);

  Json j;
  j["track"] = 1;
  j["submission"] = id;
  j["condition"] = c.condition;
  j["cost"] = report::ToJson(cfg);
  j["eer_method"] = EerName(eer);
  j["join"] = o.permissive ? "permissive" : "strict";
  j["inputs"] = ctx.inputs();
  j["trial_set_sha256"] = analysis::TrialSetChecksum(set);
  j["counts"] = {{"bonafide", split.bona.size()}, {"spoof", split.spoof.size()}};
  j["warnings"] = set.warnings;
  j["metrics"] = report::ToJson(r);
  ctx.Write("track1_report.json", report::Dump(j));

  if (c.table) {
    out << report::FormatTable({{"submission", "min_dcf", "act_dcf", "cllr", "eer"},
                                {id, Fixed(r.min_dcf), Fixed(r.act_dcf), Fixed(r.cllr),
                                 Fixed(r.eer)}});
  } else {
    out << id << ": min_dcf=" << Fixed(r.min_dcf) << " act_dcf=" << Fixed(r.act_dcf)
        << " cllr=" << Fixed(r.cllr) << " eer=" << Fixed(r.eer) << '\n';
  }
  return kExitOk;
}

// ---- track2-eval -----------------------------------------------------------

int Track2Eval(const Track2Opts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  const tandem::SasvCostConfig cfg = ResolveSasv(o.cost);
  const tandem::AsvThresholdPolicy policy = ResolveAsvPolicy(o.asv_threshold);
  const ScoreSet scores = ParseScoresFile(o.scores, Track::kTwo);
  const auto keys = ParseTrack2KeysFile(o.keys);
  ctx.AddInput("scores", o.scores);
  ctx.AddInput("keys", o.keys);
  const Track2Set set = Join(scores, keys, ResolveJoin(o.permissive));
  const SasvLabel need[] = {SasvLabel::kTarget, SasvLabel::kNontarget, SasvLabel::kSpoof};
  RequireClasses(set, need);
  const auto split = analysis::SplitSasv(set);
  std::optional<std::vector<tandem::TandemTrial>> trials;
  std::optional<std::span<const tandem::TandemTrial>> view;
  if (set.has_triplets()) {
    trials = analysis::TandemTrials(set);
    view = std::span<const tandem::TandemTrial>(*trials);
  }
  const tandem::SasvReport r = tandem::EvaluateSasv(split, view, cfg, policy);
  const std::string id = DefaultId(o.id, o.scores);

  Json j;
  j["track"] = 2;
  j["submission"] = id;
  j["condition"] = c.condition;
  j["cost"] = report::ToJson(cfg);
  j["asv_threshold_policy"] = AsvPolicyJson(policy);
  j["join"] = o.permissive ? "permissive" : "strict";
  j["inputs"] = ctx.inputs();
  j["trial_set_sha256"] = analysis::TrialSetChecksum(set);
  j["counts"] = {{"target", split.target.size()},
                 {"nontarget", split.nontarget.size()},
                 {"spoof", split.spoof.size()}};
  j["warnings"] = set.warnings;
  j["metrics"] = report::ToJson(r);
  ctx.Write("track2_report.json", report::Dump(j));

  auto opt = [](const std::optional<double> &v) { return v ? Fixed(*v) : std::string("-"); };
  if (c.table) {
    out << report::FormatTable({{"submission", "min_a_dcf", "t_dcf", "t_eer"},
                                {id, Fixed(r.min_a_dcf), opt(r.t_dcf), opt(r.t_eer)}});
  } else {
    out << id << ": min_a_dcf=" << Fixed(r.min_a_dcf);
    if (r.t_dcf) out << " t_dcf=" << Fixed(*r.t_dcf) << " t_eer=" << Fixed(*r.t_eer);
    out << '\n';
  }
  return kExitOk;
}

// ---- calibrate -------------------------------------------------------------

trialdata::ScoreSet MapScores(const trialdata::ScoreSet &in,
                              const std::function<double(double)> &f) {
  trialdata::ScoreSet outset = in;
  for (auto &r : outset.records) r.score = f(r.score);
  return outset;
}

std::optional<analysis::CmScores> LabelledScores(const trialdata::ScoreSet &scores,
                                                  const std::string &keys_path) {
  if (keys_path.empty()) return std::nullopt;
  const auto keys = trialdata::ParseTrack1KeysFile(keys_path);
  const auto set = trialdata::Join(scores, keys);
  const trialdata::CmLabel need[] = {trialdata::CmLabel::kBonafide, trialdata::CmLabel::kSpoof};
  trialdata::RequireClasses(set, need);
  return analysis::SplitCm(set);
}

int Calibrate(const CalibrateOpts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  const det::CostConfig cfg = ResolveCm(o.cost);
  const ScoreSet scores = ParseScoresFile(o.scores, Track::kOne);
  ctx.AddInput("scores", o.scores);
  if (!o.keys.empty()) ctx.AddInput("keys", o.keys);
  const auto eval = LabelledScores(scores, o.keys);

  Json j;
  j["method"] = o.method;
  j["condition"] = c.condition;
  j["cost"] = report::ToJson(cfg);
  ScoreSet calibrated;
  std::string summary;

  if (o.method == "affine") {
    if (o.dev_scores.empty() || o.dev_keys.empty()) {
      throw Usage("affine calibration needs --dev-scores and --dev-keys");
    }
    const ScoreSet dev_scores = ParseScoresFile(o.dev_scores, Track::kOne);
    ctx.AddInput("dev_scores", o.dev_scores);
    ctx.AddInput("dev_keys", o.dev_keys);
    const auto dev = *LabelledScores(dev_scores, o.dev_keys);
    const auto cal = calib::FitAffine(dev.bona, dev.spoof);
    j["calibration"] = report::ToJson(cal);
    calibrated = MapScores(scores, [&](double s) { return cal(s); });
    summary = "scale=" + Fixed(cal.scale) + " offset=" + Fixed(cal.offset) +
              " dev_cllr=" + Fixed(cal.training.initial_objective) + "->" +
              Fixed(cal.training.final_objective);
  } else if (o.method == "load") {
    if (o.calibration.empty()) throw Usage("--method load needs --calibration");
    std::ifstream f(o.calibration);
    if (!f) throw Error(ErrorCode::kIo, "cannot open " + o.calibration);
    ctx.AddInput("calibration", o.calibration);
    Json loaded;
    try {
      loaded = Json::parse(f);
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kMalformedKey, o.calibration + ": " + e.what());
    }
    const Json &body = loaded.contains("calibration") ? loaded["calibration"] : loaded;
    const auto cal = report::AffineFromJson(body);
    j["calibration"] = {{"method", "affine"},
                        {"scale", Number(cal.scale)},
                        {"offset", Number(cal.offset)}};
    calibrated = MapScores(scores, [&](double s) { return cal(s); });
    summary = "scale=" + Fixed(cal.scale) + " offset=" + Fixed(cal.offset);
  } else if (o.method == "logit") {
    std::size_t clamped = 0;
    calibrated = MapScores(scores, [&](double s) {
      if (s == 0.0 || s == 1.0) ++clamped;
      return calib::Logit(s);
    });
    j["calibration"] = {{"method", "logit"},
                        {"clamp", Number(calib::kDefaultClampLlr)},
                        {"clamped", clamped}};
    summary = "clamped=" + std::to_string(clamped);
  } else {  // pav
    if (!eval) throw Usage("oracle PAV calibration needs --keys");
    const auto map = calib::PavCalibrate(eval->bona, eval->spoof);
    j["calibration"] = report::ToJson(map);
    calibrated = MapScores(scores, [&](double s) { return map(s); });
    summary = "blocks=" + std::to_string(map.size());
  }
  j["inputs"] = ctx.inputs();

  if (eval) {
    const auto after = *LabelledScores(calibrated, o.keys);
    const auto before_r = det::EvaluateCm(eval->bona, eval->spoof, cfg);
    const auto after_r = det::EvaluateCm(after.bona, after.spoof, cfg);
    j["eval"] = {{"before", report::ToJson(before_r)}, {"after", report::ToJson(after_r)}};
    summary += " act_dcf=" + Fixed(before_r.act_dcf) + "->" + Fixed(after_r.act_dcf) +
               " cllr=" + Fixed(before_r.cllr) + "->" + Fixed(after_r.cllr);
  }

  std::ostringstream s;
  WriteScores(s, calibrated);
  ctx.Write("calibrated_scores.txt", s.str());
  ctx.Write("calibration.json", report::Dump(j));
  out << o.method << ": " << summary << '\n';
  return kExitOk;
}

// ---- ape-curve -------------------------------------------------------------

int ApeCurve(const ApeOpts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  const ScoreSet scores = ParseScoresFile(o.scores, Track::kOne);
  ctx.AddInput("scores", o.scores);
  ctx.AddInput("keys", o.keys);
  auto split = *LabelledScores(scores, o.keys);
  if (o.transform == "logit") {
    split.bona = calib::LogitAll(split.bona).scores;
    split.spoof = calib::LogitAll(split.spoof).scores;
  } else if (o.transform == "pav") {
    const auto map = calib::PavCalibrate(split.bona, split.spoof);
    split.bona = map.Apply(split.bona);
    split.spoof = map.Apply(split.spoof);
  }
  const calib::CostBasis basis{o.c_miss, o.c_fa};
  const auto grid = calib::PriorGrid(o.grid_size, o.pi_min, o.pi_max);
  const calib::ApeCurve curve = calib::ApeSweep(split.bona, split.spoof, basis, grid);

  std::ostringstream csv;
  report::WriteApeCsv(csv, curve);
  ctx.Write("ape.csv", csv.str());
  if (o.svg) ctx.Write("ape.svg", report::ApeSvg(curve));

  std::size_t saturated = 0;
  for (const auto &p : curve.points) saturated += p.norm_act_dcf >= p.dummy_bound ? 1 : 0;
  Json j;
  j["condition"] = c.condition;
  j["cost_basis"] = {{"c_miss", Number(o.c_miss)}, {"c_fa", Number(o.c_fa)}};
  j["transform"] = o.transform;
  j["grid"] = {{"size", o.grid_size}, {"pi_min", Number(o.pi_min)}, {"pi_max", Number(o.pi_max)}};
  j["inputs"] = ctx.inputs();
  j["saturated_points"] = saturated;
  ctx.Write("ape.json", report::Dump(j));
  out << "ape-curve: " << curve.points.size() << " priors, " << saturated
      << " at or above the dummy bound\n";
  return kExitOk;
}

// ---- breakdown -------------------------------------------------------------

std::vector<analysis::Selector> Slices(const auto &set, const std::vector<std::string> &axes,
                                       const analysis::AttackGroupMap &groups) {
  std::vector<analysis::Selector> out;
  for (const auto &name : axes) {
    const auto axis = analysis::ParseAxis(name);
    if (!axis) throw Usage("unknown slice axis '" + name + "'");
    auto s = analysis::EnumerateSlices(set, *axis, groups);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

struct SubmissionResult {
  std::string id;
  std::string checksum;
  double overall;
  std::vector<analysis::Selector> selectors;
  std::vector<analysis::SliceReport> slices;
};

int Breakdown(const BreakdownOpts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  if (o.track != 1 && o.track != 2) throw Usage("--track must be 1 or 2");
  const auto policy = *analysis::ParsePolicy(o.policy);
  const auto median = o.median == "lower" ? analysis::MedianConvention::kLowerMiddle
                                          : analysis::MedianConvention::kAverageMiddle;
  analysis::AttackGroupMap groups = analysis::AttackGroupMap::Default();
  if (!o.groups.empty()) {
    groups = analysis::AttackGroupMap::ParseFile(o.groups);
    ctx.AddInput("groups", o.groups);
  }
  std::vector<std::pair<std::string, std::string>> subs;
  for (const auto &s : o.submissions) subs.push_back(SplitSubmission(s));
  if (!o.scores.empty()) subs.emplace_back(fs::path(o.scores).stem().string(), o.scores);
  if (subs.empty()) throw Usage("breakdown needs --scores or --submission");
  ctx.AddInput("keys", o.keys);

  const det::CostConfig cm_cfg = ResolveCm(o.cm_cost);
  const tandem::SasvCostConfig sasv_cfg = ResolveSasv(o.sasv_cost);
  const analysis::Selector all[] = {analysis::Selector::All()};

  std::vector<SubmissionResult> results;
  if (o.track == 1) {
    const auto keys = ParseTrack1KeysFile(o.keys);
    for (const auto &[id, path] : subs) {
      const Track1Set set = Join(ParseScoresFile(path, Track::kOne), keys);
      ctx.AddInput("scores:" + id, path);
      const auto sel = Slices(set, o.by, groups);
      const double overall =
          analysis::SliceMetrics(set, all, policy, groups, cm_cfg).front().primary();
      results.push_back({id, analysis::TrialSetChecksum(set), overall, sel,
                         analysis::SliceMetrics(set, sel, policy, groups, cm_cfg)});
    }
  } else {
    const auto keys = ParseTrack2KeysFile(o.keys);
    for (const auto &[id, path] : subs) {
      const Track2Set set = Join(ParseScoresFile(path, Track::kTwo), keys);
      ctx.AddInput("scores:" + id, path);
      const auto sel = Slices(set, o.by, groups);
      const double overall =
          analysis::SliceMetrics(set, all, policy, groups, sasv_cfg, false).front().primary();
      results.push_back({id, analysis::TrialSetChecksum(set), overall, sel,
                         analysis::SliceMetrics(set, sel, policy, groups, sasv_cfg, o.tandem)});
    }
  }

  std::map<std::string, analysis::SliceAggregate> aggregates;
  if (results.size() >= 2) {
    std::vector<analysis::SubmissionSlices> per;
    for (const auto &r : results) {
      analysis::SubmissionSlices s{r.id, r.overall, {}};
      for (const auto &sl : r.slices) s.slices[sl.slice] = sl.primary();
      per.push_back(std::move(s));
    }
    aggregates = analysis::MedianTopHalf(per, median);
  }

  // Per-attack values feeding the group roll-up: the submission's own value,
  // or the top-half median when several submissions are given.
  std::optional<std::vector<analysis::GroupRollup>> rollup;
  const bool by_attack =
      std::find(o.by.begin(), o.by.end(), "attack") != o.by.end();
  if (by_attack && !o.no_rollup) {
    std::map<std::string, double> per_attack;
    const auto &first = results.front();
    for (std::size_t i = 0; i < first.selectors.size(); ++i) {
      const auto &sel = first.selectors[i];
      if (sel.kind != analysis::Selector::Kind::kAttack) continue;
      per_attack[sel.attack] = results.size() >= 2 ? aggregates.at(first.slices[i].slice).median
                                                   : first.slices[i].primary();
    }
    rollup = analysis::RollupGroups(per_attack, groups);
  }

  const std::string metric = o.track == 1 ? "min_dcf" : "min_a_dcf";
  Json j;
  j["track"] = o.track;
  j["condition"] = c.condition;
  j["policy"] = std::string(analysis::PolicyName(policy));
  j["cost"] = o.track == 1 ? report::ToJson(cm_cfg) : report::ToJson(sasv_cfg);
  j["median_convention"] = median == analysis::MedianConvention::kLowerMiddle ? "lower" : "average";
  j["inputs"] = ctx.inputs();
  Json gm = Json::object();
  for (const auto &[a, g] : groups.entries()) gm[a] = std::string(analysis::GroupName(g));
  j["attack_groups"] = gm;
  Json subs_j = Json::array();
  std::ostringstream csv;
  csv << "submission,";
  {
    std::ostringstream body;
    report::WriteBreakdownCsv(body, {});
    csv << body.str();
  }
  for (const auto &r : results) {
    Json s;
    s["id"] = r.id;
    s["trial_set_sha256"] = r.checksum;
    s["overall_" + metric] = Number(r.overall);
    Json sl = Json::array();
    for (const auto &x : r.slices) sl.push_back(report::ToJson(x));
    s["slices"] = sl;
    subs_j.push_back(s);
    std::ostringstream body;
    report::WriteBreakdownCsv(body, r.slices);
    std::istringstream lines(body.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) csv << r.id << ',' << line << '\n';
  }
  j["submissions"] = subs_j;
  if (!aggregates.empty()) {
    Json a = Json::object();
    for (const auto &[slice, agg] : aggregates) {
      a[slice] = {{"cohort", agg.cohort},
                  {"median", Number(agg.median)},
                  {"min", Number(agg.box.min)},
                  {"q1", Number(agg.box.q1)},
                  {"q3", Number(agg.box.q3)},
                  {"max", Number(agg.box.max)}};
    }
    j["top_half"] = a;
  }
  if (rollup) {
    Json g = Json::array();
    for (const auto &r : *rollup) {
      Json v = Json::object();
      for (const auto &[attack, val] : r.values) v[attack] = Number(val);
      g.push_back({{"group", std::string(analysis::GroupName(r.group))},
                   {"values", v},
                   {"easiest", r.easiest},
                   {"hardest", r.hardest}});
    }
    j["groups"] = g;
  }
  ctx.Write("breakdown.csv", csv.str());
  ctx.Write("breakdown.json", report::Dump(j));
  if (!aggregates.empty()) {
    std::ostringstream q;
    report::WriteQuantileCsv(q, aggregates);
    ctx.Write("quantiles.csv", q.str());
    if (o.svg) ctx.Write("boxplot.svg", report::BoxplotSvg(aggregates, metric + ", top 50%"));
  }

  if (c.table) {
    std::vector<std::vector<std::string>> rows{{"submission", "slice", metric, "n_bona", "n_spoof"}};
    for (const auto &r : results) {
      for (const auto &s : r.slices) {
        rows.push_back({r.id, s.slice, Fixed(s.primary()), std::to_string(s.n_bona),
                        std::to_string(s.n_spoof)});
      }
    }
    out << report::FormatTable(rows);
  } else {
    for (const auto &r : results) {
      out << r.id << ": " << r.slices.size() << " slices, overall " << metric << '='
          << Fixed(r.overall) << '\n';
    }
  }
  return kExitOk;
}

// ---- rank ------------------------------------------------------------------

analysis::Submission FromReport(const std::string &path, int &track) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformedScore, path + ": " + e.what());
  }
  try {
    const int t = j.at("track").get<int>();
    if (track != 0 && t != track) {
      throw Error(ErrorCode::kTrackMismatch, path + " is a Track " + std::to_string(t) +
                                                 " report; expected Track " +
                                                 std::to_string(track));
    }
    track = t;
    const Json &m = j.at("metrics");
    analysis::Submission s{j.at("submission").get<std::string>(),
                           j.at("trial_set_sha256").get<std::string>(),
                           report::ToDouble(m.at(t == 1 ? "min_dcf" : "min_a_dcf")),
                           {}};
    const std::vector<std::string> secondary =
        t == 1 ? std::vector<std::string>{"act_dcf", "cllr", "eer"}
               : std::vector<std::string>{"t_dcf", "t_eer"};
    for (const auto &k : secondary) {
      if (m.contains(k)) s.secondary[k] = report::ToDouble(m.at(k));
    }
    return s;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kMalformedScore, path + ": not a track report (" + e.what() + ")");
  }
}

int RankCmd(const RankOpts &o, const Common &c, RunContext &ctx, std::ostream &out) {
  using namespace trialdata;
  std::vector<analysis::Submission> subs;
  int track = 0;
  if (!o.reports.empty()) {
    if (!o.submissions.empty()) throw Usage("give either --report or --submission, not both");
    for (const auto &p : o.reports) {
      subs.push_back(FromReport(p, track));
      ctx.AddInput("report:" + subs.back().id, p);
    }
  } else {
    if (o.track != 1 && o.track != 2) throw Usage("--track must be 1 or 2");
    if (o.keys.empty()) throw Usage("--submission needs --keys");
    track = o.track;
    ctx.AddInput("keys", o.keys);
    const auto mode = ResolveJoin(o.permissive);
    if (track == 1) {
      const det::CostConfig cfg = ResolveCm(o.cm_cost);
      const auto keys = ParseTrack1KeysFile(o.keys);
      for (const auto &spec : o.submissions) {
        const auto [id, path] = SplitSubmission(spec);
        const Track1Set set = Join(ParseScoresFile(path, Track::kOne), keys, mode);
        ctx.AddInput("scores:" + id, path);
        const auto split = analysis::SplitCm(set);
        const CmLabel need[] = {CmLabel::kBonafide, CmLabel::kSpoof};
        RequireClasses(set, need);
        const auto r = det::EvaluateCm(split.bona, split.spoof, cfg);
        subs.push_back({id, analysis::TrialSetChecksum(set), r.min_dcf,
                        {{"act_dcf", r.act_dcf}, {"cllr", r.cllr}, {"eer", r.eer}}});
      }
    } else {
      const tandem::SasvCostConfig cfg = ResolveSasv(o.sasv_cost);
      const auto keys = ParseTrack2KeysFile(o.keys);
      for (const auto &spec : o.submissions) {
        const auto [id, path] = SplitSubmission(spec);
        const Track2Set set = Join(ParseScoresFile(path, Track::kTwo), keys, mode);
        ctx.AddInput("scores:" + id, path);
        const SasvLabel need[] = {SasvLabel::kTarget, SasvLabel::kNontarget, SasvLabel::kSpoof};
        RequireClasses(set, need);
        const auto split = analysis::SplitSasv(set);
        const auto r = tandem::EvaluateSasv(split, std::nullopt, cfg);
        subs.push_back({id, analysis::TrialSetChecksum(set), r.min_a_dcf, {}});
      }
    }
  }
  if (subs.empty()) throw Usage("rank needs --report or --submission");
  const auto board = analysis::Rank(std::move(subs), static_cast<Track>(track), c.condition);
  Json j = report::ToJson(board);
  j["inputs"] = ctx.inputs();
  ctx.Write("leaderboard.json", report::Dump(j));
  std::ostringstream csv;
  report::WriteLeaderboardCsv(csv, board);
  ctx.Write("leaderboard.csv", csv.str());

  if (c.table) {
    std::vector<std::vector<std::string>> rows{{"rank", "id", board.primary_metric}};
    for (const auto &e : board.entries) {
      rows.push_back({std::to_string(e.rank), e.submission.id, Fixed(e.submission.primary)});
    }
    out << report::FormatTable(rows);
  } else {
    for (const auto &e : board.entries) {
      out << e.rank << ' ' << e.submission.id << ' ' << board.primary_metric << '='
          << Fixed(e.submission.primary) << '\n';
    }
  }
  return kExitOk;
}

// ---- simulate --------------------------------------------------------------

double ParseReal(const std::string &s, const std::string &what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw Usage("bad number '" + s + "' in " + what);
  }
}

std::vector<std::string> SplitColon(const std::string &s) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream ss(s);
  while (std::getline(ss, part, ':')) parts.push_back(part);
  return parts;
}

int Simulate(const SimulateOpts &o, const Common &, RunContext &ctx, std::ostream &out) {
  sim::ChallengeConfig cfg;
  if (o.track != 1 && o.track != 2) throw Usage("--track must be 1 or 2");
  cfg.track = o.track == 1 ? trialdata::Track::kOne : trialdata::Track::kTwo;
  cfg.seed = o.seed;
  const std::vector<std::string> attacks =
      o.attacks.empty() ? std::vector<std::string>{"A17:3", "A18:1.5", "A19:1", "A26:2.5",
                                                   "A27:2"}
                        : o.attacks;
  for (const auto &a : attacks) {
    const auto p = SplitColon(a);
    if (p.size() != 2 || p[0].empty()) throw Usage("--attack expects ID:SEPARATION, got '" + a + "'");
    cfg.attacks.push_back({p[0], ParseReal(p[1], "--attack")});
  }
  if (!o.conditions.empty()) {
    cfg.conditions.clear();
    for (const auto &spec : o.conditions) {
      const auto p = SplitColon(spec);
      sim::ConditionSpec cs;
      if (p.size() == 2 && p[0] == trialdata::kNoCodec) {
        cs.factor = ParseReal(p[1], "--condition");
      } else if (p.size() == 3) {
        cs.codec = p[0];
        cs.quality = static_cast<int>(ParseReal(p[1], "--condition"));
        cs.factor = ParseReal(p[2], "--condition");
      } else {
        throw Usage("--condition expects CODEC:QUALITY:FACTOR or none:FACTOR, got '" + spec + "'");
      }
      cfg.conditions.push_back(cs);
    }
  }
  cfg.n_bona = o.n_bona;
  cfg.n_nontarget = o.n_nontarget;
  cfg.n_spoof = o.n_spoof;
  cfg.n_speakers = o.speakers;
  cfg.d_asv = o.d_asv;
  cfg.triplets = !o.sasv_only;
  cfg.scale = o.probability ? sim::ScoreScale::kProbability : sim::ScoreScale::kLlrLike;
  const sim::SyntheticChallenge ch = sim::GenerateChallenge(cfg);

  std::ostringstream scores;
  trialdata::WriteScores(scores, ch.scores);
  std::ostringstream keys;
  if (cfg.track == trialdata::Track::kOne) {
    trialdata::WriteKeys(keys, ch.track1_keys);
  } else {
    trialdata::WriteKeys(keys, ch.track2_keys);
  }
  ctx.Write("scores.txt", scores.str());
  ctx.Write("keys.txt", keys.str());

  Json model;
  model["track"] = o.track;
  model["seed"] = o.seed;
  model["generator"] = "mt19937_64, u = (bits >> 11) * 2^-53, Box-Muller cosine branch";
  model["scale"] = o.probability ? "probability" : "llr-like";
  Json conds = Json::array();
  for (const auto &cs : cfg.conditions) {
    Json cj;
    cj["codec"] = cs.codec.value_or(std::string(trialdata::kNoCodec));
    cj["quality"] = cs.quality ? Json(*cs.quality) : Json(nullptr);
    cj["factor"] = Number(cs.factor);
    Json per_attack = Json::object();
    for (const auto &a : cfg.attacks) {
      const double d = cs.factor * a.d_cm;
      per_attack[a.id] = {{"cm_separation", Number(d)},
                          {"analytic_cm_eer", Number(d >= 0.0 ? sim::AnalyticEer(d) : 0.5)}};
    }
    cj["attacks"] = per_attack;
    conds.push_back(cj);
  }
  model["conditions"] = conds;
  model["counts"] = {{"bonafide", ch.n_bonafide}, {"nontarget", ch.n_nontarget},
                     {"spoof", ch.n_spoof}};
  if (o.track == 2) {
    model["d_asv"] = Number(o.d_asv);
    model["speakers"] = o.speakers;
    model["triplets"] = !o.sasv_only;
  }
  ctx.Write("simulation.json", report::Dump(model));
  out << "simulate: track " << o.track << ", " << ch.scores.records.size() << " trials (seed "
      << o.seed << ")\n";
  return kExitOk;
}

}  // namespace

int Run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"ASVspoof 5 style evaluation: metrics, calibration, breakdowns and ranking",
               "asv5eval"};
  app.set_version_flag("--version", std::string("asv5eval ") + ASV5_VERSION);
  app.set_config("--config", "", "Read options from a TOML/INI file; flags override it");
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--out-dir,-o", common.out_dir, "Directory for reports and the manifest")
        ->capture_default_str();
    sub->add_option("--condition", common.condition, "Evaluation condition label")
        ->check(CLI::IsMember({"closed", "open"}))
        ->capture_default_str();
    sub->add_flag("--table", common.table, "Print a human-readable table");
  };

  Track1Opts t1;
  auto *s_t1 = app.add_subcommand("track1-eval", "CM metrics: minDCF, actDCF, Cllr, EER");
  s_t1->add_option("--scores", t1.scores, "Score file")->required();
  s_t1->add_option("--keys", t1.keys, "Key file")->required();
  s_t1->add_option("--id", t1.id, "Submission id (default: score file stem)");
  s_t1->add_option("--eer-method", t1.eer, "rocch or nearest")
      ->check(CLI::IsMember({"rocch", "nearest"}))
      ->capture_default_str();
  s_t1->add_flag("--permissive", t1.permissive, "Skip keys without scores (with a warning)");
  AddCmCostOptions(s_t1, t1.cost);
  add_common(s_t1);

  Track2Opts t2;
  auto *s_t2 = app.add_subcommand("track2-eval", "SASV metrics: min a-DCF, t-DCF, t-EER");
  s_t2->add_option("--scores", t2.scores, "Score file")->required();
  s_t2->add_option("--keys", t2.keys, "Key file")->required();
  s_t2->add_option("--id", t2.id, "Submission id (default: score file stem)");
  s_t2->add_option("--asv-threshold", t2.asv_threshold,
                   "Fixed ASV threshold for the t-DCF (default: ASV EER point)");
  s_t2->add_flag("--permissive", t2.permissive, "Skip keys without scores (with a warning)");
  AddSasvCostOptions(s_t2, t2.cost);
  add_common(s_t2);

  CalibrateOpts cal;
  auto *s_cal = app.add_subcommand("calibrate", "Calibrate Track 1 scores");
  s_cal->add_option("--method", cal.method, "affine, pav, logit or load")
      ->required()
      ->check(CLI::IsMember({"affine", "pav", "logit", "load"}));
  s_cal->add_option("--scores", cal.scores, "Scores to calibrate")->required();
  s_cal->add_option("--keys", cal.keys, "Keys for the scores (required for pav)");
  s_cal->add_option("--dev-scores", cal.dev_scores, "Training scores (affine)");
  s_cal->add_option("--dev-keys", cal.dev_keys, "Training keys (affine)");
  s_cal->add_option("--calibration", cal.calibration, "Saved calibration.json (load)");
  AddCmCostOptions(s_cal, cal.cost);
  add_common(s_cal);

  ApeOpts ape;
  auto *s_ape = app.add_subcommand("ape-curve", "Normalized DCF over a prior sweep");
  s_ape->add_option("--scores", ape.scores, "Score file")->required();
  s_ape->add_option("--keys", ape.keys, "Key file")->required();
  s_ape->add_option("--transform", ape.transform, "none, logit or pav (oracle)")
      ->check(CLI::IsMember({"none", "logit", "pav"}))
      ->capture_default_str();
  s_ape->add_option("--c-miss", ape.c_miss, "Miss cost")->capture_default_str();
  s_ape->add_option("--c-fa", ape.c_fa, "False alarm cost")->capture_default_str();
  s_ape->add_option("--grid-size", ape.grid_size, "Number of priors")->capture_default_str();
  s_ape->add_option("--pi-min", ape.pi_min, "Smallest spoof prior")->capture_default_str();
  s_ape->add_option("--pi-max", ape.pi_max, "Largest spoof prior")->capture_default_str();
  s_ape->add_flag("--svg", ape.svg, "Also write ape.svg");
  add_common(s_ape);

  BreakdownOpts bd;
  auto *s_bd = app.add_subcommand("breakdown", "Per-condition metrics and top-half medians");
  s_bd->add_option("--track", bd.track, "1 or 2")->capture_default_str();
  s_bd->add_option("--scores", bd.scores, "Score file of a single submission");
  s_bd->add_option("--submission", bd.submissions, "ID=PATH, repeatable");
  s_bd->add_option("--keys", bd.keys, "Key file")->required();
  s_bd->add_option("--by", bd.by, "attack, group, codec or codec-quality; repeatable")
      ->check(CLI::IsMember({"attack", "group", "codec", "codec-quality"}));
  s_bd->add_option("--policy", bd.policy, "Bona fide pairing: pool-bonafide or match-condition")
      ->check(CLI::IsMember({"pool-bonafide", "match-condition"}))
      ->capture_default_str();
  s_bd->add_option("--groups", bd.groups, "Attack group map file (default: built-in)");
  s_bd->add_option("--median", bd.median, "average or lower")
      ->check(CLI::IsMember({"average", "lower"}))
      ->capture_default_str();
  s_bd->add_flag("--tandem", bd.tandem, "Track 2: also t-DCF and t-EER per slice");
  s_bd->add_flag("--no-rollup", bd.no_rollup, "Skip the attack group roll-up");
  s_bd->add_flag("--svg", bd.svg, "Also write boxplot.svg (several submissions)");
  s_bd->add_option("--beta", bd.cm_cost.beta, "Track 1: normalized miss weight");
  s_bd->add_option("--alpha", bd.sasv_cost.alpha, "Track 2: a-DCF alpha");
  s_bd->add_option("--gamma", bd.sasv_cost.gamma, "Track 2: a-DCF gamma");
  add_common(s_bd);

  RankOpts rk;
  auto *s_rk = app.add_subcommand("rank", "Leaderboard over submissions");
  s_rk->add_option("--report", rk.reports, "track1/track2 report JSON, repeatable");
  s_rk->add_option("--submission", rk.submissions, "ID=PATH score file, repeatable");
  s_rk->add_option("--keys", rk.keys, "Key file (with --submission)");
  s_rk->add_option("--track", rk.track, "1 or 2 (with --submission)")->capture_default_str();
  s_rk->add_flag("--permissive", rk.permissive, "Skip keys without scores (with a warning)");
  s_rk->add_option("--beta", rk.cm_cost.beta, "Track 1: normalized miss weight");
  s_rk->add_option("--alpha", rk.sasv_cost.alpha, "Track 2: a-DCF alpha");
  s_rk->add_option("--gamma", rk.sasv_cost.gamma, "Track 2: a-DCF gamma");
  add_common(s_rk);

  SimulateOpts sm;
  auto *s_sm = app.add_subcommand("simulate", "Write a synthetic score and key file pair");
  s_sm->add_option("--track", sm.track, "1 or 2")->capture_default_str();
  s_sm->add_option("--seed", sm.seed, "RNG seed")->capture_default_str();
  s_sm->add_option("--attack", sm.attacks, "ID:SEPARATION, repeatable");
  s_sm->add_option("--condition-spec", sm.conditions,
                   "CODEC:QUALITY:FACTOR or none:FACTOR, repeatable");
  s_sm->add_option("--n-bona", sm.n_bona, "Bona fide (target) trials per condition")
      ->capture_default_str();
  s_sm->add_option("--n-nontarget", sm.n_nontarget, "Nontarget trials per condition")
      ->capture_default_str();
  s_sm->add_option("--n-spoof", sm.n_spoof, "Spoof trials per attack and condition")
      ->capture_default_str();
  s_sm->add_option("--speakers", sm.speakers, "Enrollment models (Track 2)")->capture_default_str();
  s_sm->add_option("--d-asv", sm.d_asv, "Target/nontarget ASV separation")->capture_default_str();
  s_sm->add_flag("--sasv-only", sm.sasv_only, "Track 2: omit cm and asv columns");
  s_sm->add_flag("--probability", sm.probability, "Squash scores into (0, 1)");
  add_common(s_sm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::vector<std::string> args(argv, argv + argc);
  try {
    auto run = [&](const char *name, auto &&fn) {
      RunContext ctx(name, common);
      const int code = fn(ctx);
      ctx.WriteManifest(args, app.get_subcommands().front()->config_to_str(true, false));
      return code;
    };
    if (*s_t1) return run("track1-eval", [&](RunContext &c) { return Track1Eval(t1, common, c, out); });
    if (*s_t2) return run("track2-eval", [&](RunContext &c) { return Track2Eval(t2, common, c, out); });
    if (*s_cal) return run("calibrate", [&](RunContext &c) { return Calibrate(cal, common, c, out); });
    if (*s_ape) return run("ape-curve", [&](RunContext &c) { return ApeCurve(ape, common, c, out); });
    if (*s_bd) return run("breakdown", [&](RunContext &c) { return Breakdown(bd, common, c, out); });
    if (*s_rk) return run("rank", [&](RunContext &c) { return RankCmd(rk, common, c, out); });
    if (*s_sm) return run("simulate", [&](RunContext &c) { return Simulate(sm, common, c, out); });
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return ExitCode(e.kind());
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace asv5::cli
