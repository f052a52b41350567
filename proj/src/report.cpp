#include "asv5/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "asv5/error.hpp"
#include "asv5/trialdata.hpp"

namespace asv5::report {

using trialdata::FormatNumber;

namespace {

std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return FormatNumber(v);
}

// Fixed precision for SVG coordinates so the files stay small and stable.
std::string Px(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

std::string Escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Json Number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return nullptr;
  return value;
}

double ToDouble(const Json &value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::kInvalidArgument, "expected a number, got " + value.dump());
}

Json ToJson(const det::CmReport &r) {
  Json j;
  j["min_dcf"] = Number(r.min_dcf);
  j["act_dcf"] = Number(r.act_dcf);
  j["cllr"] = Number(r.cllr);
  j["eer"] = Number(r.eer);
  j["tau_min"] = Number(r.tau_min);
  j["tau_bayes"] = Number(r.tau_bayes);
  return j;
}

Json ToJson(const tandem::SasvReport &r) {
  Json j;
  j["min_a_dcf"] = Number(r.min_a_dcf);
  j["tau_sasv"] = Number(r.tau_sasv);
  if (r.t_dcf) j["t_dcf"] = Number(*r.t_dcf);
  if (r.t_eer) j["t_eer"] = Number(*r.t_eer);
  if (r.tau_asv) j["tau_asv"] = Number(*r.tau_asv);
  if (r.tau_cm) j["tau_cm"] = Number(*r.tau_cm);
  return j;
}

Json ToJson(const det::CostConfig &cfg) {
  Json j;
  j["beta"] = Number(cfg.beta());
  if (cfg.derived()) {
    j["c_miss"] = Number(*cfg.c_miss());
    j["c_fa"] = Number(*cfg.c_fa());
    j["pi_spoof"] = Number(*cfg.pi_spf());
  }
  return j;
}

Json ToJson(const tandem::SasvCostConfig &cfg) {
  Json j;
  j["alpha"] = Number(cfg.alpha());
  j["gamma"] = Number(cfg.gamma());
  if (const auto &c = cfg.costs()) {
    j["c_miss"] = Number(c->c_miss);
    j["c_fa_nontarget"] = Number(c->c_fa_non);
    j["c_fa_spoof"] = Number(c->c_fa_spf);
    j["pi_target"] = Number(c->pi_tar);
    j["pi_nontarget"] = Number(c->pi_non);
    j["pi_spoof"] = Number(c->pi_spf);
  }
  return j;
}

Json ToJson(const calib::AffineCalibration &cal) {
  Json t;
  t["iterations"] = cal.training.iterations;
  t["initial_cllr"] = Number(cal.training.initial_objective);
  t["final_cllr"] = Number(cal.training.final_objective);
  t["gradient_norm"] = Number(cal.training.gradient_norm);
  t["converged"] = cal.training.converged;
  Json trace = Json::array();
  for (double v : cal.training.objective_trace) trace.push_back(Number(v));
  t["objective_trace"] = trace;
  Json j;
  j["method"] = "affine";
  j["scale"] = Number(cal.scale);
  j["offset"] = Number(cal.offset);
  j["training"] = t;
  return j;
}

Json ToJson(const calib::PavMapping &map) {
  Json blocks = Json::array();
  for (std::size_t k = 0; k < map.size(); ++k) {
    Json b;
    b["lower"] = Number(map.lower[k]);
    b["upper"] = Number(map.upper[k]);
    b["posterior"] = Number(map.posterior[k]);
    b["llr"] = Number(map.llr[k]);
    blocks.push_back(b);
  }
  Json j;
  j["method"] = "pav";
  j["prior_log_odds"] = Number(map.prior_log_odds);
  j["clamp"] = Number(map.clamp);
  j["blocks"] = blocks;
  return j;
}

Json ToJson(const analysis::SliceReport &r) {
  Json j;
  j["slice"] = r.slice;
  j["policy"] = std::string(analysis::PolicyName(r.policy));
  if (const auto *cm = std::get_if<det::CmReport>(&r.metrics)) {
    j["n_bonafide"] = r.n_bona;
    j["n_spoof"] = r.n_spoof;
    j["metrics"] = ToJson(*cm);
  } else {
    j["n_target"] = r.n_bona;
    j["n_nontarget"] = r.n_nontarget;
    j["n_spoof"] = r.n_spoof;
    j["metrics"] = ToJson(std::get<tandem::SasvReport>(r.metrics));
  }
  return j;
}

Json ToJson(const analysis::Leaderboard &board) {
  Json entries = Json::array();
  for (const auto &e : board.entries) {
    Json s;
    s["rank"] = e.rank;
    s["id"] = e.submission.id;
    s[board.primary_metric] = Number(e.submission.primary);
    Json sec;
    for (const auto &[k, v] : e.submission.secondary) sec[k] = Number(v);
    s["secondary"] = sec;
    entries.push_back(s);
  }
  Json j;
  j["track"] = static_cast<int>(board.track);
  j["condition"] = board.condition;
  j["primary_metric"] = board.primary_metric;
  j["trial_set_sha256"] =
      board.entries.empty() ? "" : board.entries.front().submission.trial_set_checksum;
  j["entries"] = entries;
  return j;
}

calib::AffineCalibration AffineFromJson(const Json &j) {
  if (!j.is_object() || !j.contains("method") || j["method"] != "affine" ||
      !j.contains("scale") || !j.contains("offset")) {
    throw Error(ErrorCode::kInvalidArgument, "not an affine calibration file");
  }
  calib::AffineCalibration cal;
  cal.scale = ToDouble(j["scale"]);
  cal.offset = ToDouble(j["offset"]);
  if (!std::isfinite(cal.scale) || !std::isfinite(cal.offset) || cal.scale <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "affine calibration needs finite offset and scale > 0");
  }
  return cal;
}

std::string Dump(const Json &j) { return j.dump(2) + "\n"; }

void WriteApeCsv(std::ostream &out, const calib::ApeCurve &curve) {
  out << "pi,beta,tau_bayes,norm_act_dcf,norm_min_dcf,dummy_bound,norm_act_dcf_clipped\n";
  for (const auto &p : curve.points) {
    out << Num(p.pi) << ',' << Num(p.beta) << ',' << Num(p.tau_bayes) << ','
        << Num(p.norm_act_dcf) << ',' << Num(p.norm_min_dcf) << ',' << Num(p.dummy_bound)
        << ',' << Num(p.norm_act_dcf_clipped()) << '\n';
  }
}

std::string ApeSvg(const calib::ApeCurve &curve) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (curve.points.empty()) {
    s << "</svg>\n";
    return s.str();
  }
  auto lo = [](double pi) { return std::log(pi / (1.0 - pi)); };
  const double x0 = lo(curve.points.front().pi);
  const double x1 = lo(curve.points.back().pi);
  double ymax = 0.0;
  for (const auto &p : curve.points) ymax = std::max(ymax, p.dummy_bound);
  ymax = ymax > 0.0 ? ymax * 1.05 : 1.0;
  auto X = [&](double pi) {
    const double span = x1 > x0 ? x1 - x0 : 1.0;
    return kLeft + (lo(pi) - x0) / span * (kW - kLeft - kRight);
  };
  auto Y = [&](double v) { return kH - kBottom - v / ymax * (kH - kTop - kBottom); };
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
    << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kH - kBottom << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 15
    << "\" text-anchor=\"middle\">logit(prior)</text>\n";
  s << "<text x=\"15\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 15 " << kH / 2
    << ")\" text-anchor=\"middle\">normalized DCF</text>\n";
  auto line = [&](const char *color, const char *dash, auto value) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\"";
    if (*dash) s << " stroke-dasharray=\"" << dash << "\"";
    s << " points=\"";
    for (const auto &p : curve.points) s << Px(X(p.pi)) << ',' << Px(Y(value(p))) << ' ';
    s << "\"/>\n";
  };
  line("gray", "4 3", [](const calib::ApePoint &p) { return p.dummy_bound; });
  line("red", "", [](const calib::ApePoint &p) { return p.norm_act_dcf_clipped(); });
  line("blue", "", [](const calib::ApePoint &p) { return p.norm_min_dcf; });
  s << "<text x=\"" << kW - 150 << "\" y=\"35\" fill=\"red\">actual (clipped)</text>\n";
  s << "<text x=\"" << kW - 150 << "\" y=\"50\" fill=\"blue\">minimum</text>\n";
  s << "<text x=\"" << kW - 150 << "\" y=\"65\" fill=\"gray\">dummy bound</text>\n";
  s << "</svg>\n";
  return s.str();
}

void WriteBreakdownCsv(std::ostream &out, std::span<const analysis::SliceReport> slices) {
  out << "slice,metric,value,n_bona,n_spoof,policy,n_nontarget\n";
  for (const auto &r : slices) {
    const Json m = std::holds_alternative<det::CmReport>(r.metrics)
                       ? ToJson(std::get<det::CmReport>(r.metrics))
                       : ToJson(std::get<tandem::SasvReport>(r.metrics));
    for (const auto &[name, v] : m.items()) {
      out << r.slice << ',' << name << ',' << Num(ToDouble(v)) << ',' << r.n_bona << ','
          << r.n_spoof << ',' << analysis::PolicyName(r.policy) << ',' << r.n_nontarget
          << '\n';
    }
  }
}

void WriteQuantileCsv(std::ostream &out,
                      const std::map<std::string, analysis::SliceAggregate> &aggregates) {
  out << "slice,n,min,q1,median,q3,max\n";
  for (const auto &[slice, a] : aggregates) {
    out << slice << ',' << a.cohort.size() << ',' << Num(a.box.min) << ',' << Num(a.box.q1)
        << ',' << Num(a.box.median) << ',' << Num(a.box.q3) << ',' << Num(a.box.max) << '\n';
  }
}

std::string BoxplotSvg(const std::map<std::string, analysis::SliceAggregate> &aggregates,
                       const std::string &title) {
  constexpr double kSlot = 48, kLeft = 60, kTop = 30, kPlot = 300, kBottom = 110;
  const double width = kLeft + kSlot * static_cast<double>(std::max<std::size_t>(aggregates.size(), 1)) + 20;
  const double height = kTop + kPlot + kBottom;
  double ymax = 0.0;
  for (const auto &[slice, a] : aggregates) ymax = std::max(ymax, a.box.max);
  ymax = ymax > 0.0 ? ymax * 1.05 : 1.0;
  auto Y = [&](double v) { return kTop + kPlot - v / ymax * kPlot; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Px(width) << "\" height=\""
    << Px(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << Px(width / 2) << "\" y=\"18\" text-anchor=\"middle\">" << Escape(title)
    << "</text>\n";
  s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kTop + kPlot << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ymax * t / 4.0;
    s << "<text x=\"" << kLeft - 5 << "\" y=\"" << Px(Y(v) + 4)
      << "\" text-anchor=\"end\">" << Px(v) << "</text>\n";
  }
  std::size_t i = 0;
  for (const auto &[slice, a] : aggregates) {
    const double cx = kLeft + kSlot * (static_cast<double>(i) + 0.5);
    const double half = kSlot * 0.3;
    s << "<line x1=\"" << Px(cx) << "\" y1=\"" << Px(Y(a.box.min)) << "\" x2=\"" << Px(cx)
      << "\" y2=\"" << Px(Y(a.box.max)) << "\" stroke=\"black\"/>\n";
    s << "<rect x=\"" << Px(cx - half) << "\" y=\"" << Px(Y(a.box.q3)) << "\" width=\""
      << Px(2 * half) << "\" height=\"" << Px(std::max(Y(a.box.q1) - Y(a.box.q3), 0.5))
      << "\" fill=\"lightsteelblue\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << Px(cx - half) << "\" y1=\"" << Px(Y(a.box.median)) << "\" x2=\""
      << Px(cx + half) << "\" y2=\"" << Px(Y(a.box.median))
      << "\" stroke=\"darkred\" stroke-width=\"2\"/>\n";
    const double ly = kTop + kPlot + 10;
    s << "<text x=\"" << Px(cx) << "\" y=\"" << Px(ly) << "\" transform=\"rotate(60 "
      << Px(cx) << ' ' << Px(ly) << ")\">" << Escape(slice) << "</text>\n";
    ++i;
  }
  s << "</svg>\n";
  return s.str();
}

void WriteLeaderboardCsv(std::ostream &out, const analysis::Leaderboard &board) {
  std::vector<std::string> secondary;
  if (!board.entries.empty()) {
    for (const auto &[k, v] : board.entries.front().submission.secondary) secondary.push_back(k);
  }
  out << "rank,id," << board.primary_metric;
  for (const auto &k : secondary) out << ',' << k;
  out << '\n';
  for (const auto &e : board.entries) {
    out << e.rank << ',' << e.submission.id << ',' << Num(e.submission.primary);
    for (const auto &k : secondary) {
      auto it = e.submission.secondary.find(k);
      out << ',' << (it == e.submission.secondary.end() ? "" : Num(it->second));
    }
    out << '\n';
  }
}

std::string FormatTable(const std::vector<std::vector<std::string>> &rows) {
  std::vector<std::size_t> width;
  for (const auto &row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream s;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) s << "  ";
      s << rows[r][c];
      if (c + 1 < rows[r].size()) s << std::string(width[c] - rows[r][c].size(), ' ');
    }
    s << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      s << std::string(total, '-') << '\n';
    }
  }
  return s.str();
}

}  // namespace asv5::report
