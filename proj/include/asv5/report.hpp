#pragma once

// Machine-readable report writers: JSON for metric reports and calibrations,
// CSV for sweeps and breakdowns, plain SVG for quick plots. Output depends
// only on the values passed in.

#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "asv5/analysis.hpp"
#include "asv5/calib.hpp"
#include "asv5/detmetrics.hpp"
#include "asv5/tandem.hpp"

namespace asv5::report {

using Json = nlohmann::ordered_json;

// Finite values as numbers, infinities as the strings "inf" and "-inf".
Json Number(double value);
// Inverse of Number. Throws InvalidArgument on anything else.
double ToDouble(const Json &value);

Json ToJson(const det::CmReport &r);
Json ToJson(const tandem::SasvReport &r);  // tandem fields only when present
Json ToJson(const det::CostConfig &cfg);
Json ToJson(const tandem::SasvCostConfig &cfg);
Json ToJson(const calib::AffineCalibration &cal);
Json ToJson(const calib::PavMapping &map);
Json ToJson(const analysis::SliceReport &r);
Json ToJson(const analysis::Leaderboard &board);

// Throws InvalidArgument unless `j` is an affine calibration written by
// ToJson.
calib::AffineCalibration AffineFromJson(const Json &j);

// Two-space indent, trailing newline.
std::string Dump(const Json &j);

// Columns: pi,beta,tau_bayes,norm_act_dcf,norm_min_dcf,dummy_bound,
// norm_act_dcf_clipped.
void WriteApeCsv(std::ostream &out, const calib::ApeCurve &curve);
// Normalized DCF against prior log-odds.
std::string ApeSvg(const calib::ApeCurve &curve);

// Long format, one row per (slice, metric): slice,metric,value,n_bona,
// n_spoof,policy,n_nontarget. Infinite thresholds are written as inf/-inf.
void WriteBreakdownCsv(std::ostream &out, std::span<const analysis::SliceReport> slices);

// slice,n,min,q1,median,q3,max
void WriteQuantileCsv(std::ostream &out,
                      const std::map<std::string, analysis::SliceAggregate> &aggregates);
std::string BoxplotSvg(const std::map<std::string, analysis::SliceAggregate> &aggregates,
                       const std::string &title);

void WriteLeaderboardCsv(std::ostream &out, const analysis::Leaderboard &board);

// Fixed-width text table; first row is the header.
std::string FormatTable(const std::vector<std::vector<std::string>> &rows);

}  // namespace asv5::report
