// SPDX-License-Identifier: Apache-2.0
//
// CSV and JSON renderings of results. Numbers use the shortest
// round-tripping decimal form, so identical results give identical bytes.
//
//   trace.csv        lambda,prediction,pixel_change_fraction,within_budget
//   scan.csv         start,end,baseline,min_prediction,reduction,status
//   reduction.csv    group,mean,standard_error,n,chunk_size
//   per_volume.csv   index,label,input_prediction,cf_prediction,best_start
//   sweep.csv        chunk_size,mean_reduction,standard_error,n
//   histograms.csv   bin,lo,hi,positives,negatives,cf_positives
//   loss.csv         epoch,loss

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcf/evalharness.hpp"
#include "ctcf/latentshift.hpp"
#include "ctcf/localization.hpp"

namespace ctcf {

std::string trace_csv(const std::vector<TraceEntry>& trace);
std::string scan_csv(const ScanReport& report);
std::string reduction_csv(const ReductionTable& table);
std::string per_volume_csv(const ReductionTable& table);
std::string sweep_csv(const SweepResult& sweep);
std::string histograms_csv(const PredictionHistograms& h);
std::string loss_csv(const std::vector<double>& history);

/// {"lambda_star", "status", "baseline", "trace": [...]}; the CF volume
/// itself is stored separately as CTVF.
nlohmann::ordered_json cf_result_json(const CFResult& result);

struct CFSummary {
  double lambda_star = 0.0;
  CFStatus status = CFStatus::NoReduction;
  double baseline = 0.0;
  std::vector<TraceEntry> trace;
  friend bool operator==(const CFSummary&, const CFSummary&) = default;
};

CFSummary parse_cf_result_json(const nlohmann::json& j);

}  // namespace ctcf
