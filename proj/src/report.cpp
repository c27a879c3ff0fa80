// SPDX-License-Identifier: Apache-2.0
#include "ctcf/report.hpp"

#include <sstream>

#include "ctcf/error.hpp"
#include "ctcf/io.hpp"

namespace ctcf {

namespace {

const char* label_name(Label l) { return l == Label::Positive ? "positive" : "negative"; }

}  // namespace

std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::ostringstream os;
  os << "lambda,prediction,pixel_change_fraction,within_budget\n";
  for (const TraceEntry& e : trace) {
    os << format_double(e.lambda) << ',' << format_double(e.prediction) << ',' << format_double(e.pixel_change) << ','
       << (e.within_budget ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string scan_csv(const ScanReport& report) {
  std::ostringstream os;
  os << "start,end,baseline,min_prediction,reduction,status\n";
  for (const ScanEntry& e : report.entries) {
    os << e.start << ',' << e.end << ',' << format_double(e.baseline_prediction) << ','
       << format_double(e.min_prediction) << ',' << format_double(e.reduction) << ',' << to_string(e.status) << '\n';
  }
  return os.str();
}

std::string reduction_csv(const ReductionTable& table) {
  std::ostringstream os;
  os << "group,mean,standard_error,n,chunk_size\n";
  auto row = [&](const char* name, const GroupStats& s) {
    os << name << ',' << format_double(s.mean) << ',' << format_double(s.standard_error) << ',' << s.count << ','
       << table.chunk_size << '\n';
  };
  row("positives", table.positives);
  row("negatives", table.negatives);
  row("cf_positives", table.cf_positives);
  if (table.cf_negatives) row("cf_negatives", *table.cf_negatives);
  return os.str();
}

std::string per_volume_csv(const ReductionTable& table) {
  std::ostringstream os;
  os << "index,label,input_prediction,cf_prediction,best_start\n";
  for (const VolumeOutcome& v : table.per_volume) {
    os << v.index << ',' << label_name(v.label) << ',' << format_double(v.input_prediction) << ',';
    if (v.cf_prediction) os << format_double(*v.cf_prediction) << ',' << v.best_start;
    else os << ',';
    os << '\n';
  }
  return os.str();
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream os;
  os << "chunk_size,mean_reduction,standard_error,n\n";
  for (const SweepPoint& p : sweep.points) {
    os << p.chunk_size << ',' << format_double(p.mean_reduction) << ',' << format_double(p.standard_error) << ','
       << p.count << '\n';
  }
  return os.str();
}

std::string histograms_csv(const PredictionHistograms& h) {
  std::ostringstream os;
  os << "bin,lo,hi,positives,negatives,cf_positives\n";
  const std::size_t bins = h.positives.mass.size();
  const double width = (h.positives.hi - h.positives.lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = h.positives.lo + width * static_cast<double>(b);
    os << b << ',' << format_double(lo) << ',' << format_double(lo + width) << ',' << format_double(h.positives.mass[b])
       << ',' << format_double(h.negatives.mass[b]) << ',' << format_double(h.cf_positives.mass[b]) << '\n';
  }
  return os.str();
}

std::string loss_csv(const std::vector<double>& history) {
  std::ostringstream os;
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < history.size(); ++i) os << i << ',' << format_double(history[i]) << '\n';
  return os.str();
}

nlohmann::ordered_json cf_result_json(const CFResult& result) {
  nlohmann::ordered_json j;
  j["lambda_star"] = result.lambda_star;
  j["status"] = to_string(result.status);
  j["baseline"] = result.baseline_prediction;
  j["min_prediction"] = result.min_prediction();
  j["pixel_change_fraction"] = pixel_change_fraction(result.reconstruction, result.cf_volume);
  auto trace = nlohmann::ordered_json::array();
  for (const TraceEntry& e : result.trace) {
    nlohmann::ordered_json t;
    t["lambda"] = e.lambda;
    t["prediction"] = e.prediction;
    t["pixel_change_fraction"] = e.pixel_change;
    t["within_budget"] = e.within_budget;
    trace.push_back(std::move(t));
  }
  j["trace"] = std::move(trace);
  return j;
}

CFSummary parse_cf_result_json(const nlohmann::json& j) {
  try {
    CFSummary s;
    s.lambda_star = j.at("lambda_star").get<double>();
    s.status = cf_status_from_string(j.at("status").get<std::string>());
    s.baseline = j.at("baseline").get<double>();
    for (const auto& t : j.at("trace")) {
      s.trace.push_back({t.at("lambda").get<double>(), t.at("prediction").get<double>(),
                         t.at("pixel_change_fraction").get<double>(), t.at("within_budget").get<bool>()});
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedFile, std::string("CF result JSON: ") + e.what());
  }
}

}  // namespace ctcf
