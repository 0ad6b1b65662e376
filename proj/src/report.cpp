#include "aic3/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace aic3 {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Rounds through the fixed-point text so JSON output is stable across platforms.
double rounded(double v) { return std::stod(fixed(v)); }

ordered_json bias_json(const BiasTally& t) {
  return ordered_json{{"left", t.left},
                      {"right", t.right},
                      {"not_sure", t.not_sure},
                      {"p_value", rounded(t.p_value)},
                      {"biased_at_0_05", t.biased()}};
}

}  // namespace

std::string scales_csv(std::vector<ScaleResult> results) {
  std::sort(results.begin(), results.end(), [](const ScaleResult& a, const ScaleResult& b) {
    return std::tie(a.aligned, a.protocol, a.stimulus) < std::tie(b.aligned, b.protocol, b.stimulus);
  });
  std::ostringstream out;
  out << kScalesHeader << '\n';
  for (const auto& r : results) {
    out << r.stimulus.source_id << ',' << r.stimulus.codec_id << ',' << r.stimulus.level << ','
        << to_string(r.protocol) << ',' << (r.aligned ? 1 : 0) << ',' << fixed(r.scale_jnd) << ','
        << fixed(r.ci_low) << ',' << fixed(r.ci_high) << '\n';
  }
  return out.str();
}

std::string alignment_json(const AnalysisResult& result, const std::string& run_id) {
  ordered_json j;
  if (!run_id.empty()) j["run_id"] = run_id;
  if (!result.alignment) {
    j["granularity"] = nullptr;
    return j.dump(2) + "\n";
  }
  j["granularity"] = to_string(result.alignment->granularity);
  ordered_json coef = ordered_json::object();
  for (const auto& [group, q] : result.alignment->coefficients) coef[group] = {{"a", rounded(q.a)}, {"b", rounded(q.b)}};
  j["coefficients"] = coef;
  j["aic_table"] = ordered_json::array();
  for (const auto& m : result.candidates)
    j["aic_table"].push_back({{"granularity", to_string(m.granularity)},
                              {"parameters", m.aic_parameter_count},
                              {"transform_parameters", m.parameter_count()},
                              {"log_likelihood", rounded(m.log_likelihood)},
                              {"aic", rounded(m.aic)},
                              {"rss", rounded(m.rss)},
                              {"points", m.points}});
  return j.dump(2) + "\n";
}

std::string report_json(const AnalysisResult& result, const std::string& run_id) {
  ordered_json j;
  if (!run_id.empty()) j["run_id"] = run_id;
  const auto& fr = result.filter.report;
  ordered_json filter;
  filter["threshold"] = fr.threshold;
  for (const auto& [p, total] : fr.batches_total) {
    const auto name = std::string(to_string(p));
    filter[name] = {{"batches_total", total},
                    {"batches_kept", fr.batches_kept.count(p) ? fr.batches_kept.at(p) : 0},
                    {"workers_total", fr.workers_total.count(p) ? fr.workers_total.at(p) : 0},
                    {"workers_kept", fr.workers_kept.count(p) ? fr.workers_kept.at(p) : 0},
                    {"accuracy_histogram", fr.histogram.count(p) ? fr.histogram.at(p) : std::vector<int>{}}};
  }
  j["filter"] = filter;

  ordered_json bias;
  for (const auto& [p, t] : result.bias.before_filtering) {
    const auto name = std::string(to_string(p));
    bias[name]["before_filtering"] = bias_json(t);
    bias[name]["after_filtering"] = bias_json(result.bias.after_filtering.at(p));
  }
  j["bias"] = bias;

  ordered_json psych;
  for (const auto& [p, c] : result.psychometric) {
    ordered_json pts = ordered_json::array();
    for (const auto& pt : c.points)
      pts.push_back({{"level", pt.level}, {"proportion_correct", rounded(pt.proportion)}, {"cells", pt.cells},
                     {"responses", pt.responses}});
    psych[std::string(to_string(p))] = {
        {"points", pts},
        {"jnd_threshold_level", c.jnd_threshold_level ? ordered_json(rounded(*c.jnd_threshold_level)) : ordered_json()},
        {"empty_cells", c.empty_cells}};
  }
  j["psychometric"] = psych;
  j["bootstrap"] = {{"requested", result.bootstrap.requested},
                    {"completed", result.bootstrap.completed},
                    {"dropped", result.bootstrap.dropped}};
  return j.dump(2) + "\n";
}

}  // namespace aic3
