#pragma once

#include <string>
#include <vector>

#include "aic3/scale_analysis.hpp"

namespace aic3 {

inline constexpr const char* kScalesHeader = "source_id,codec_id,level,protocol,aligned,scale_jnd,ci_low,ci_high";

// Rows ordered raw-before-aligned, then by protocol and stimulus.
std::string scales_csv(std::vector<ScaleResult> results);

// Granularity, coefficients and the AIC table.
std::string alignment_json(const AnalysisResult& result, const std::string& run_id = {});

// Filter statistics, bias report, psychometric curves and bootstrap diagnostics.
std::string report_json(const AnalysisResult& result, const std::string& run_id = {});

}  // namespace aic3
