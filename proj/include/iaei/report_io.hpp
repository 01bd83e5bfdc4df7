#pragma once

#include <json.hpp>
#include <string>

#include "iaei/cv.hpp"
#include "iaei/simulation.hpp"
#include "iaei/types.hpp"

namespace iaei {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "iaei-report/1";

enum class ReportFormat { Json, Csv };
ReportFormat parse_format(const std::string& s);

// JSON documents use a fixed key order and nlohmann's shortest round-trip
// float encoding, so writing a loaded report reproduces the bytes.
ordered_json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const ordered_json& doc);

ordered_json fit_report_to_json(const std::vector<FitResult>& fits);
std::vector<FitResult> fit_report_from_json(const ordered_json& doc);

ordered_json simulation_report_to_json(const SimulationReport& report);
SimulationReport simulation_report_from_json(const ordered_json& doc);

ordered_json cv_result_to_json(const CvResult& result);
CvResult cv_result_from_json(const ordered_json& doc);

std::string dump_report(const ordered_json& doc);
ordered_json parse_report(const std::string& text);

// One row per grid cell, fixed header.
std::string simulation_report_to_csv(const SimulationReport& report);
std::string fit_report_to_csv(const std::vector<FitResult>& fits);
// One row per (method, day) at the chosen gamma.
std::string cv_result_to_csv(const CvResult& result);

void write_simulation_report(const SimulationReport& report, const std::string& path,
                             ReportFormat format);
void write_fit_report(const std::vector<FitResult>& fits, const std::string& path,
                      ReportFormat format);
void write_cv_result(const CvResult& result, const std::string& path,
                     ReportFormat format);

}  // namespace iaei
