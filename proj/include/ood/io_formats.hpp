#pragma once

// On-disk formats. See docs/formats.md for the schemas.
//
//   logits     CSV   id,label,logit_<class>...
//   decisions  CSV   id,is_ood,predicted_class,raw_score,code,subtype
//   model      JSON  fitted score functions + optional PSI threshold
//   calibration, eval, sweep, distribution reports: JSON
//
// Every floating-point number in a JSON document is written with 17
// significant digits; CSV numbers use the shortest round-trip form. Both
// reload bit-identically.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ood/calibration.hpp"
#include "ood/core_model.hpp"
#include "ood/detectors.hpp"
#include "ood/evaluation.hpp"
#include "ood/synth.hpp"

namespace ood::io {

inline constexpr std::string_view kFormatVersion = "1.0";

// Logits

Dataset parse_logits(std::istream& in, std::string_view source = "<stream>");
Dataset read_logits(const std::filesystem::path& path);
void write_logits(std::ostream& out, const Dataset& data);
void write_logits(const std::filesystem::path& path, const Dataset& data);

// Decisions

void write_decisions(std::ostream& out, std::span<const std::string> class_names,
                     std::span<const DetectorDecision> decisions);
void write_decisions(const std::filesystem::path& path, std::span<const std::string> class_names,
                     std::span<const DetectorDecision> decisions);
std::vector<DetectorDecision> parse_decisions(std::istream& in, std::span<const std::string> class_names,
                                              std::string_view source = "<stream>");
std::vector<DetectorDecision> read_decisions(const std::filesystem::path& path,
                                             std::span<const std::string> class_names);

// Model

std::string model_to_json(const DetectorModel& model);
DetectorModel model_from_json(std::string_view text, std::string_view source = "<string>");
void write_model(const std::filesystem::path& path, const DetectorModel& model);
DetectorModel read_model(const std::filesystem::path& path);

// Calibration result

std::string calibration_to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(std::string_view text, std::string_view source = "<string>");
void write_calibration(const std::filesystem::path& path, const CalibrationResult& result);
CalibrationResult read_calibration(const std::filesystem::path& path);

// Reports

struct ReportContext {
  std::optional<DetectorKind> detector;
  std::optional<double> threshold;
};

std::string eval_report_to_json(const EvalReport& report, const ReportContext& context = {});
std::string sweep_to_json(std::span<const SweepRow> rows, DetectorKind detector,
                          std::optional<std::pair<SweepMetric, std::size_t>> best = std::nullopt);
std::string distribution_report_to_json(const DistributionReport& report);

void write_report(const std::filesystem::path& path, const EvalReport& report,
                  const ReportContext& context = {});
void write_report(const std::filesystem::path& path, std::span<const SweepRow> rows,
                  DetectorKind detector,
                  std::optional<std::pair<SweepMetric, std::size_t>> best = std::nullopt);
void write_report(const std::filesystem::path& path, const DistributionReport& report);

// Synthetic spec

synth::SynthSpec synth_spec_from_json(std::string_view text, std::string_view source = "<string>");
std::string synth_spec_to_json(const synth::SynthSpec& spec);
synth::SynthSpec read_synth_spec(const std::filesystem::path& path);

/// Writes text to a file, throwing ErrorCode::Io if the path is unwritable.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);
/// Seventeen significant digits, trailing zeros kept.
std::string format_17(double v);

}  // namespace ood::io
