#pragma once

// Threshold selection from validation-set misclassifications, and threshold
// sweeps over test + OOD splits.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ood/core_model.hpp"
#include "ood/detectors.hpp"
#include "ood/evaluation.hpp"

namespace ood {

struct CalibrationSpec {
  /// Fraction q in (0,1] of misclassified validation samples to flag as OOD.
  double coverage_target = 0.75;
  /// Strictly increasing candidate thresholds; empty selects the detector's
  /// default grid.
  std::vector<double> grid;

  void validate(DetectorKind kind) const;
};

struct CalibrationResult {
  DetectorKind detector = DetectorKind::Psi;
  double coverage_target = 0.0;
  double chosen_threshold = 0.0;
  double achieved_coverage = 0.0;
  std::size_t misclassified_count = 0;
  std::size_t flagged_count = 0;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

/// 1 - 10^-x for x = start, start+step, ..., stop. Integer x values are
/// computed from an integer exponent so they equal 1 - 1e-x exactly.
std::vector<double> probability_grid(double x_start, double x_stop, double x_step);

/// Default PSI / max-softmax grid: x from 0.1 to 13.0 in steps of 0.1.
std::vector<double> default_probability_grid();

/// start, start+step, ..., stop (inclusive up to rounding).
std::vector<double> linear_grid(double start, double stop, double step);

/// Default energy grid: for each distinct score, the next representable
/// double above it, so that "score < tau" flags the score itself.
std::vector<double> default_energy_grid(std::span<const double> scores);

/// Smallest k in [0, m] with k / m >= q (the canonical coverage predicate).
std::size_t required_count(double q, std::size_t m);

/// Samples whose argmax-logit class differs from their label, in input order.
std::vector<LabeledSample> misclassified_subset(const Dataset& validation);
std::vector<LabeledSample> misclassified_subset(const DetectorModel& model, const Dataset& validation);

/// Minimum grid t such that at least a fraction q of the PS vectors receive
/// a Red verdict. Scans the whole grid: Red coverage need not be monotone.
CalibrationResult calibrate_psi_scores(std::span<const PsVector> misclassified_ps,
                                       const CalibrationSpec& spec);

struct PsiCalibration {
  CalibrationResult result;
  DetectorModel model;  // copy carrying psi_threshold
};

PsiCalibration calibrate_psi(const DetectorModel& model, const Dataset& validation,
                             const CalibrationSpec& spec);

/// Per-sample detector score: max softmax probability or logsumexp.
double baseline_score(DetectorKind kind, std::span<const double> logits);
std::vector<double> baseline_scores(DetectorKind kind, std::span<const LabeledSample> samples);

/// Grid scan: minimum threshold with count(score < threshold) / m >= q.
CalibrationResult calibrate_baseline(DetectorKind kind, std::span<const double> scores,
                                     const CalibrationSpec& spec);

/// Same selection via the order statistic: the first grid value strictly
/// above the required_count(q, m)-th smallest score. nullopt if none.
std::optional<double> order_statistic_threshold(std::span<const double> scores, double q,
                                                std::span<const double> grid);

struct SweepRow {
  double threshold = 0.0;
  EvalReport report;
};

std::vector<SweepRow> threshold_sweep(const DetectorModel& model, const Dataset& test,
                                      const Dataset& ood, std::span<const double> grid);

std::vector<SweepRow> baseline_sweep(DetectorKind kind, const Dataset& test, const Dataset& ood,
                                     std::span<const double> grid);

enum class SweepMetric { WeightedAccuracy, ClassificationAccuracy, OodDetectionRate };

std::optional<SweepMetric> parse_sweep_metric(std::string_view s) noexcept;
std::string_view to_string(SweepMetric m) noexcept;

/// Index of the first row maximizing the metric.
std::size_t select_best(std::span<const SweepRow> rows, SweepMetric metric);

}  // namespace ood
