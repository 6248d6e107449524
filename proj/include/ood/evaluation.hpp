#pragma once

// Metrics with OOD as an extra class, and plot-data reports.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ood/core_model.hpp"
#include "ood/detectors.hpp"

namespace ood {

/// Mean of classification accuracy and OOD detection rate. Throws EmptySplit
/// when either total is zero.
double weighted_accuracy(std::size_t n_correct, std::size_t n_test, std::size_t n_ood_flagged,
                         std::size_t n_ood);

/// num/den rounded half away from zero to three decimals, in thousandths.
std::uint64_t round_thousandths(std::uint64_t num, std::uint64_t den);

/// "0.638"-style rendering of a thousandths count.
std::string format_thousandths(std::uint64_t thousandths);

struct EvalReport {
  std::vector<std::string> class_names;
  std::size_t n_correct = 0;      // ID samples not flagged and predicted correctly
  std::size_t n_test = 0;         // ID samples
  std::size_t n_ood_flagged = 0;  // OOD samples flagged OOD
  std::size_t n_ood = 0;          // OOD samples
  double classification_accuracy = 0.0;
  double ood_detection_rate = 0.0;
  double weighted_accuracy = 0.0;
  /// (C+1) x (C+1); rows are the truth, columns the prediction; index C is OOD.
  std::vector<std::vector<std::size_t>> confusion;

  std::uint64_t classification_accuracy_thousandths() const;
  std::uint64_t ood_detection_rate_thousandths() const;
  /// Rounded from the exact rational (nT*NO + nO*NT) / (2*NT*NO).
  std::uint64_t weighted_accuracy_thousandths() const;
};

/// Tallies decisions aligned index-by-index with truth labels.
EvalReport tally(std::span<const std::string> class_names, std::span<const Label> truth,
                 std::span<const DetectorDecision> decisions);

/// Matches decisions to truth samples by id. Every truth sample needs exactly
/// one decision; labels must be class indices or the OOD marker.
EvalReport evaluate(std::span<const DetectorDecision> decisions, const Dataset& truth);

struct Histogram {
  std::vector<double> edges;         // bins + 1 entries
  std::vector<std::size_t> counts;   // one per bin

  std::size_t total() const;
};

/// Freedman-Diaconis bin edges over `pooled`, at least `min_bins` bins and at
/// most `max_bins`. Degenerate inputs (zero IQR or range) fall back to
/// `min_bins` equal bins.
std::vector<double> freedman_diaconis_edges(std::span<const double> pooled,
                                            std::size_t min_bins = 10,
                                            std::size_t max_bins = 1000);

/// Counts values into the bins; the last bin is closed on the right and
/// values outside [edges.front(), edges.back()] are clamped to the end bins.
Histogram make_histogram(std::vector<double> edges, std::span<const double> values);

struct SplitDistribution {
  std::string split;
  Histogram correct;              // label == k
  Histogram wrong;                // class label != k
  std::optional<Histogram> ood;   // absent when the split has no OOD samples
  std::size_t unlabeled = 0;      // samples with the unknown marker (not binned)
};

struct ClassDistribution {
  std::size_t class_index = 0;
  std::string class_name;
  GaussianStats correct;
  GaussianStats wrong;
  std::vector<SplitDistribution> splits;
  std::vector<double> curve_x;
  std::vector<double> curve_ps;
};

struct DistributionReport {
  std::vector<ClassDistribution> classes;
};

struct NamedSplit {
  std::string name;
  std::reference_wrapper<const Dataset> data;
};

inline constexpr std::size_t kPsCurvePoints = 256;

DistributionReport distribution_report(const DetectorModel& model, std::span<const NamedSplit> splits);

}  // namespace ood
