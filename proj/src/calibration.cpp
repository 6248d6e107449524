#include "ood/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ood/error.hpp"
#include "ood/kernels.hpp"

namespace ood {

void CalibrationSpec::validate(DetectorKind kind) const {
  if (!(coverage_target > 0.0 && coverage_target <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "coverage target must lie in (0,1]");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "non-finite grid value");
    if (kind != DetectorKind::Energy && !(t > 0.0 && t < 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "grid value " + std::to_string(t) + " outside (0,1) for " +
                      std::string(to_string(kind)));
    }
    if (i > 0 && !(grid[i - 1] < t)) {
      throw Error(ErrorCode::InvalidArgument, "threshold grid must be strictly increasing");
    }
  }
}

std::vector<double> probability_grid(double x_start, double x_stop, double x_step) {
  if (!(x_step > 0.0) || !(x_start > 0.0) || x_stop < x_start) {
    throw Error(ErrorCode::InvalidArgument, "invalid probability grid range");
  }
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor((x_stop - x_start) / x_step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    // Snap to 1e-9 so accumulated step error does not perturb 1 - 10^-0.3 etc.
    const double x = std::round((x_start + x_step * static_cast<double>(i)) * 1e9) / 1e9;
    const double rounded = std::round(x);
    const double exponent = std::abs(x - rounded) < 1e-9 ? rounded : x;
    grid.push_back(1.0 - std::pow(10.0, -exponent));
  }
  // Very large exponents collapse to the same double near 1.
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<double> default_probability_grid() { return probability_grid(0.1, 13.0, 0.1); }

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start || !std::isfinite(start) || !std::isfinite(stop)) {
    throw Error(ErrorCode::InvalidArgument, "invalid linear grid range");
  }
  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) {
    grid.push_back(std::round((start + step * static_cast<double>(i)) * 1e9) / 1e9);
  }
  return grid;
}

std::vector<double> default_energy_grid(std::span<const double> scores) {
  std::vector<double> grid(scores.begin(), scores.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double& v : grid) v = std::nextafter(v, std::numeric_limits<double>::infinity());
  return grid;
}

std::size_t required_count(double q, std::size_t m) {
  const auto md = static_cast<double>(m);
  auto meets = [&](std::size_t k) { return static_cast<double>(k) / md >= q; };
  if (m == 0) return 0;
  auto k = static_cast<std::size_t>(std::clamp(std::ceil(q * md), 0.0, md));
  while (k > 0 && meets(k - 1)) --k;
  while (k < m && !meets(k)) ++k;
  return k;
}

std::vector<LabeledSample> misclassified_subset(const Dataset& validation) {
  validation.validate();
  std::vector<LabeledSample> out;
  for (const auto& s : validation.samples) {
    if (!s.label.is_class()) {
      throw Error(ErrorCode::NonClassLabel,
                  "validation sample '" + s.id + "' lacks a class label (OOD or unknown marker)");
    }
    if (argmax(s.logits) != s.label.class_index) out.push_back(s);
  }
  return out;
}

std::vector<LabeledSample> misclassified_subset(const DetectorModel& model, const Dataset& validation) {
  if (validation.class_count() != model.class_count()) {
    throw Error(ErrorCode::DimensionMismatch, "validation set and model disagree on class count");
  }
  return misclassified_subset(validation);
}

namespace {

CalibrationResult scan(DetectorKind kind, const CalibrationSpec& spec, std::span<const double> grid,
                       std::size_t m, auto&& flagged_at) {
  if (m == 0) {
    throw Error(ErrorCode::EmptyMisclassifiedSet,
                "calibration undefined: no misclassified validation samples");
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty threshold grid");
  const std::size_t need = required_count(spec.coverage_target, m);
  const auto md = static_cast<double>(m);
  std::size_t best_flagged = 0;
  double best_threshold = grid.front();
  for (double t : grid) {
    const std::size_t flagged = flagged_at(t);
    if (flagged >= need) {
      return {kind, spec.coverage_target, t, static_cast<double>(flagged) / md, m, flagged};
    }
    if (flagged > best_flagged) {
      best_flagged = flagged;
      best_threshold = t;
    }
  }
  const double best = static_cast<double>(best_flagged) / md;
  throw CoverageError("no threshold in the grid reaches coverage " +
                          std::to_string(spec.coverage_target) + "; best achieved " +
                          std::to_string(best) + " at threshold " + std::to_string(best_threshold),
                      best, best_threshold);
}

}  // namespace

CalibrationResult calibrate_psi_scores(std::span<const PsVector> misclassified_ps,
                                       const CalibrationSpec& spec) {
  spec.validate(DetectorKind::Psi);
  const std::vector<double> grid = spec.grid.empty() ? default_probability_grid() : spec.grid;
  return scan(DetectorKind::Psi, spec, grid, misclassified_ps.size(), [&](double t) {
    std::size_t red = 0;
    for (const auto& ps : misclassified_ps) red += interpret(ps, t).code == VerdictCode::Red ? 1 : 0;
    return red;
  });
}

PsiCalibration calibrate_psi(const DetectorModel& model, const Dataset& validation,
                             const CalibrationSpec& spec) {
  model.validate();
  spec.validate(DetectorKind::Psi);
  const auto wrong = misclassified_subset(model, validation);
  std::vector<PsVector> ps;
  ps.reserve(wrong.size());
  for (const auto& s : wrong) ps.push_back(ps_vector(model, s.logits));
  const CalibrationResult result = calibrate_psi_scores(ps, spec);
  return {result, model.with_threshold(result.chosen_threshold)};
}

double baseline_score(DetectorKind kind, std::span<const double> logits) {
  switch (kind) {
    case DetectorKind::MaxSoftmax: {
      const auto p = softmax(logits);
      return kernels::max_value(p);
    }
    case DetectorKind::Energy: return energy_score(logits);
    case DetectorKind::Psi: break;
  }
  throw Error(ErrorCode::InvalidArgument, "baseline_score needs msp or energy");
}

std::vector<double> baseline_scores(DetectorKind kind, std::span<const LabeledSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(baseline_score(kind, s.logits));
  return out;
}

CalibrationResult calibrate_baseline(DetectorKind kind, std::span<const double> scores,
                                     const CalibrationSpec& spec) {
  if (kind == DetectorKind::Psi) throw Error(ErrorCode::InvalidArgument, "use calibrate_psi for psi");
  spec.validate(kind);
  std::vector<double> grid = spec.grid;
  if (grid.empty()) {
    grid = kind == DetectorKind::Energy ? default_energy_grid(scores) : default_probability_grid();
  }
  return scan(kind, spec, grid, scores.size(),
              [&](double t) { return kernels::count_below(scores, t); });
}

std::optional<double> order_statistic_threshold(std::span<const double> scores, double q,
                                                std::span<const double> grid) {
  if (scores.empty()) return std::nullopt;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = required_count(q, sorted.size());
  if (k == 0) return grid.empty() ? std::nullopt : std::optional<double>(grid.front());
  const double kth = sorted[k - 1];
  const auto it = std::upper_bound(grid.begin(), grid.end(), kth);
  if (it == grid.end()) return std::nullopt;
  return *it;
}

namespace {

struct SweepInputs {
  std::vector<std::string> class_names;
  std::vector<Label> truth;
  std::vector<const LabeledSample*> samples;
};

SweepInputs sweep_inputs(const Dataset& test, const Dataset& ood) {
  if (test.empty()) throw Error(ErrorCode::EmptySplit, "sweep needs a non-empty test split");
  if (ood.empty()) throw Error(ErrorCode::EmptySplit, "sweep needs a non-empty OOD split");
  if (test.class_names != ood.class_names) {
    throw Error(ErrorCode::HeaderMismatch, "test and OOD splits have different class manifests");
  }
  test.validate();
  ood.validate();
  SweepInputs in;
  in.class_names = test.class_names;
  for (const auto& s : test.samples) {
    if (!s.label.is_class()) {
      throw Error(ErrorCode::NonClassLabel, "test sample '" + s.id + "' lacks a class label");
    }
    in.truth.push_back(s.label);
    in.samples.push_back(&s);
  }
  for (const auto& s : ood.samples) {
    if (!s.label.is_ood()) {
      throw Error(ErrorCode::NonClassLabel, "OOD split sample '" + s.id + "' is not marked OOD");
    }
    in.truth.push_back(s.label);
    in.samples.push_back(&s);
  }
  return in;
}

}  // namespace

std::vector<SweepRow> threshold_sweep(const DetectorModel& model, const Dataset& test,
                                      const Dataset& ood, std::span<const double> grid) {
  model.validate();
  const SweepInputs in = sweep_inputs(test, ood);
  std::vector<PsVector> ps;
  ps.reserve(in.samples.size());
  for (const auto* s : in.samples) ps.push_back(ps_vector(model, s->logits));

  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  std::vector<DetectorDecision> decisions(in.samples.size());
  for (double t : grid) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const Verdict v = interpret(ps[i], t);
      auto& d = decisions[i];
      d.sample_id = in.samples[i]->id;
      d.is_ood = v.code == VerdictCode::Red;
      d.predicted_class = v.predicted_class;
      d.raw_score = ps[i][argmax(ps[i])];
      d.verdict = v;
    }
    rows.push_back({t, tally(in.class_names, in.truth, decisions)});
  }
  return rows;
}

std::vector<SweepRow> baseline_sweep(DetectorKind kind, const Dataset& test, const Dataset& ood,
                                     std::span<const double> grid) {
  if (kind == DetectorKind::Psi) throw Error(ErrorCode::InvalidArgument, "use threshold_sweep for psi");
  const SweepInputs in = sweep_inputs(test, ood);
  std::vector<double> scores;
  std::vector<std::size_t> predicted;
  for (const auto* s : in.samples) {
    scores.push_back(baseline_score(kind, s->logits));
    predicted.push_back(argmax(s->logits));
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  std::vector<DetectorDecision> decisions(in.samples.size());
  for (double t : grid) {
    BaselineConfig{kind, t}.validate();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      auto& d = decisions[i];
      d.sample_id = in.samples[i]->id;
      d.is_ood = scores[i] < t;
      d.predicted_class = d.is_ood ? std::nullopt : std::optional<std::size_t>(predicted[i]);
      d.raw_score = scores[i];
    }
    rows.push_back({t, tally(in.class_names, in.truth, decisions)});
  }
  return rows;
}

std::optional<SweepMetric> parse_sweep_metric(std::string_view s) noexcept {
  if (s == "weighted_accuracy") return SweepMetric::WeightedAccuracy;
  if (s == "classification_accuracy") return SweepMetric::ClassificationAccuracy;
  if (s == "ood_detection_rate") return SweepMetric::OodDetectionRate;
  return std::nullopt;
}

std::string_view to_string(SweepMetric m) noexcept {
  switch (m) {
    case SweepMetric::WeightedAccuracy: return "weighted_accuracy";
    case SweepMetric::ClassificationAccuracy: return "classification_accuracy";
    case SweepMetric::OodDetectionRate: return "ood_detection_rate";
  }
  return "";
}

std::size_t select_best(std::span<const SweepRow> rows, SweepMetric metric) {
  if (rows.empty()) throw Error(ErrorCode::EmptySplit, "no sweep rows to select from");
  auto value = [metric](const SweepRow& r) {
    switch (metric) {
      case SweepMetric::ClassificationAccuracy: return r.report.classification_accuracy;
      case SweepMetric::OodDetectionRate: return r.report.ood_detection_rate;
      case SweepMetric::WeightedAccuracy: break;
    }
    return r.report.weighted_accuracy;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (value(rows[i]) > value(rows[best])) best = i;
  }
  return best;
}

}  // namespace ood
