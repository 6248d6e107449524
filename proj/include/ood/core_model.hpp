#pragma once

// Domain types, Gaussian fitting of logit columns and the per-class
// probability-score (PS) function.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ood {

/// Lower bound applied to every fitted standard deviation.
inline constexpr double kSigmaFloor = 1e-6;

/// Reserved label tokens; never valid class names.
inline constexpr std::string_view kOodToken = "__OOD__";
inline constexpr std::string_view kUnknownToken = "?";

using LogitVector = std::vector<double>;
using PsVector = std::vector<double>;

enum class LabelKind { Class, Ood, Unknown };

struct Label {
  LabelKind kind = LabelKind::Unknown;
  std::size_t class_index = 0;

  static constexpr Label of_class(std::size_t k) { return {LabelKind::Class, k}; }
  static constexpr Label ood() { return {LabelKind::Ood, 0}; }
  static constexpr Label unknown() { return {LabelKind::Unknown, 0}; }

  constexpr bool is_class() const { return kind == LabelKind::Class; }
  constexpr bool is_ood() const { return kind == LabelKind::Ood; }

  friend constexpr bool operator==(const Label&, const Label&) = default;
};

struct LabeledSample {
  std::string id;
  Label label;
  LogitVector logits;
};

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<LabeledSample> samples;

  std::size_t class_count() const { return class_names.size(); }
  bool empty() const { return samples.empty(); }

  /// Throws ood::Error if any Dataset/LabeledSample/LogitVector invariant fails.
  void validate() const;
};

/// Concatenates two splits sharing the same class manifest. Sample ids must
/// stay unique across both.
Dataset merge_splits(const Dataset& first, const Dataset& second);

/// Checks a class manifest: at least two names, all distinct, non-empty and
/// not one of the reserved label tokens.
void validate_class_names(std::span<const std::string> names);

struct GaussianStats {
  double mean = 0.0;
  double std = kSigmaFloor;
  std::size_t count = 0;

  friend bool operator==(const GaussianStats&, const GaussianStats&) = default;
};

/// Arithmetic mean and population standard deviation (floored at
/// kSigmaFloor) of at least two finite values.
GaussianStats fit_gaussian(std::span<const double> values);

/// Pair of Gaussians (correct vs wrong) for one output neuron. The
/// correct-class mean must be strictly above the wrong-class mean.
class ClassScoreFunction {
 public:
  ClassScoreFunction(std::size_t class_index, GaussianStats correct, GaussianStats wrong);

  std::size_t class_index() const { return class_index_; }
  const GaussianStats& correct() const { return correct_; }
  const GaussianStats& wrong() const { return wrong_; }

  /// log N(x; correct) - log N(x; wrong).
  double log_likelihood_ratio(double x) const;

  /// Clamped score in [-1, 1]: -1 below the wrong mean, +1 above the correct
  /// mean, tanh(LLR/2) in between (equal-prior posterior difference).
  double score(double x) const;

  friend bool operator==(const ClassScoreFunction&, const ClassScoreFunction&) = default;

 private:
  std::size_t class_index_;
  GaussianStats correct_;
  GaussianStats wrong_;
  double log_sigma_ratio_;  // log(sigma_wrong / sigma_correct)
};

inline double probability_score(const ClassScoreFunction& sf, double x) { return sf.score(x); }

struct DetectorModel {
  std::vector<std::string> class_names;
  std::vector<ClassScoreFunction> score_functions;
  std::optional<double> psi_threshold;
  std::map<std::string, std::string> metadata;

  std::size_t class_count() const { return class_names.size(); }

  void validate() const;

  /// Copy with psi_threshold set; t must lie strictly inside (0, 1).
  DetectorModel with_threshold(double t) const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

/// Fits one ClassScoreFunction per class from labeled training logits.
/// Samples carrying OOD or unknown labels are ignored.
DetectorModel fit_model(const Dataset& train);

/// As above, but each class's wrong-class distribution is fitted from the
/// matching logit column of every sample in `negative_source`.
DetectorModel fit_model(const Dataset& train, const Dataset& negative_source);

PsVector ps_vector(const DetectorModel& model, std::span<const double> logits);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace ood
