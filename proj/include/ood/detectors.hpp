#pragma once

// Probability-score interpreter (PSI) and the max-softmax / energy baselines.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ood/core_model.hpp"

namespace ood {

enum class VerdictCode { Green, Yellow, Red };

enum class VerdictSubtype {
  ClearResult,
  BorderCaseGreen,
  BorderCaseYellow,
  ConfusingEvidence,
  NotEnoughEvidence,
  OodSample,
};

std::string_view to_string(VerdictCode code) noexcept;
std::string_view to_string(VerdictSubtype subtype) noexcept;
std::optional<VerdictCode> parse_verdict_code(std::string_view s) noexcept;
std::optional<VerdictSubtype> parse_verdict_subtype(std::string_view s) noexcept;
VerdictCode code_of(VerdictSubtype subtype) noexcept;

struct Verdict {
  VerdictCode code = VerdictCode::Red;
  VerdictSubtype subtype = VerdictSubtype::OodSample;
  std::optional<std::size_t> predicted_class;  // present iff code != Red

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct DetectorDecision {
  std::string sample_id;
  bool is_ood = false;
  std::optional<std::size_t> predicted_class;
  double raw_score = 0.0;
  std::optional<Verdict> verdict;  // PSI only

  friend bool operator==(const DetectorDecision&, const DetectorDecision&) = default;
};

enum class DetectorKind { Psi, MaxSoftmax, Energy };

std::string_view to_string(DetectorKind kind) noexcept;
/// Accepts the CLI spellings "psi", "msp" and "energy".
std::optional<DetectorKind> parse_detector_kind(std::string_view s) noexcept;

struct BaselineConfig {
  DetectorKind kind = DetectorKind::MaxSoftmax;  // MaxSoftmax or Energy
  double threshold = 0.5;

  void validate() const;
};

/// Numerically stable softmax (max-subtracted).
std::vector<double> softmax(std::span<const double> logits);

/// logsumexp of the logits, i.e. the negative free energy at temperature 1.
double energy_score(std::span<const double> logits);

/// Applies the PS rule table for threshold t in (0,1). Scores >= t are high
/// positive, (0,t) low positive, (-t,0] low negative, <= -t high negative.
Verdict interpret(std::span<const double> ps, double t);

DetectorDecision psi_detect(const DetectorModel& model, std::string_view sample_id,
                            std::span<const double> logits);
DetectorDecision max_softmax_detect(const BaselineConfig& config, std::string_view sample_id,
                                    std::span<const double> logits);
DetectorDecision energy_detect(const BaselineConfig& config, std::string_view sample_id,
                               std::span<const double> logits);

/// Uniform front for the three detectors.
class Detector {
 public:
  /// Throws UncalibratedModel if the model has no psi_threshold.
  static Detector psi(DetectorModel model);
  static Detector baseline(BaselineConfig config);

  DetectorKind kind() const;
  DetectorDecision decide(std::string_view sample_id, std::span<const double> logits) const;
  /// Decisions in dataset order.
  std::vector<DetectorDecision> decide_all(const Dataset& data) const;

 private:
  explicit Detector(std::variant<DetectorModel, BaselineConfig> impl) : impl_(std::move(impl)) {}
  std::variant<DetectorModel, BaselineConfig> impl_;
};

}  // namespace ood
