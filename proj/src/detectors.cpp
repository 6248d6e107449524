#include "ood/detectors.hpp"

#include <cmath>
#include <string>

#include "ood/error.hpp"
#include "ood/kernels.hpp"

namespace ood {

std::string_view to_string(VerdictCode code) noexcept {
  switch (code) {
    case VerdictCode::Green: return "Green";
    case VerdictCode::Yellow: return "Yellow";
    case VerdictCode::Red: return "Red";
  }
  return "";
}

std::string_view to_string(VerdictSubtype subtype) noexcept {
  switch (subtype) {
    case VerdictSubtype::ClearResult: return "ClearResult";
    case VerdictSubtype::BorderCaseGreen: return "BorderCaseGreen";
    case VerdictSubtype::BorderCaseYellow: return "BorderCaseYellow";
    case VerdictSubtype::ConfusingEvidence: return "ConfusingEvidence";
    case VerdictSubtype::NotEnoughEvidence: return "NotEnoughEvidence";
    case VerdictSubtype::OodSample: return "OodSample";
  }
  return "";
}

std::optional<VerdictCode> parse_verdict_code(std::string_view s) noexcept {
  for (auto c : {VerdictCode::Green, VerdictCode::Yellow, VerdictCode::Red}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<VerdictSubtype> parse_verdict_subtype(std::string_view s) noexcept {
  for (auto t : {VerdictSubtype::ClearResult, VerdictSubtype::BorderCaseGreen,
                 VerdictSubtype::BorderCaseYellow, VerdictSubtype::ConfusingEvidence,
                 VerdictSubtype::NotEnoughEvidence, VerdictSubtype::OodSample}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

VerdictCode code_of(VerdictSubtype subtype) noexcept {
  switch (subtype) {
    case VerdictSubtype::ClearResult:
    case VerdictSubtype::BorderCaseGreen: return VerdictCode::Green;
    case VerdictSubtype::BorderCaseYellow: return VerdictCode::Yellow;
    default: return VerdictCode::Red;
  }
}

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::Psi: return "psi";
    case DetectorKind::MaxSoftmax: return "msp";
    case DetectorKind::Energy: return "energy";
  }
  return "";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view s) noexcept {
  if (s == "psi") return DetectorKind::Psi;
  if (s == "msp") return DetectorKind::MaxSoftmax;
  if (s == "energy") return DetectorKind::Energy;
  return std::nullopt;
}

void BaselineConfig::validate() const {
  switch (kind) {
    case DetectorKind::MaxSoftmax:
      if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "max-softmax threshold must lie in (0,1)");
      }
      break;
    case DetectorKind::Energy:
      if (!std::isfinite(threshold)) {
        throw Error(ErrorCode::InvalidArgument, "energy threshold must be finite");
      }
      break;
    case DetectorKind::Psi:
      throw Error(ErrorCode::InvalidArgument, "baseline config cannot be of kind psi");
  }
}

namespace {

void require_finite(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorCode::InvalidArgument, "empty logit vector");
  for (double v : logits) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "non-finite logit");
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  require_finite(logits);
  const double m = kernels::max_value(logits);
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double energy_score(std::span<const double> logits) {
  require_finite(logits);
  const double m = kernels::max_value(logits);
  double total = 0.0;
  for (double v : logits) total += std::exp(v - m);
  return m + std::log(total);
}

Verdict interpret(std::span<const double> ps, double t) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidArgument, "PSI threshold must lie in (0,1)");
  if (ps.empty()) throw Error(ErrorCode::InvalidArgument, "empty PS vector");

  std::size_t high = 0;
  std::size_t low = 0;
  std::size_t low_negative = 0;
  std::size_t high_index = 0;
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double s = ps[k];
    if (!(s >= -1.0 && s <= 1.0)) throw Error(ErrorCode::InvalidArgument, "PS value outside [-1,1]");
    if (s >= t) {
      ++high;
      high_index = k;
    } else if (s > 0.0) {
      ++low;
    } else if (s > -t) {
      ++low_negative;
    }
  }

  if (high == 1) {
    if (low >= 1) return {VerdictCode::Yellow, VerdictSubtype::BorderCaseYellow, high_index};
    if (low_negative >= 1) return {VerdictCode::Green, VerdictSubtype::BorderCaseGreen, high_index};
    return {VerdictCode::Green, VerdictSubtype::ClearResult, high_index};
  }
  if (high >= 2) return {VerdictCode::Red, VerdictSubtype::ConfusingEvidence, std::nullopt};
  if (low >= 1) return {VerdictCode::Red, VerdictSubtype::NotEnoughEvidence, std::nullopt};
  return {VerdictCode::Red, VerdictSubtype::OodSample, std::nullopt};
}

DetectorDecision psi_detect(const DetectorModel& model, std::string_view sample_id,
                            std::span<const double> logits) {
  if (!model.psi_threshold) {
    throw Error(ErrorCode::UncalibratedModel,
                "model has no PSI threshold; run calibration first");
  }
  const PsVector ps = ps_vector(model, logits);
  const Verdict v = interpret(ps, *model.psi_threshold);
  DetectorDecision d;
  d.sample_id = std::string(sample_id);
  d.is_ood = v.code == VerdictCode::Red;
  d.predicted_class = v.predicted_class;
  d.raw_score = ps[argmax(ps)];
  d.verdict = v;
  return d;
}

DetectorDecision max_softmax_detect(const BaselineConfig& config, std::string_view sample_id,
                                    std::span<const double> logits) {
  if (config.kind != DetectorKind::MaxSoftmax) {
    throw Error(ErrorCode::InvalidArgument, "max_softmax_detect needs a MaxSoftmax config");
  }
  config.validate();
  const auto probs = softmax(logits);
  const double p = probs[argmax(probs)];
  DetectorDecision d;
  d.sample_id = std::string(sample_id);
  d.is_ood = p < config.threshold;
  if (!d.is_ood) d.predicted_class = argmax(logits);
  d.raw_score = p;
  return d;
}

DetectorDecision energy_detect(const BaselineConfig& config, std::string_view sample_id,
                               std::span<const double> logits) {
  if (config.kind != DetectorKind::Energy) {
    throw Error(ErrorCode::InvalidArgument, "energy_detect needs an Energy config");
  }
  config.validate();
  const double s = energy_score(logits);
  DetectorDecision d;
  d.sample_id = std::string(sample_id);
  d.is_ood = s < config.threshold;
  if (!d.is_ood) d.predicted_class = argmax(logits);
  d.raw_score = s;
  return d;
}

Detector Detector::psi(DetectorModel model) {
  model.validate();
  if (!model.psi_threshold) {
    throw Error(ErrorCode::UncalibratedModel,
                "model has no PSI threshold; run calibration first");
  }
  return Detector(std::move(model));
}

Detector Detector::baseline(BaselineConfig config) {
  config.validate();
  return Detector(config);
}

DetectorKind Detector::kind() const {
  if (std::holds_alternative<DetectorModel>(impl_)) return DetectorKind::Psi;
  return std::get<BaselineConfig>(impl_).kind;
}

DetectorDecision Detector::decide(std::string_view sample_id, std::span<const double> logits) const {
  if (const auto* model = std::get_if<DetectorModel>(&impl_)) {
    return psi_detect(*model, sample_id, logits);
  }
  const auto& cfg = std::get<BaselineConfig>(impl_);
  return cfg.kind == DetectorKind::Energy ? energy_detect(cfg, sample_id, logits)
                                          : max_softmax_detect(cfg, sample_id, logits);
}

std::vector<DetectorDecision> Detector::decide_all(const Dataset& data) const {
  std::vector<DetectorDecision> out;
  out.reserve(data.samples.size());
  for (const auto& s : data.samples) out.push_back(decide(s.id, s.logits));
  return out;
}

}  // namespace ood
