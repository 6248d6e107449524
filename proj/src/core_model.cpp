#include "ood/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "ood/error.hpp"
#include "ood/kernels.hpp"

namespace ood {

void validate_class_names(std::span<const std::string> names) {
  if (names.size() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "class manifest needs at least 2 classes, got " + std::to_string(names.size()));
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& name : names) {
    if (name.empty()) throw Error(ErrorCode::InvalidArgument, "empty class name in manifest");
    if (name == kOodToken || name == kUnknownToken) {
      throw Error(ErrorCode::InvalidArgument, "reserved token used as class name: " + name);
    }
    if (!seen.insert(name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate class name: " + name);
    }
  }
}

void Dataset::validate() const {
  validate_class_names(class_names);
  const std::size_t c = class_count();
  std::unordered_set<std::string_view> ids;
  for (const auto& s : samples) {
    if (s.logits.size() != c) {
      throw Error(ErrorCode::DimensionMismatch,
                  "sample '" + s.id + "' has " + std::to_string(s.logits.size()) +
                      " logits, expected " + std::to_string(c));
    }
    if (!std::all_of(s.logits.begin(), s.logits.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorCode::NonFiniteInput, "sample '" + s.id + "' has a non-finite logit");
    }
    if (s.label.is_class() && s.label.class_index >= c) {
      throw Error(ErrorCode::InvalidArgument, "sample '" + s.id + "' has out-of-range class label");
    }
    if (!ids.insert(s.id).second) throw Error(ErrorCode::DuplicateId, "duplicate sample id '" + s.id + "'");
  }
}

Dataset merge_splits(const Dataset& first, const Dataset& second) {
  if (first.class_names != second.class_names) {
    throw Error(ErrorCode::HeaderMismatch, "splits have different class manifests");
  }
  Dataset out{first.class_names, first.samples};
  out.samples.insert(out.samples.end(), second.samples.begin(), second.samples.end());
  out.validate();
  return out;
}

GaussianStats fit_gaussian(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples,
                "need at least 2 values to fit a Gaussian, got " + std::to_string(values.size()));
  }
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::NonFiniteInput, "non-finite value in Gaussian fit input");
  }
  const auto n = static_cast<double>(values.size());
  const double mean = kernels::sum(values) / n;
  const double variance = kernels::sum_squared_deviations(values, mean) / n;
  return {mean, std::max(std::sqrt(variance), kSigmaFloor), values.size()};
}

ClassScoreFunction::ClassScoreFunction(std::size_t class_index, GaussianStats correct,
                                       GaussianStats wrong)
    : class_index_(class_index), correct_(correct), wrong_(wrong) {
  if (!std::isfinite(correct.mean) || !std::isfinite(wrong.mean) || !std::isfinite(correct.std) ||
      !std::isfinite(wrong.std)) {
    throw Error(ErrorCode::NonFiniteInput, "non-finite score function parameter for class " +
                                               std::to_string(class_index));
  }
  if (correct.std < kSigmaFloor || wrong.std < kSigmaFloor) {
    throw Error(ErrorCode::InvalidArgument,
                "standard deviation below floor for class " + std::to_string(class_index));
  }
  if (!(correct.mean > wrong.mean)) {
    throw Error(ErrorCode::NonDiscriminativeClass,
                "class " + std::to_string(class_index) +
                    ": correct-class mean is not above wrong-class mean");
  }
  log_sigma_ratio_ = std::log(wrong.std / correct.std);
}

double ClassScoreFunction::log_likelihood_ratio(double x) const {
  // Written so that each term is monotone in x on [mu_w, mu_c] under IEEE
  // rounding: zw >= 0 grows, zc <= 0 shrinks in magnitude.
  const double zw = (x - wrong_.mean) / wrong_.std;
  const double zc = (x - correct_.mean) / correct_.std;
  return 0.5 * (zw * zw - zc * zc) + log_sigma_ratio_;
}

double ClassScoreFunction::score(double x) const {
  if (x < wrong_.mean) return -1.0;
  if (x > correct_.mean) return 1.0;
  return std::tanh(0.5 * log_likelihood_ratio(x));
}

void DetectorModel::validate() const {
  validate_class_names(class_names);
  if (score_functions.size() != class_names.size()) {
    throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(score_functions.size()) +
                                                  " score functions for " +
                                                  std::to_string(class_names.size()) + " classes");
  }
  for (std::size_t k = 0; k < score_functions.size(); ++k) {
    if (score_functions[k].class_index() != k) {
      throw Error(ErrorCode::InvalidArgument, "score functions out of class order at position " +
                                                  std::to_string(k));
    }
  }
  if (psi_threshold && !(*psi_threshold > 0.0 && *psi_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "psi_threshold must lie strictly in (0,1)");
  }
}

DetectorModel DetectorModel::with_threshold(double t) const {
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "psi_threshold must lie strictly in (0,1)");
  }
  DetectorModel copy = *this;
  copy.psi_threshold = t;
  return copy;
}

namespace {

std::vector<double> column(const Dataset& d, std::size_t k, auto&& keep) {
  std::vector<double> out;
  for (const auto& s : d.samples) {
    if (keep(s)) out.push_back(s.logits[k]);
  }
  return out;
}

DetectorModel fit_impl(const Dataset& train, const Dataset* negative) {
  train.validate();
  const std::size_t c = train.class_count();
  if (negative != nullptr) {
    if (negative->class_count() != c) {
      throw Error(ErrorCode::DimensionMismatch,
                  "negative source has " + std::to_string(negative->class_count()) +
                      " logit columns, model has " + std::to_string(c));
    }
    negative->validate();
    if (negative->samples.size() < 2) {
      throw Error(ErrorCode::InsufficientSamples, "negative source needs at least 2 samples");
    }
  }

  DetectorModel model;
  model.class_names = train.class_names;
  model.score_functions.reserve(c);
  std::size_t labeled = 0;
  for (const auto& s : train.samples) labeled += s.label.is_class() ? 1 : 0;

  for (std::size_t k = 0; k < c; ++k) {
    const auto& name = train.class_names[k];
    const auto own = column(train, k, [k](const LabeledSample& s) {
      return s.label.is_class() && s.label.class_index == k;
    });
    if (own.size() < 2) {
      throw Error(ErrorCode::InsufficientSamples,
                  "class '" + name + "' has " + std::to_string(own.size()) +
                      " labeled training samples, need at least 2");
    }
    const auto other =
        negative != nullptr
            ? column(*negative, k, [](const LabeledSample&) { return true; })
            : column(train, k, [k](const LabeledSample& s) {
                return s.label.is_class() && s.label.class_index != k;
              });
    const GaussianStats correct = fit_gaussian(own);
    const GaussianStats wrong = fit_gaussian(other);
    if (!(correct.mean > wrong.mean)) {
      throw Error(ErrorCode::NonDiscriminativeClass,
                  "class '" + name + "': correct-class logit mean " + std::to_string(correct.mean) +
                      " is not above wrong-class mean " + std::to_string(wrong.mean));
    }
    model.score_functions.emplace_back(k, correct, wrong);
  }

  model.metadata["train_samples"] = std::to_string(train.samples.size());
  model.metadata["train_labeled_samples"] = std::to_string(labeled);
  model.metadata["wrong_source"] = negative != nullptr ? "negative_source" : "other_classes";
  if (negative != nullptr) {
    model.metadata["negative_samples"] = std::to_string(negative->samples.size());
  }
  return model;
}

}  // namespace

DetectorModel fit_model(const Dataset& train) { return fit_impl(train, nullptr); }

DetectorModel fit_model(const Dataset& train, const Dataset& negative_source) {
  return fit_impl(train, &negative_source);
}

PsVector ps_vector(const DetectorModel& model, std::span<const double> logits) {
  if (logits.size() != model.class_count()) {
    throw Error(ErrorCode::DimensionMismatch, "logit vector has " + std::to_string(logits.size()) +
                                                  " entries, model has " +
                                                  std::to_string(model.class_count()) + " classes");
  }
  PsVector ps(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (!std::isfinite(logits[k])) throw Error(ErrorCode::NonFiniteInput, "non-finite logit");
    ps[k] = model.score_functions[k].score(logits[k]);
  }
  return ps;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace ood
