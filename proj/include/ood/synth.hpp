#pragma once

// Deterministic synthetic logit datasets with known ground truth.
//
// Every value is a pure function of (seed, split, sample index, component),
// so splits can be generated independently and in any order.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ood/core_model.hpp"

namespace ood::synth {

struct GaussianParams {
  double mean = 0.0;
  double std = 1.0;
};

struct ClassProfile {
  std::string name;
  GaussianParams own;    // this class's logit when the sample belongs to it
  GaussianParams cross;  // this class's logit when the sample belongs elsewhere
};

struct SynthSpec {
  std::vector<ClassProfile> classes;
  GaussianParams ood_profile;  // applied to every component of OOD samples
  std::size_t train_per_class = 0;
  std::size_t validation_per_class = 0;
  std::size_t test_per_class = 0;
  std::size_t ood_count = 0;
  std::uint64_t seed = 0;

  std::size_t class_count() const { return classes.size(); }
  std::vector<std::string> class_names() const;

  /// Throws InvalidSpec on any violated invariant.
  void validate() const;
};

/// Spec with C identical classes named "class0".."class{C-1}".
SynthSpec uniform_spec(std::size_t class_count, GaussianParams own, GaussianParams cross,
                       GaussianParams ood, std::size_t per_class, std::size_t ood_count,
                       std::uint64_t seed);

enum class Split : std::uint8_t { Train = 0, Validation = 1, Test = 2, Ood = 3 };

std::string_view to_string(Split split) noexcept;

struct SynthSplits {
  Dataset train;
  Dataset validation;
  Dataset test;
  Dataset ood;
};

Dataset generate_split(const SynthSpec& spec, Split split);
SynthSplits generate(const SynthSpec& spec);

/// Generation-time labels for each sample, recovered from the sample ids
/// alone (the stored label column is not consulted).
std::vector<Label> oracle_labels(const SynthSpec& spec, const Dataset& data);

/// Standard normal draw keyed by (seed, stream, index, component).
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                       std::uint64_t component) noexcept;

/// n independent draws from N(mean, std) under the given seed.
std::vector<double> draw_gaussian(GaussianParams params, std::size_t n, std::uint64_t seed);

}  // namespace ood::synth
