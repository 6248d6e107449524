#include "ood/synth.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "ood/error.hpp"

namespace ood::synth {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform on (0, 1] with 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

constexpr std::uint64_t kDrawStream = 0xd1b54a32d192ed03ULL;

std::string sample_id(Split split, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return std::string(to_string(split)) + "-" + digits;
}

}  // namespace

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    case Split::Ood: return "ood";
  }
  return "";
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index,
                       std::uint64_t component) noexcept {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ stream);
  key = splitmix64(key ^ index);
  key = splitmix64(key ^ component);
  const double u1 = to_unit(splitmix64(key ^ 0x1ULL));
  const double u2 = to_unit(splitmix64(key ^ 0x2ULL));
  // Box-Muller; u1 > 0 so the log is finite.
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<double> draw_gaussian(GaussianParams params, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = params.mean + params.std * standard_normal(seed, kDrawStream, i, 0);
  }
  return out;
}

std::vector<std::string> SynthSpec::class_names() const {
  std::vector<std::string> names;
  names.reserve(classes.size());
  for (const auto& c : classes) names.push_back(c.name);
  return names;
}

void SynthSpec::validate() const {
  try {
    validate_class_names(class_names());
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("synthetic spec: ") + e.what());
  }
  auto check = [](const GaussianParams& g, const std::string& what) {
    if (!std::isfinite(g.mean) || !std::isfinite(g.std) || !(g.std > 0.0)) {
      throw Error(ErrorCode::InvalidSpec, "synthetic spec: " + what + " needs finite mean and std > 0");
    }
  };
  for (const auto& c : classes) {
    check(c.own, "class '" + c.name + "' own profile");
    check(c.cross, "class '" + c.name + "' cross profile");
    if (!(c.own.mean > c.cross.mean)) {
      throw Error(ErrorCode::InvalidSpec,
                  "synthetic spec: class '" + c.name + "' own mean must exceed its cross mean");
    }
  }
  check(ood_profile, "OOD profile");
}

SynthSpec uniform_spec(std::size_t class_count, GaussianParams own, GaussianParams cross,
                       GaussianParams ood, std::size_t per_class, std::size_t ood_count,
                       std::uint64_t seed) {
  SynthSpec spec;
  for (std::size_t k = 0; k < class_count; ++k) {
    spec.classes.push_back({"class" + std::to_string(k), own, cross});
  }
  spec.ood_profile = ood;
  spec.train_per_class = per_class;
  spec.validation_per_class = per_class;
  spec.test_per_class = per_class;
  spec.ood_count = ood_count;
  spec.seed = seed;
  return spec;
}

Dataset generate_split(const SynthSpec& spec, Split split) {
  spec.validate();
  const std::size_t c = spec.class_count();
  std::size_t n = 0;
  switch (split) {
    case Split::Train: n = spec.train_per_class * c; break;
    case Split::Validation: n = spec.validation_per_class * c; break;
    case Split::Test: n = spec.test_per_class * c; break;
    case Split::Ood: n = spec.ood_count; break;
  }
  const auto stream = static_cast<std::uint64_t>(split);

  Dataset data;
  data.class_names = spec.class_names();
  data.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LabeledSample s;
    s.id = sample_id(split, i);
    s.logits.resize(c);
    if (split == Split::Ood) {
      s.label = Label::ood();
      for (std::size_t j = 0; j < c; ++j) {
        s.logits[j] = spec.ood_profile.mean + spec.ood_profile.std * standard_normal(spec.seed, stream, i, j);
      }
    } else {
      const std::size_t k = i % c;
      s.label = Label::of_class(k);
      for (std::size_t j = 0; j < c; ++j) {
        const GaussianParams& g = j == k ? spec.classes[j].own : spec.classes[j].cross;
        s.logits[j] = g.mean + g.std * standard_normal(spec.seed, stream, i, j);
      }
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

SynthSplits generate(const SynthSpec& spec) {
  return {generate_split(spec, Split::Train), generate_split(spec, Split::Validation),
          generate_split(spec, Split::Test), generate_split(spec, Split::Ood)};
}

std::vector<Label> oracle_labels(const SynthSpec& spec, const Dataset& data) {
  const std::size_t c = spec.class_count();
  std::vector<Label> labels;
  labels.reserve(data.samples.size());
  for (const auto& s : data.samples) {
    const auto dash = s.id.rfind('-');
    std::size_t index = 0;
    const char* first = s.id.data() + dash + 1;
    const char* last = s.id.data() + s.id.size();
    if (dash == std::string::npos || std::from_chars(first, last, index).ptr != last) {
      throw Error(ErrorCode::InvalidArgument, "sample id '" + s.id + "' is not a synthetic id");
    }
    const std::string_view prefix(s.id.data(), dash);
    if (prefix == to_string(Split::Ood)) {
      labels.push_back(Label::ood());
    } else if (prefix == to_string(Split::Train) || prefix == to_string(Split::Validation) ||
               prefix == to_string(Split::Test)) {
      labels.push_back(Label::of_class(index % c));
    } else {
      throw Error(ErrorCode::InvalidArgument, "sample id '" + s.id + "' has an unknown split prefix");
    }
  }
  return labels;
}

}  // namespace ood::synth
