#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "ood/core_model.hpp"
#include "ood/detectors.hpp"

namespace support {

inline std::vector<std::string> class_names(std::size_t c) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < c; ++k) names.push_back("c" + std::to_string(k));
  return names;
}

/// Model whose every class uses the same (mu_w, sigma_w, mu_c, sigma_c).
inline ood::DetectorModel uniform_model(std::size_t c, double mu_w, double sigma_w, double mu_c,
                                        double sigma_c) {
  ood::DetectorModel m;
  m.class_names = class_names(c);
  for (std::size_t k = 0; k < c; ++k) {
    m.score_functions.emplace_back(k, ood::GaussianStats{mu_c, sigma_c, 100},
                                   ood::GaussianStats{mu_w, sigma_w, 100});
  }
  return m;
}

struct TruthAndDecisions {
  ood::Dataset truth;
  std::vector<ood::DetectorDecision> decisions;
};

/// One truth sample and one decision per matrix count: a sample of row i
/// decided as column j. Index `dim - 1` is OOD on both axes.
inline TruthAndDecisions from_matrix(const std::vector<std::string>& names, const fixtures::Matrix& m) {
  const std::size_t c = names.size();
  TruthAndDecisions out;
  out.truth.class_names = names;
  std::size_t serial = 0;
  for (std::size_t i = 0; i <= c; ++i) {
    for (std::size_t j = 0; j <= c; ++j) {
      for (std::size_t n = 0; n < m[i][j]; ++n) {
        const std::string id = "s" + std::to_string(serial++);
        out.truth.samples.push_back(
            {id, i == c ? ood::Label::ood() : ood::Label::of_class(i), std::vector<double>(c, 0.0)});
        ood::DetectorDecision d;
        d.sample_id = id;
        d.is_ood = j == c;
        if (j < c) d.predicted_class = j;
        d.raw_score = 0.5;
        out.decisions.push_back(std::move(d));
      }
    }
  }
  return out;
}

}  // namespace support
