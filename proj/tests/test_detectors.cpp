#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ood/detectors.hpp"
#include "ood/error.hpp"
#include "ood/synth.hpp"
#include "support.hpp"

using namespace ood;

namespace {

struct OracleVerdict {
  std::string code;
  std::string subtype;
  int predicted;  // -1 when absent
};

// Rule table written out as category counts, independent of the library.
OracleVerdict rule_oracle(const std::vector<double>& ps, double t) {
  int high = 0, low_pos = 0, low_neg = 0, high_index = -1;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (ps[i] >= t) {
      ++high;
      high_index = static_cast<int>(i);
    } else if (ps[i] > 0.0) {
      ++low_pos;
    } else if (ps[i] > -t) {
      ++low_neg;
    }
  }
  if (high >= 2) return {"Red", "ConfusingEvidence", -1};
  if (high == 1 && low_pos >= 1) return {"Yellow", "BorderCaseYellow", high_index};
  if (high == 1 && low_neg >= 1) return {"Green", "BorderCaseGreen", high_index};
  if (high == 1) return {"Green", "ClearResult", high_index};
  if (low_pos >= 1) return {"Red", "NotEnoughEvidence", -1};
  return {"Red", "OodSample", -1};
}

std::vector<double> logits_with_max_softmax(double p) {
  // Two classes: softmax of {log(p / (1 - p)), 0} is {p, 1 - p}.
  return {std::log(p / (1.0 - p)), 0.0};
}

}  // namespace

TEST(Softmax, WorkedExamples) {
  const auto a = softmax(std::vector<double>{6, 5, 0, 1});
  const std::vector<double> ea{0.726, 0.267, 0.002, 0.005};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], ea[i], 1e-3);
  const auto b = softmax(std::vector<double>{1000006, 1000005, 0, 1});
  const std::vector<double> eb{0.731, 0.269, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(std::isfinite(b[i]));
    EXPECT_NEAR(b[i], eb[i], 1e-3);
  }
  for (double v : softmax(std::vector<double>{0, 0, 0, 0})) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, ShiftInvarianceAndNormalization) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-30, 30), shift(-1000, 1000);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(1 + i % 7);
    for (auto& v : x) v = u(rng);
    const double c = shift(rng);
    std::vector<double> y = x;
    for (auto& v : y) v += c;
    const auto px = softmax(x), py = softmax(y);
    double sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_NEAR(px[k], py[k], 1e-12);
      EXPECT_GE(px[k], 0.0);
      EXPECT_LE(px[k], 1.0);
      sum += px[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Energy, WorkedExamples) {
  EXPECT_NEAR(energy_score(std::vector<double>{0, 0}), std::log(2.0), 1e-15);
  EXPECT_EQ(energy_score(std::vector<double>{-3.5}), -3.5);
  const double oracle = 6.0 + std::log(1.0 + std::exp(-1.0) + std::exp(-6.0) + std::exp(-5.0));
  EXPECT_NEAR(energy_score(std::vector<double>{6, 5, 0, 1}), oracle, 1e-12);
  EXPECT_NEAR(energy_score(std::vector<double>{6, 5, 0, 1}), 6.3199770, 1e-5);
}

TEST(Energy, ShiftCovarianceAndDecisionFlip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20, 20), shift(-500, 500);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(2 + i % 6);
    for (auto& v : x) v = u(rng);
    const double c = shift(rng);
    std::vector<double> y = x;
    for (auto& v : y) v += c;
    EXPECT_NEAR(energy_score(y), energy_score(x) + c, 1e-9);
  }
  const BaselineConfig cfg{DetectorKind::Energy, 23.01};
  EXPECT_FALSE(energy_detect(cfg, "a", std::vector<double>{30, 2, 1}).is_ood);
  EXPECT_NEAR(energy_detect(cfg, "a", std::vector<double>{30, 2, 1}).raw_score, 30.0, 1e-6);
  EXPECT_TRUE(energy_detect(cfg, "b", std::vector<double>{5, 4, 3}).is_ood);
  // Shifting {5,4,3} by just enough to cross tau flips the decision.
  const double s = energy_score(std::vector<double>{5, 4, 3});
  const double up = 23.01 - s + 1e-6, down = 23.01 - s - 1e-6;
  EXPECT_FALSE(energy_detect(cfg, "c", std::vector<double>{5 + up, 4 + up, 3 + up}).is_ood);
  EXPECT_TRUE(energy_detect(cfg, "d", std::vector<double>{5 + down, 4 + down, 3 + down}).is_ood);
}

TEST(MaxSoftmax, WorkedExamples) {
  const BaselineConfig strict{DetectorKind::MaxSoftmax, 0.999997};
  auto d = max_softmax_detect(strict, "f5-1", logits_with_max_softmax(0.999863));
  EXPECT_TRUE(d.is_ood);
  EXPECT_NEAR(d.raw_score, 0.999863, 1e-12);
  EXPECT_FALSE(d.predicted_class.has_value());
  const BaselineConfig six{DetectorKind::MaxSoftmax, 1.0 - 1e-6};
  EXPECT_TRUE(max_softmax_detect(six, "f5-3", logits_with_max_softmax(0.982145)).is_ood);
  const BaselineConfig loose{DetectorKind::MaxSoftmax, 0.2};
  d = max_softmax_detect(loose, "u", std::vector<double>{1, 1, 1, 1});
  EXPECT_FALSE(d.is_ood);
  EXPECT_DOUBLE_EQ(d.raw_score, 0.25);
  EXPECT_EQ(d.predicted_class, 0u);
}

TEST(Interpret, WorkedExamples) {
  const double t = 0.999;
  auto v = interpret(std::vector<double>{0.9999, -0.999, -0.999}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Green, VerdictSubtype::ClearResult, 0}));
  v = interpret(std::vector<double>{0.9999, 0.5, -0.9}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Yellow, VerdictSubtype::BorderCaseYellow, 0}));
  v = interpret(std::vector<double>{0.9999, 0.9999, -0.9}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Red, VerdictSubtype::ConfusingEvidence, std::nullopt}));
  v = interpret(std::vector<double>{-0.2, -0.9, -0.9}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Red, VerdictSubtype::OodSample, std::nullopt}));
  v = interpret(std::vector<double>{0.5, -0.2, -0.9}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Red, VerdictSubtype::NotEnoughEvidence, std::nullopt}));
  v = interpret(std::vector<double>{-0.9999, 0.9999, -0.5}, t);
  EXPECT_EQ(v, (Verdict{VerdictCode::Green, VerdictSubtype::BorderCaseGreen, 1}));
  // Zero is non-positive.
  v = interpret(std::vector<double>{0.0, -1.0}, t);
  EXPECT_EQ(v.subtype, VerdictSubtype::OodSample);
}

TEST(Interpret, ExhaustiveAgainstRuleOracle) {
  for (double t : {0.1, 0.5, 0.9, 0.999, 1.0 - 1e-13}) {
    const std::vector<double> reps{1.0, t, std::nextafter(t, 0.0), t / 2, 0.0,
                                   -t / 2, std::nextafter(-t, 0.0), -t, -1.0};
    for (std::size_t c = 1; c <= 5; ++c) {
      std::vector<std::size_t> idx(c, 0);
      while (true) {
        std::vector<double> ps(c);
        for (std::size_t i = 0; i < c; ++i) ps[i] = reps[idx[i]];
        const Verdict v = interpret(ps, t);
        const OracleVerdict o = rule_oracle(ps, t);
        ASSERT_EQ(to_string(v.code), o.code);
        ASSERT_EQ(to_string(v.subtype), o.subtype);
        ASSERT_EQ(code_of(v.subtype), v.code);
        ASSERT_EQ(v.predicted_class.has_value(), v.code != VerdictCode::Red);
        if (o.predicted >= 0) {
          ASSERT_EQ(*v.predicted_class, static_cast<std::size_t>(o.predicted));
          ASSERT_EQ(*v.predicted_class, argmax(ps));
        }
        std::size_t pos = 0;
        while (pos < c && ++idx[pos] == reps.size()) idx[pos++] = 0;
        if (pos == c) break;
      }
    }
  }
}

TEST(Interpret, RejectsBadInput) {
  EXPECT_THROW(interpret(std::vector<double>{0.5}, 1.0), Error);
  EXPECT_THROW(interpret(std::vector<double>{1.5}, 0.5), Error);
  EXPECT_THROW(interpret(std::vector<double>{}, 0.5), Error);
}

TEST(PsiDetect, ClampConstructions) {
  const auto m = support::uniform_model(4, 0, 1, 10, 1).with_threshold(0.9);
  auto d = psi_detect(m, "id", std::vector<double>{-1, -2, 12, -0.5});
  EXPECT_FALSE(d.is_ood);
  EXPECT_EQ(d.predicted_class, 2u);
  EXPECT_EQ(d.raw_score, 1.0);
  EXPECT_EQ(d.verdict->subtype, VerdictSubtype::ClearResult);
  EXPECT_EQ(d.predicted_class, argmax(std::vector<double>{-1, -2, 12, -0.5}));
  d = psi_detect(m, "ood", std::vector<double>{-1, -2, -3, -0.5});
  EXPECT_TRUE(d.is_ood);
  EXPECT_EQ(d.verdict->subtype, VerdictSubtype::OodSample);
  EXPECT_FALSE(d.predicted_class.has_value());
}

TEST(PsiDetect, UncalibratedModelRejected) {
  const auto m = support::uniform_model(2, 0, 1, 10, 1);
  try {
    Detector::psi(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UncalibratedModel);
  }
  EXPECT_THROW(psi_detect(m, "x", std::vector<double>{1, 2}), Error);
}

TEST(PsiDetect, BatchEqualsComposition) {
  auto spec = synth::uniform_spec(4, {5, 1}, {0, 1}, {0, 1.5}, 50, 200, 12);
  const auto splits = synth::generate(spec);
  const auto model = fit_model(splits.train).with_threshold(0.99);
  const Detector det = Detector::psi(model);
  const auto data = merge_splits(splits.test, splits.ood);
  const auto decisions = det.decide_all(data);
  ASSERT_EQ(decisions.size(), data.samples.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto ps = ps_vector(model, data.samples[i].logits);
    const Verdict v = interpret(ps, 0.99);
    EXPECT_EQ(decisions[i].sample_id, data.samples[i].id);
    EXPECT_EQ(*decisions[i].verdict, v);
    EXPECT_EQ(decisions[i].is_ood, v.code == VerdictCode::Red);
    EXPECT_EQ(decisions[i].predicted_class, v.predicted_class);
  }
}

TEST(Detector, KindsAndStrings) {
  EXPECT_EQ(parse_detector_kind("msp"), DetectorKind::MaxSoftmax);
  EXPECT_EQ(parse_detector_kind("energy"), DetectorKind::Energy);
  EXPECT_EQ(parse_detector_kind("psi"), DetectorKind::Psi);
  EXPECT_FALSE(parse_detector_kind("odin").has_value());
  for (auto s : {VerdictSubtype::ClearResult, VerdictSubtype::BorderCaseGreen, VerdictSubtype::BorderCaseYellow,
                 VerdictSubtype::ConfusingEvidence, VerdictSubtype::NotEnoughEvidence, VerdictSubtype::OodSample}) {
    EXPECT_EQ(parse_verdict_subtype(to_string(s)), s);
  }
  EXPECT_EQ(Detector::baseline({DetectorKind::Energy, 1.0}).kind(), DetectorKind::Energy);
  EXPECT_THROW(Detector::baseline({DetectorKind::MaxSoftmax, 1.5}), Error);
  EXPECT_THROW(Detector::baseline({DetectorKind::Psi, 0.5}), Error);
}
