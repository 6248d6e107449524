#include <gtest/gtest.h>

#include <bit>
#include <charconv>
#include <filesystem>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ood/error.hpp"
#include "ood/io_formats.hpp"
#include "ood/synth.hpp"
#include "support.hpp"

using namespace ood;
namespace fs = std::filesystem;

namespace {

template <typename F>
std::pair<ErrorCode, std::string> failure(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  ADD_FAILURE() << "no ood::Error thrown";
  return {ErrorCode::Io, ""};
}

// from_chars accepts subnormals, unlike stod.
double reparse(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  EXPECT_TRUE(ec == std::errc() && ptr == text.data() + text.size()) << text;
  return v;
}

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return io::parse_logits(in, "t.csv");
}

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / ("ood_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                                "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Logits, WellFormedFile) {
  const auto d = parse("id,label,logit_a,logit_b\ns1,a,1.5,-2\ns2,__OOD__,0,3e2\ns3,?,1,1\n");
  ASSERT_EQ(d.samples.size(), 3u);
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.samples[0].label, Label::of_class(0));
  EXPECT_TRUE(d.samples[1].label.is_ood());
  EXPECT_EQ(d.samples[1].logits[1], 300.0);
  EXPECT_EQ(d.samples[2].label, Label::unknown());
}

TEST(Logits, LocatedDiagnostics) {
  auto [code, msg] = failure([] { parse("id,label,logit_a,logit_b\ns1,a,1.5,x\n"); });
  EXPECT_EQ(code, ErrorCode::NonNumericValue);
  EXPECT_NE(msg.find("t.csv:2:4"), std::string::npos) << msg;
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,logit_b\ns1,a,1,2\ns1,b,1,2\n"); });
  EXPECT_EQ(code, ErrorCode::DuplicateId);
  EXPECT_NE(msg.find("t.csv:3"), std::string::npos) << msg;
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,logit_b\ns1,z,1,2\n"); });
  EXPECT_EQ(code, ErrorCode::UnknownLabel);
  std::tie(code, msg) = failure([] { parse("id,cls,logit_a,logit_b\n"); });
  EXPECT_EQ(code, ErrorCode::HeaderMismatch);
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,score_b\n"); });
  EXPECT_EQ(code, ErrorCode::HeaderMismatch);
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,logit_a\n"); });
  EXPECT_EQ(code, ErrorCode::HeaderMismatch);
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,logit_b\ns1,a,1\n"); });
  EXPECT_EQ(code, ErrorCode::MalformedRow);
  std::tie(code, msg) = failure([] { parse("id,label,logit_a,logit_b\ns1,a,1,inf\n"); });
  EXPECT_EQ(code, ErrorCode::NonNumericValue);
  std::tie(code, msg) = failure([] { parse(""); });
  EXPECT_EQ(code, ErrorCode::HeaderMismatch);
}

TEST(Logits, WriteReadWriteIsByteStable) {
  auto spec = synth::uniform_spec(3, {5, 1}, {0, 1}, {0, 1}, 20, 20, 4);
  const auto s = synth::generate(spec);
  const auto d = merge_splits(s.test, s.ood);
  std::ostringstream first;
  io::write_logits(first, d);
  const auto back = parse(first.str());
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    ASSERT_EQ(back.samples[i].logits, d.samples[i].logits);
    ASSERT_EQ(back.samples[i].label, d.samples[i].label);
  }
  std::ostringstream second;
  io::write_logits(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Numbers, ShortestAndSeventeenDigitFormsRoundTrip) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::bit_cast<double>(rng());
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(reparse(io::format_shortest(v)), v);
    EXPECT_EQ(reparse(io::format_17(v)), v);
  }
  EXPECT_EQ(io::format_shortest(0.1), "0.1");
  EXPECT_EQ(io::format_17(0.5), "0.50000000000000000");
}

TEST(Model, RoundTripGivesZeroUlpScores) {
  auto spec = synth::uniform_spec(4, {5, 1.3}, {0, 0.7}, {0, 1}, 200, 0, 10);
  const auto model = fit_model(synth::generate_split(spec, synth::Split::Train)).with_threshold(0.999828);
  const auto back = io::model_from_json(io::model_to_json(model));
  EXPECT_EQ(back, model);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 8);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
    const auto a = ps_vector(model, x), b = ps_vector(back, x);
    for (std::size_t k = 0; k < 4; ++k) ASSERT_EQ(std::bit_cast<std::uint64_t>(a[k]), std::bit_cast<std::uint64_t>(b[k]));
  }
  EXPECT_EQ(io::model_to_json(back), io::model_to_json(model));
}

TEST(Model, ThresholdAbsentStaysAbsent) {
  const auto model = support::uniform_model(2, 0, 1, 10, 1);
  const auto text = io::model_to_json(model);
  EXPECT_EQ(text.find("psi_threshold"), std::string::npos);
  EXPECT_FALSE(io::model_from_json(text).psi_threshold.has_value());
}

TEST(Model, SchemaViolations) {
  const auto good = nlohmann::ordered_json::parse(io::model_to_json(support::uniform_model(2, 0, 1, 10, 1)));
  auto check = [](nlohmann::ordered_json doc, ErrorCode expected, std::string_view where) {
    const auto [code, msg] = failure([&] { io::model_from_json(doc.dump(), "m.json"); });
    EXPECT_EQ(code, expected) << msg;
    EXPECT_NE(msg.find(where), std::string::npos) << msg;
  };
  auto doc = good;
  doc["classes"][1]["sigma_wrong"] = 0.0;
  check(doc, ErrorCode::SchemaViolation, "$.classes[1].sigma_wrong");
  doc = good;
  doc["classes"][0]["sigma_correct"] = -1.0;
  check(doc, ErrorCode::SchemaViolation, "sigma_correct");
  doc = good;
  doc["format_version"] = "2.0";
  check(doc, ErrorCode::VersionMismatch, "format_version");
  doc = good;
  doc["format_version"] = "1.7";
  EXPECT_NO_THROW(io::model_from_json(doc.dump()));
  doc = good;
  doc["classes"][0]["mu_correct"] = -5.0;
  check(doc, ErrorCode::SchemaViolation, "mu_correct");
  doc = good;
  doc["psi_threshold"] = 1.0;
  check(doc, ErrorCode::SchemaViolation, "psi_threshold");
  doc = good;
  doc.erase("class_names");
  check(doc, ErrorCode::SchemaViolation, "class_names");
  doc = good;
  doc["format"] = "something-else";
  check(doc, ErrorCode::SchemaViolation, "$.format");
  const auto [code, msg] = failure([] { io::model_from_json("{not json", "m.json"); });
  EXPECT_EQ(code, ErrorCode::SchemaViolation);
}

TEST(Calibration, RoundTrip) {
  const CalibrationResult r{DetectorKind::Energy, 0.9, 23.01, 0.9166666666666666, 12, 11};
  EXPECT_EQ(io::calibration_from_json(io::calibration_to_json(r)), r);
  const CalibrationResult p{DetectorKind::Psi, 0.75, 0.999828, 0.75, 4, 3};
  EXPECT_EQ(io::calibration_from_json(io::calibration_to_json(p)), p);
}

TEST(Decisions, RoundTrip) {
  auto spec = synth::uniform_spec(3, {5, 1}, {0, 1}, {0, 1}, 30, 30, 4);
  const auto s = synth::generate(spec);
  const auto model = fit_model(s.train).with_threshold(0.99);
  const auto data = merge_splits(s.test, s.ood);
  for (const Detector& det : {Detector::psi(model), Detector::baseline({DetectorKind::Energy, 4.0})}) {
    const auto decisions = det.decide_all(data);
    std::stringstream buf;
    io::write_decisions(buf, data.class_names, decisions);
    const auto back = io::parse_decisions(buf, data.class_names);
    EXPECT_EQ(back, decisions);
  }
  std::istringstream bad("id,is_ood,predicted_class,raw_score,code,subtype\na,maybe,,0.5,,\n");
  EXPECT_EQ(failure([&] { io::parse_decisions(bad, data.class_names); }).first, ErrorCode::MalformedRow);
}

TEST(Reports, EvalReportCarriesExactCounts) {
  const auto td = support::from_matrix(fixtures::kVirusClasses, fixtures::kVirusLowThreshold.cells);
  const auto report = evaluate(td.decisions, td.truth);
  const auto doc = nlohmann::json::parse(io::eval_report_to_json(report, {DetectorKind::Psi, 0.9}));
  EXPECT_EQ(doc["counts"]["n_ood_flagged"], 456);
  EXPECT_EQ(doc["counts"]["n_ood"], 715);
  EXPECT_EQ(doc["ood_detection_rate"]["display"], "0.638");
  EXPECT_EQ(doc["ood_detection_rate"]["numerator"], 456);
  EXPECT_EQ(doc["ood_detection_rate"]["denominator"], 715);
  EXPECT_EQ(doc["ood_detection_rate"]["value"].get<double>(), 456.0 / 715.0);
  EXPECT_EQ(doc["confusion"]["total"], 2615);
  EXPECT_EQ(doc["confusion"]["matrix"][14][6], 99);
  EXPECT_EQ(doc["confusion"]["column_totals"][14], 744);
  EXPECT_EQ(doc["confusion"]["labels"][14], "OOD");
}

TEST(Reports, SweepRowsMatchGrid) {
  auto spec = synth::uniform_spec(3, {5, 1}, {0, 1}, {0, 1}, 30, 30, 4);
  const auto s = synth::generate(spec);
  const auto grid = probability_grid(1, 6, 1);
  const auto rows = threshold_sweep(fit_model(s.train), s.test, s.ood, grid);
  const auto doc = nlohmann::json::parse(
      io::sweep_to_json(rows, DetectorKind::Psi, std::pair{SweepMetric::WeightedAccuracy, std::size_t{2}}));
  EXPECT_EQ(doc["rows"].size(), grid.size());
  EXPECT_EQ(doc["rows"][0]["threshold"].get<double>(), grid[0]);
  EXPECT_EQ(doc["best"]["index"], 2);
}

TEST(Reports, DistributionReportDocument) {
  auto spec = synth::uniform_spec(2, {5, 1}, {0, 1}, {0, 1}, 30, 0, 4);
  const auto s = synth::generate(spec);
  const auto model = fit_model(s.train);
  const std::vector<NamedSplit> splits{{"train", std::cref(s.train)}};
  const auto doc = nlohmann::json::parse(io::distribution_report_to_json(distribution_report(model, splits)));
  ASSERT_EQ(doc["classes"].size(), 2u);
  const auto& split = doc["classes"][0]["splits"][0];
  EXPECT_FALSE(split.contains("ood_counts"));
  std::size_t n = 0;
  for (const auto& c : split["correct_counts"]) n += c.get<std::size_t>();
  for (const auto& c : split["wrong_counts"]) n += c.get<std::size_t>();
  EXPECT_EQ(n, 60u);
}

TEST(SynthSpecDocument, ShorthandAndRoundTrip) {
  const auto spec = io::synth_spec_from_json(R"({"class_count": 3, "own": {"mean": 5, "std": 1},
      "cross": {"mean": 0, "std": 1}, "ood_profile": {"mean": 0, "std": 2},
      "counts": {"train": 4, "validation": 5, "test": 6, "ood": 7}, "seed": 11})");
  EXPECT_EQ(spec.class_count(), 3u);
  EXPECT_EQ(spec.test_per_class, 6u);
  EXPECT_EQ(spec.seed, 11u);
  const auto again = io::synth_spec_from_json(io::synth_spec_to_json(spec));
  EXPECT_EQ(io::synth_spec_to_json(again), io::synth_spec_to_json(spec));
  EXPECT_THROW(io::synth_spec_from_json(R"({"class_count": 3})"), Error);
}

TEST(Files, UnwritablePathAndMissingFile) {
  const auto dir = temp_dir();
  EXPECT_EQ(failure([&] { io::write_text(dir / "no" / "such" / "dir" / "x.json", "{}"); }).first, ErrorCode::Io);
  EXPECT_EQ(failure([&] { io::read_logits(dir / "missing.csv"); }).first, ErrorCode::Io);
  const auto model = support::uniform_model(2, 0, 1, 10, 1);
  io::write_model(dir / "m.json", model);
  EXPECT_EQ(io::read_model(dir / "m.json"), model);
  fs::remove_all(dir);
}
