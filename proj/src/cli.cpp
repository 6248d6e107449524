#include "ood/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "ood/calibration.hpp"
#include "ood/core_model.hpp"
#include "ood/detectors.hpp"
#include "ood/error.hpp"
#include "ood/evaluation.hpp"
#include "ood/io_formats.hpp"
#include "ood/synth.hpp"

namespace ood::cli {

namespace {

namespace fs = std::filesystem;

// Bad flag values detected after CLI11 parsing; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string train, validation, test, ood, model, out, negative_set, spec, decisions, calibration,
      report, grid, select_best;
  std::string detector = "psi";
  double coverage = 0.75;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
};

double parse_number(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("--grid: '" + s + "' is not a number");
  }
  if (used != s.size()) throw UsageError("--grid: '" + s + "' is not a number");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

// "v1,v2,..." | "neglog10:START:STOP:STEP" (1 - 10^-x) | "linear:START:STOP:STEP"
std::vector<double> parse_grid(std::string_view spec) {
  const auto parts = split(spec, ':');
  try {
    if (parts.size() == 4 && (parts[0] == "neglog10" || parts[0] == "linear")) {
      const double a = parse_number(parts[1]);
      const double b = parse_number(parts[2]);
      const double step = parse_number(parts[3]);
      return parts[0] == "linear" ? linear_grid(a, b, step) : probability_grid(a, b, step);
    }
  } catch (const Error& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  if (parts.size() != 1) throw UsageError("--grid: expected a list or neglog10:/linear:START:STOP:STEP");
  std::vector<double> grid;
  for (auto item : split(spec, ',')) grid.push_back(parse_number(item));
  return grid;
}

DetectorKind detector_kind(const Options& o) {
  const auto kind = parse_detector_kind(o.detector);
  if (!kind) throw UsageError("--detector must be psi, msp or energy");
  return *kind;
}

void require(const std::string& value, std::string_view flag, std::string_view why) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required " + std::string(why));
}

Dataset load_split(const std::string& path) { return io::read_logits(path); }

// The detector for detect/eval: PSI from a model, baselines from a threshold
// or a calibration result.
Detector make_detector(const Options& o, DetectorKind kind) {
  if (kind == DetectorKind::Psi) {
    require(o.model, "--model", "for the psi detector");
    DetectorModel model = io::read_model(o.model);
    if (o.threshold) model = model.with_threshold(*o.threshold);
    return Detector::psi(std::move(model));
  }
  double threshold = 0.0;
  if (o.threshold) {
    threshold = *o.threshold;
  } else if (!o.calibration.empty()) {
    const CalibrationResult c = io::read_calibration(o.calibration);
    if (c.detector != kind) {
      throw Error(ErrorCode::InvalidArgument, "calibration file '" + o.calibration + "' is for detector '" +
                                                  std::string(to_string(c.detector)) + "'");
    }
    threshold = c.chosen_threshold;
  } else {
    throw UsageError("--threshold or --calibration is required for baseline detectors");
  }
  return Detector::baseline({kind, threshold});
}

void print_calibration(std::ostream& out, const CalibrationResult& c) {
  out << "detector " << to_string(c.detector) << ": threshold " << io::format_17(c.chosen_threshold)
      << " flags " << c.flagged_count << "/" << c.misclassified_count
      << " misclassified validation samples (coverage " << c.achieved_coverage << ", target "
      << c.coverage_target << ")\n";
}

void print_eval(std::ostream& out, const EvalReport& r) {
  out << "classification_accuracy " << format_thousandths(r.classification_accuracy_thousandths()) << " ("
      << r.n_correct << "/" << r.n_test << ")\n"
      << "ood_detection_rate " << format_thousandths(r.ood_detection_rate_thousandths()) << " ("
      << r.n_ood_flagged << "/" << r.n_ood << ")\n"
      << "weighted_accuracy " << format_thousandths(r.weighted_accuracy_thousandths()) << "\n";
}

int cmd_fit(const Options& o, std::ostream& out) {
  const Dataset train = load_split(o.train);
  DetectorModel model = o.negative_set.empty() ? fit_model(train) : fit_model(train, load_split(o.negative_set));
  model.metadata["train_source"] = fs::path(o.train).filename().string();
  if (!o.negative_set.empty()) model.metadata["negative_source"] = fs::path(o.negative_set).filename().string();
  io::write_model(o.out, model);
  out << "fitted " << model.class_count() << " classes from " << train.samples.size() << " samples -> "
      << o.out << "\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o, std::ostream& out) {
  const DetectorKind kind = detector_kind(o);
  if (!(o.coverage > 0.0)) throw UsageError("--coverage must lie in (0,1]");
  CalibrationSpec spec;
  spec.coverage_target = o.coverage;
  if (!o.grid.empty()) spec.grid = parse_grid(o.grid);
  const Dataset validation = load_split(o.validation);

  CalibrationResult result;
  if (kind == DetectorKind::Psi) {
    require(o.model, "--model", "for psi calibration");
    const auto calibrated = calibrate_psi(io::read_model(o.model), validation, spec);
    result = calibrated.result;
    io::write_model(o.out, calibrated.model);
    if (!o.report.empty()) io::write_calibration(o.report, result);
  } else {
    const auto wrong = misclassified_subset(validation);
    result = calibrate_baseline(kind, baseline_scores(kind, wrong), spec);
    io::write_calibration(o.out, result);
  }
  print_calibration(out, result);
  return kExitOk;
}

Dataset detect_inputs(const Options& o) {
  if (o.test.empty() && o.ood.empty()) throw UsageError("--test and/or --ood is required");
  if (o.ood.empty()) return load_split(o.test);
  if (o.test.empty()) return load_split(o.ood);
  return merge_splits(load_split(o.test), load_split(o.ood));
}

int cmd_detect(const Options& o, std::ostream& out) {
  const DetectorKind kind = detector_kind(o);
  const Detector detector = make_detector(o, kind);
  const Dataset data = detect_inputs(o);
  const auto decisions = detector.decide_all(data);
  io::write_decisions(o.out, data.class_names, decisions);
  const auto flagged = std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return d.is_ood; });
  out << decisions.size() << " decisions (" << flagged << " flagged OOD) -> " << o.out << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const Dataset truth = merge_splits(load_split(o.test), load_split(o.ood));
  std::vector<DetectorDecision> decisions;
  io::ReportContext context;
  if (!o.decisions.empty()) {
    decisions = io::read_decisions(o.decisions, truth.class_names);
  } else {
    const DetectorKind kind = detector_kind(o);
    const Detector detector = make_detector(o, kind);
    decisions = detector.decide_all(truth);
    context.detector = kind;
  }
  const EvalReport report = evaluate(decisions, truth);
  if (!o.out.empty()) io::write_report(o.out, report, context);
  print_eval(out, report);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const DetectorKind kind = detector_kind(o);
  const Dataset test = load_split(o.test);
  const Dataset ood = load_split(o.ood);
  std::optional<SweepMetric> metric;
  if (!o.select_best.empty()) {
    metric = parse_sweep_metric(o.select_best);
    if (!metric) {
      throw UsageError("--select-best must be weighted_accuracy, classification_accuracy or ood_detection_rate");
    }
  }

  std::vector<double> grid;
  if (!o.grid.empty()) {
    grid = parse_grid(o.grid);
  } else if (kind == DetectorKind::Energy) {
    // 101 evenly spaced thresholds over the observed score range.
    std::vector<double> scores = baseline_scores(kind, test.samples);
    const auto more = baseline_scores(kind, ood.samples);
    scores.insert(scores.end(), more.begin(), more.end());
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    grid = *hi > *lo ? linear_grid(*lo, *hi, (*hi - *lo) / 100.0) : std::vector<double>{*lo};
  } else {
    grid = default_probability_grid();
  }

  std::vector<SweepRow> rows;
  if (kind == DetectorKind::Psi) {
    require(o.model, "--model", "for the psi sweep");
    rows = threshold_sweep(io::read_model(o.model), test, ood, grid);
  } else {
    rows = baseline_sweep(kind, test, ood, grid);
  }
  std::optional<std::pair<SweepMetric, std::size_t>> best;
  if (metric) best = std::pair{*metric, select_best(rows, *metric)};
  io::write_report(o.out, rows, kind, best);
  out << rows.size() << " thresholds swept -> " << o.out << "\n";
  if (best) {
    const auto& row = rows[best->second];
    out << "best " << to_string(best->first) << " at threshold " << io::format_17(row.threshold) << "\n";
    print_eval(out, row.report);
  }
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  synth::SynthSpec spec = io::read_synth_spec(o.spec);
  if (o.seed) spec.seed = *o.seed;
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + o.out + "': " + ec.message());
  const auto splits = synth::generate(spec);
  io::write_logits(dir / "train.csv", splits.train);
  io::write_logits(dir / "validation.csv", splits.validation);
  io::write_logits(dir / "test.csv", splits.test);
  io::write_logits(dir / "ood.csv", splits.ood);
  out << "wrote train/validation/test/ood splits (" << splits.train.samples.size() << "/"
      << splits.validation.samples.size() << "/" << splits.test.samples.size() << "/"
      << splits.ood.samples.size() << " samples) -> " << o.out << "\n";
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const DetectorModel model = io::read_model(o.model);
  std::vector<std::pair<std::string, Dataset>> loaded;
  for (const auto& [name, path] : {std::pair<std::string, std::string>{"train", o.train},
                                   {"validation", o.validation},
                                   {"test", o.test},
                                   {"ood", o.ood}}) {
    if (!path.empty()) loaded.emplace_back(name, load_split(path));
  }
  if (loaded.empty()) throw UsageError("report needs at least one of --train/--validation/--test/--ood");
  std::vector<NamedSplit> splits;
  for (const auto& [name, data] : loaded) splits.push_back({name, std::cref(data)});
  io::write_report(o.out, distribution_report(model, splits));
  out << "distribution report for " << model.class_count() << " classes over " << splits.size()
      << " splits -> " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Out-of-distribution detection from classifier logits"};
  app.name("ood-psi");
  app.require_subcommand(1);
  Options o;

  auto path = [&](CLI::App* cmd, const std::string& flag, std::string& target, const std::string& help,
                  bool required) {
    auto* opt = cmd->add_option(flag, target, help);
    if (required) opt->required();
    return opt;
  };
  auto detector = [&](CLI::App* cmd) {
    cmd->add_option("--detector", o.detector, "psi, msp or energy")
        ->check(CLI::IsMember({"psi", "msp", "energy"}))
        ->capture_default_str();
  };
  auto threshold = [&](CLI::App* cmd) {
    cmd->add_option("--threshold", o.threshold, "explicit detector threshold");
    cmd->add_option("--calibration", o.calibration, "baseline calibration result (JSON)");
  };

  auto* fit = app.add_subcommand("fit", "fit per-class score functions from training logits");
  path(fit, "--train", o.train, "training logits (CSV)", true);
  path(fit, "--out", o.out, "model file to write (JSON)", true);
  path(fit, "--negative-set", o.negative_set, "logits used as every class's wrong-class sample", false);

  auto* calibrate = app.add_subcommand("calibrate", "select a threshold from validation misclassifications");
  path(calibrate, "--validation", o.validation, "validation logits (CSV)", true);
  path(calibrate, "--out", o.out, "psi: calibrated model; msp/energy: calibration result", true);
  path(calibrate, "--model", o.model, "fitted model (psi)", false);
  path(calibrate, "--report", o.report, "calibration result for psi (JSON)", false);
  detector(calibrate);
  calibrate->add_option("--coverage", o.coverage, "fraction of misclassified samples to flag")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  calibrate->add_option("--grid", o.grid, "thresholds: list, neglog10:A:B:STEP or linear:A:B:STEP");

  auto* detect = app.add_subcommand("detect", "score samples and write per-sample decisions");
  path(detect, "--test", o.test, "logits to score (CSV)", false);
  path(detect, "--ood", o.ood, "additional logits to score (CSV)", false);
  path(detect, "--model", o.model, "calibrated model (psi)", false);
  path(detect, "--out", o.out, "decisions file (CSV)", true);
  detector(detect);
  threshold(detect);

  auto* eval = app.add_subcommand("eval", "evaluate decisions against test + OOD truth");
  path(eval, "--test", o.test, "in-distribution test logits (CSV)", true);
  path(eval, "--ood", o.ood, "OOD logits (CSV)", true);
  path(eval, "--decisions", o.decisions, "precomputed decisions (CSV)", false);
  path(eval, "--model", o.model, "calibrated model (psi)", false);
  path(eval, "--out", o.out, "evaluation report (JSON)", false);
  detector(eval);
  threshold(eval);

  auto* sweep = app.add_subcommand("sweep", "evaluate over a threshold grid");
  path(sweep, "--test", o.test, "in-distribution test logits (CSV)", true);
  path(sweep, "--ood", o.ood, "OOD logits (CSV)", true);
  path(sweep, "--model", o.model, "fitted model (psi)", false);
  path(sweep, "--out", o.out, "sweep table (JSON)", true);
  detector(sweep);
  sweep->add_option("--grid", o.grid, "thresholds: list, neglog10:A:B:STEP or linear:A:B:STEP");
  sweep->add_option("--select-best", o.select_best, "report the grid maximizer of this metric");

  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic logit splits");
  path(synth_cmd, "--spec", o.spec, "synthetic spec (JSON)", true);
  path(synth_cmd, "--out", o.out, "output directory", true);
  synth_cmd->add_option("--seed", o.seed, "override the spec seed");

  auto* report = app.add_subcommand("report", "per-class logit histograms and PS curves");
  path(report, "--model", o.model, "fitted model (JSON)", true);
  path(report, "--train", o.train, "training logits", false);
  path(report, "--validation", o.validation, "validation logits", false);
  path(report, "--test", o.test, "test logits", false);
  path(report, "--ood", o.ood, "OOD logits", false);
  path(report, "--out", o.out, "distribution report (JSON)", true);

  std::vector<std::string> argv_storage{"ood-psi"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsageError;
  }

  try {
    if (fit->parsed()) return cmd_fit(o, out);
    if (calibrate->parsed()) return cmd_calibrate(o, out);
    if (detect->parsed()) return cmd_detect(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (synth_cmd->parsed()) return cmd_synth(o, out);
    if (report->parsed()) return cmd_report(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const CoverageError& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitDomainError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageError;
}

}  // namespace ood::cli
