#include "ood/io_formats.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "ood/error.hpp"

namespace ood::io {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kModelFormat = "ood-psi-model";
constexpr std::string_view kCalibrationFormat = "ood-psi-calibration";
constexpr std::string_view kEvalFormat = "ood-psi-eval-report";
constexpr std::string_view kSweepFormat = "ood-psi-sweep";
constexpr std::string_view kDistributionFormat = "ood-psi-distribution-report";
constexpr std::string_view kLogitPrefix = "logit_";
constexpr std::string_view kDecisionHeader = "id,is_ood,predicted_class,raw_score,code,subtype";

// ---------------------------------------------------------------- JSON output

void emit(const Json& j, std::string& out, int depth) {
  const auto pad = [&](int d) { out.append(static_cast<std::size_t>(d) * 2, ' '); };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        pad(depth + 1);
        out += Json(key).dump();
        out += ": ";
        emit(value, out, depth + 1);
      }
      out += "\n";
      pad(depth);
      out += "}";
      return;
    }
    case Json::value_t::array: {
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      if (j.empty() || flat) {
        out += "[";
        bool first = true;
        for (const auto& e : j) {
          if (!first) out += ", ";
          first = false;
          emit(e, out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        pad(depth + 1);
        emit(e, out, depth + 1);
      }
      out += "\n";
      pad(depth);
      out += "]";
      return;
    }
    case Json::value_t::number_float: out += format_17(j.get<double>()); return;
    default: out += j.dump(); return;
  }
}

std::string dump(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

// ----------------------------------------------------------------- JSON input

[[noreturn]] void schema_error(std::string_view source, const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, std::string(source) + ": " + path + ": " + what);
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaViolation, std::string(source) + ": invalid JSON: " + e.what());
  }
}

class DocReader {
 public:
  explicit DocReader(std::string_view source) : source_(source) {}

  const Json& field(const Json& obj, const std::string& path, std::string_view key) const {
    if (!obj.is_object()) schema_error(source_, path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) schema_error(source_, path, "missing field '" + std::string(key) + "'");
    return *it;
  }

  bool has(const Json& obj, std::string_view key) const { return obj.is_object() && obj.contains(key); }

  double number(const Json& obj, const std::string& path, std::string_view key) const {
    const Json& v = field(obj, path, key);
    if (!v.is_number()) schema_error(source_, path + "." + std::string(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const Json& obj, const std::string& path, std::string_view key) const {
    const Json& v = field(obj, path, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      schema_error(source_, path + "." + std::string(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const Json& obj, const std::string& path, std::string_view key) const {
    const Json& v = field(obj, path, key);
    if (!v.is_string()) schema_error(source_, path + "." + std::string(key), "expected a string");
    return v.get<std::string>();
  }

  const Json& array(const Json& obj, const std::string& path, std::string_view key) const {
    const Json& v = field(obj, path, key);
    if (!v.is_array()) schema_error(source_, path + "." + std::string(key), "expected an array");
    return v;
  }

  void header(const Json& doc, std::string_view format) const {
    if (!doc.is_object()) schema_error(source_, "$", "expected an object");
    if (string(doc, "$", "format") != format) {
      schema_error(source_, "$.format", "expected '" + std::string(format) + "'");
    }
    const std::string version = string(doc, "$", "format_version");
    const auto major = version.substr(0, version.find('.'));
    const auto expected = kFormatVersion.substr(0, kFormatVersion.find('.'));
    if (major != expected) {
      throw Error(ErrorCode::VersionMismatch, std::string(source_) + ": format_version " + version +
                                                  " is not readable (supported major version " +
                                                  std::string(expected) + ")");
    }
  }

  std::string_view source() const { return source_; }

 private:
  std::string_view source_;
};

Json header(std::string_view format) {
  Json doc = Json::object();
  doc["format"] = format;
  doc["format_version"] = kFormatVersion;
  return doc;
}

Json rate_json(std::uint64_t num, std::uint64_t den, double value) {
  Json j = Json::object();
  j["value"] = value;
  j["display"] = format_thousandths(round_thousandths(num, den));
  j["numerator"] = num;
  j["denominator"] = den;
  return j;
}

// ------------------------------------------------------------------ CSV input

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string location(std::string_view source, std::size_t line, std::size_t column = 0) {
  std::string s = std::string(source) + ":" + std::to_string(line);
  if (column > 0) s += ":" + std::to_string(column);
  return s;
}

std::optional<double> parse_finite(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

void check_csv_token(std::string_view token, std::string_view what) {
  if (token.find_first_of(",\r\n\"") != std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " '" + std::string(token) + "' contains a CSV delimiter");
  }
}

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;

  // Next non-empty line with any trailing CR removed.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
};

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

template <class Fn>
void write_stream(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_17(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "cannot serialize a non-finite number");
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%#.17g", v);
  std::string s(buf, static_cast<std::size_t>(n));
  // "%#g" keeps a bare trailing point for integral exponents ("1.e+20" never
  // happens with 17 digits, but guard the mantissa anyway).
  if (const auto e = s.find('e'); e != std::string::npos && e > 0 && s[e - 1] == '.') s.insert(e, "0");
  if (!s.empty() && s.back() == '.') s += '0';
  return s;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_stream(path, [&](std::ostream& out) { out << text; });
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --------------------------------------------------------------------- logits

Dataset parse_logits(std::istream& in, std::string_view source) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) throw Error(ErrorCode::HeaderMismatch, std::string(source) + ": empty file, no header");

  const auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw Error(ErrorCode::HeaderMismatch,
                location(source, reader.line_no) + ": header must start with 'id,label'");
  }
  Dataset data;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (!header[i].starts_with(kLogitPrefix) || header[i].size() == kLogitPrefix.size()) {
      throw Error(ErrorCode::HeaderMismatch, location(source, reader.line_no, i + 1) + ": column '" +
                                                 std::string(header[i]) + "' is not logit_<class>");
    }
    data.class_names.emplace_back(header[i].substr(kLogitPrefix.size()));
  }
  try {
    validate_class_names(data.class_names);
  } catch (const Error& e) {
    throw Error(ErrorCode::HeaderMismatch, location(source, reader.line_no) + ": " + e.what());
  }

  std::unordered_map<std::string_view, std::size_t> class_index;
  for (std::size_t k = 0; k < data.class_names.size(); ++k) class_index.emplace(data.class_names[k], k);
  std::unordered_set<std::string> ids;

  const std::size_t width = header.size();
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw Error(ErrorCode::MalformedRow, location(source, reader.line_no) + ": expected " +
                                               std::to_string(width) + " fields, found " +
                                               std::to_string(fields.size()));
    }
    LabeledSample s;
    s.id = std::string(fields[0]);
    if (s.id.empty()) throw Error(ErrorCode::MalformedRow, location(source, reader.line_no, 1) + ": empty id");
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::DuplicateId, location(source, reader.line_no, 1) + ": duplicate id '" + s.id + "'");
    }
    const std::string_view label = fields[1];
    if (label == kOodToken) {
      s.label = Label::ood();
    } else if (label == kUnknownToken) {
      s.label = Label::unknown();
    } else if (const auto it = class_index.find(label); it != class_index.end()) {
      s.label = Label::of_class(it->second);
    } else {
      throw Error(ErrorCode::UnknownLabel, location(source, reader.line_no, 2) + ": label '" +
                                               std::string(label) + "' is not a class name, '" +
                                               std::string(kOodToken) + "' or '" +
                                               std::string(kUnknownToken) + "'");
    }
    s.logits.reserve(width - 2);
    for (std::size_t i = 2; i < width; ++i) {
      const auto v = parse_finite(fields[i]);
      if (!v) {
        throw Error(ErrorCode::NonNumericValue, location(source, reader.line_no, i + 1) + " (" +
                                                    std::string(header[i]) + "): '" +
                                                    std::string(fields[i]) + "' is not a finite number");
      }
      s.logits.push_back(*v);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset read_logits(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_logits(in, path.string());
}

void write_logits(std::ostream& out, const Dataset& data) {
  data.validate();
  out << "id,label";
  for (const auto& name : data.class_names) {
    check_csv_token(name, "class name");
    out << ',' << kLogitPrefix << name;
  }
  out << '\n';
  for (const auto& s : data.samples) {
    check_csv_token(s.id, "sample id");
    out << s.id << ',';
    switch (s.label.kind) {
      case LabelKind::Class: out << data.class_names[s.label.class_index]; break;
      case LabelKind::Ood: out << kOodToken; break;
      case LabelKind::Unknown: out << kUnknownToken; break;
    }
    for (double v : s.logits) out << ',' << format_shortest(v);
    out << '\n';
  }
}

void write_logits(const std::filesystem::path& path, const Dataset& data) {
  data.validate();
  write_stream(path, [&](std::ostream& out) { write_logits(out, data); });
}

// ------------------------------------------------------------------ decisions

void write_decisions(std::ostream& out, std::span<const std::string> class_names,
                     std::span<const DetectorDecision> decisions) {
  out << kDecisionHeader << '\n';
  for (const auto& d : decisions) {
    check_csv_token(d.sample_id, "sample id");
    out << d.sample_id << ',' << (d.is_ood ? "true" : "false") << ',';
    if (d.predicted_class) {
      if (*d.predicted_class >= class_names.size()) {
        throw Error(ErrorCode::InvalidArgument, "decision '" + d.sample_id + "' has out-of-range class");
      }
      out << class_names[*d.predicted_class];
    }
    out << ',' << format_shortest(d.raw_score) << ',';
    if (d.verdict) out << to_string(d.verdict->code) << ',' << to_string(d.verdict->subtype);
    else out << ',';
    out << '\n';
  }
}

void write_decisions(const std::filesystem::path& path, std::span<const std::string> class_names,
                     std::span<const DetectorDecision> decisions) {
  write_stream(path, [&](std::ostream& out) { write_decisions(out, class_names, decisions); });
}

std::vector<DetectorDecision> parse_decisions(std::istream& in, std::span<const std::string> class_names,
                                              std::string_view source) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line) || line != kDecisionHeader) {
    throw Error(ErrorCode::HeaderMismatch, location(source, reader.line_no) + ": expected header '" +
                                               std::string(kDecisionHeader) + "'");
  }
  std::unordered_map<std::string_view, std::size_t> class_index;
  for (std::size_t k = 0; k < class_names.size(); ++k) class_index.emplace(class_names[k], k);
  std::unordered_set<std::string> ids;

  std::vector<DetectorDecision> out;
  while (reader.next(line)) {
    const auto f = split_fields(line);
    const auto at = [&](std::size_t col) { return location(source, reader.line_no, col); };
    if (f.size() != 6) {
      throw Error(ErrorCode::MalformedRow, at(0) + ": expected 6 fields, found " + std::to_string(f.size()));
    }
    DetectorDecision d;
    d.sample_id = std::string(f[0]);
    if (d.sample_id.empty()) throw Error(ErrorCode::MalformedRow, at(1) + ": empty id");
    if (!ids.insert(d.sample_id).second) {
      throw Error(ErrorCode::DuplicateId, at(1) + ": duplicate id '" + d.sample_id + "'");
    }
    if (f[1] == "true") d.is_ood = true;
    else if (f[1] == "false") d.is_ood = false;
    else throw Error(ErrorCode::MalformedRow, at(2) + ": is_ood must be 'true' or 'false'");

    if (!f[2].empty()) {
      const auto it = class_index.find(f[2]);
      if (it == class_index.end()) {
        throw Error(ErrorCode::UnknownLabel, at(3) + ": unknown class '" + std::string(f[2]) + "'");
      }
      d.predicted_class = it->second;
    }
    if (d.is_ood == d.predicted_class.has_value()) {
      throw Error(ErrorCode::MalformedRow,
                  at(3) + ": predicted_class must be empty exactly when is_ood is true");
    }
    const auto score = parse_finite(f[3]);
    if (!score) throw Error(ErrorCode::NonNumericValue, at(4) + ": raw_score is not a finite number");
    d.raw_score = *score;

    if (!f[4].empty() || !f[5].empty()) {
      const auto code = parse_verdict_code(f[4]);
      const auto subtype = parse_verdict_subtype(f[5]);
      if (!code || !subtype || code_of(*subtype) != *code) {
        throw Error(ErrorCode::MalformedRow, at(5) + ": invalid verdict code/subtype pair");
      }
      if ((*code == VerdictCode::Red) != d.is_ood) {
        throw Error(ErrorCode::MalformedRow, at(5) + ": verdict code disagrees with is_ood");
      }
      d.verdict = Verdict{*code, *subtype, d.predicted_class};
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DetectorDecision> read_decisions(const std::filesystem::path& path,
                                             std::span<const std::string> class_names) {
  auto in = open_input(path);
  return parse_decisions(in, class_names, path.string());
}

// ---------------------------------------------------------------------- model

std::string model_to_json(const DetectorModel& model) {
  model.validate();
  Json doc = header(kModelFormat);
  doc["class_names"] = model.class_names;
  Json classes = Json::array();
  for (std::size_t k = 0; k < model.class_count(); ++k) {
    const auto& sf = model.score_functions[k];
    Json c = Json::object();
    c["name"] = model.class_names[k];
    c["mu_correct"] = sf.correct().mean;
    c["sigma_correct"] = sf.correct().std;
    c["count_correct"] = sf.correct().count;
    c["mu_wrong"] = sf.wrong().mean;
    c["sigma_wrong"] = sf.wrong().std;
    c["count_wrong"] = sf.wrong().count;
    classes.push_back(std::move(c));
  }
  doc["classes"] = std::move(classes);
  if (model.psi_threshold) doc["psi_threshold"] = *model.psi_threshold;
  Json meta = Json::object();
  for (const auto& [k, v] : model.metadata) meta[k] = v;
  doc["metadata"] = std::move(meta);
  return dump(doc);
}

DetectorModel model_from_json(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const DocReader r(source);
  r.header(doc, kModelFormat);

  DetectorModel model;
  const Json& names = r.array(doc, "$", "class_names");
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i].is_string()) schema_error(source, "$.class_names[" + std::to_string(i) + "]", "expected a string");
    model.class_names.push_back(names[i].get<std::string>());
  }
  try {
    validate_class_names(model.class_names);
  } catch (const Error& e) {
    schema_error(source, "$.class_names", e.what());
  }

  const Json& classes = r.array(doc, "$", "classes");
  if (classes.size() != model.class_names.size()) {
    schema_error(source, "$.classes", "expected one entry per class name");
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const std::string path = "$.classes[" + std::to_string(k) + "]";
    const Json& c = classes[k];
    if (r.string(c, path, "name") != model.class_names[k]) {
      schema_error(source, path + ".name", "does not match class_names order");
    }
    GaussianStats correct{r.number(c, path, "mu_correct"), r.number(c, path, "sigma_correct"),
                          r.count(c, path, "count_correct")};
    GaussianStats wrong{r.number(c, path, "mu_wrong"), r.number(c, path, "sigma_wrong"),
                        r.count(c, path, "count_wrong")};
    if (!(correct.std >= kSigmaFloor)) schema_error(source, path + ".sigma_correct", "must be >= 1e-6");
    if (!(wrong.std >= kSigmaFloor)) schema_error(source, path + ".sigma_wrong", "must be >= 1e-6");
    if (correct.count < 2) schema_error(source, path + ".count_correct", "must be >= 2");
    if (wrong.count < 2) schema_error(source, path + ".count_wrong", "must be >= 2");
    if (!(correct.mean > wrong.mean)) schema_error(source, path, "mu_correct must exceed mu_wrong");
    model.score_functions.emplace_back(k, correct, wrong);
  }

  if (r.has(doc, "psi_threshold")) {
    const double t = r.number(doc, "$", "psi_threshold");
    if (!(t > 0.0 && t < 1.0)) schema_error(source, "$.psi_threshold", "must lie strictly in (0,1)");
    model.psi_threshold = t;
  }
  if (r.has(doc, "metadata")) {
    const Json& meta = doc["metadata"];
    if (!meta.is_object()) schema_error(source, "$.metadata", "expected an object");
    for (const auto& [k, v] : meta.items()) {
      if (!v.is_string()) schema_error(source, "$.metadata." + k, "expected a string");
      model.metadata[k] = v.get<std::string>();
    }
  }
  return model;
}

void write_model(const std::filesystem::path& path, const DetectorModel& model) {
  write_text(path, model_to_json(model));
}

DetectorModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_text(path), path.string());
}

// ---------------------------------------------------------------- calibration

std::string calibration_to_json(const CalibrationResult& result) {
  Json doc = header(kCalibrationFormat);
  doc["detector"] = to_string(result.detector);
  doc["coverage_target"] = result.coverage_target;
  doc["chosen_threshold"] = result.chosen_threshold;
  doc["achieved_coverage"] = result.achieved_coverage;
  doc["misclassified_count"] = result.misclassified_count;
  doc["flagged_count"] = result.flagged_count;
  return dump(doc);
}

CalibrationResult calibration_from_json(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const DocReader r(source);
  r.header(doc, kCalibrationFormat);
  CalibrationResult c;
  const auto kind = parse_detector_kind(r.string(doc, "$", "detector"));
  if (!kind) schema_error(source, "$.detector", "expected psi, msp or energy");
  c.detector = *kind;
  c.coverage_target = r.number(doc, "$", "coverage_target");
  c.chosen_threshold = r.number(doc, "$", "chosen_threshold");
  c.achieved_coverage = r.number(doc, "$", "achieved_coverage");
  c.misclassified_count = r.count(doc, "$", "misclassified_count");
  c.flagged_count = r.count(doc, "$", "flagged_count");
  if (c.flagged_count > c.misclassified_count) {
    schema_error(source, "$.flagged_count", "exceeds misclassified_count");
  }
  if (c.detector != DetectorKind::Energy && !(c.chosen_threshold > 0.0 && c.chosen_threshold < 1.0)) {
    schema_error(source, "$.chosen_threshold", "must lie strictly in (0,1)");
  }
  return c;
}

void write_calibration(const std::filesystem::path& path, const CalibrationResult& result) {
  write_text(path, calibration_to_json(result));
}

CalibrationResult read_calibration(const std::filesystem::path& path) {
  return calibration_from_json(read_text(path), path.string());
}

// -------------------------------------------------------------------- reports

namespace {

Json counts_json(const EvalReport& r) {
  Json j = Json::object();
  j["n_correct"] = r.n_correct;
  j["n_test"] = r.n_test;
  j["n_ood_flagged"] = r.n_ood_flagged;
  j["n_ood"] = r.n_ood;
  return j;
}

Json metrics_json(const EvalReport& r) {
  Json j = Json::object();
  j["classification_accuracy"] = rate_json(r.n_correct, r.n_test, r.classification_accuracy);
  j["ood_detection_rate"] = rate_json(r.n_ood_flagged, r.n_ood, r.ood_detection_rate);
  Json wa = Json::object();
  wa["value"] = r.weighted_accuracy;
  wa["display"] = format_thousandths(r.weighted_accuracy_thousandths());
  wa["numerator"] = static_cast<std::uint64_t>(r.n_correct) * r.n_ood +
                    static_cast<std::uint64_t>(r.n_ood_flagged) * r.n_test;
  wa["denominator"] = static_cast<std::uint64_t>(2) * r.n_test * r.n_ood;
  j["weighted_accuracy"] = std::move(wa);
  return j;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report, const ReportContext& context) {
  Json doc = header(kEvalFormat);
  if (context.detector) doc["detector"] = to_string(*context.detector);
  if (context.threshold) doc["threshold"] = *context.threshold;
  doc["class_names"] = report.class_names;
  doc["counts"] = counts_json(report);
  const Json metrics = metrics_json(report);
  for (const auto& [k, v] : metrics.items()) doc[k] = v;

  const std::size_t n = report.confusion.size();
  std::vector<std::string> labels = report.class_names;
  labels.emplace_back("OOD");
  std::vector<std::size_t> row_totals(n, 0);
  std::vector<std::size_t> col_totals(n, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      row_totals[i] += report.confusion[i][j];
      col_totals[j] += report.confusion[i][j];
      total += report.confusion[i][j];
    }
  }
  Json confusion = Json::object();
  confusion["labels"] = labels;
  confusion["rows"] = "true class";
  confusion["columns"] = "prediction";
  confusion["matrix"] = report.confusion;
  confusion["row_totals"] = row_totals;
  confusion["column_totals"] = col_totals;
  confusion["total"] = total;
  doc["confusion"] = std::move(confusion);
  return dump(doc);
}

std::string sweep_to_json(std::span<const SweepRow> rows, DetectorKind detector,
                          std::optional<std::pair<SweepMetric, std::size_t>> best) {
  Json doc = header(kSweepFormat);
  doc["detector"] = to_string(detector);
  Json out = Json::array();
  for (const auto& row : rows) {
    Json j = Json::object();
    j["threshold"] = row.threshold;
    const Json counts = counts_json(row.report);
    for (const auto& [k, v] : counts.items()) j[k] = v;
    const Json m = metrics_json(row.report);
    for (const auto& [k, v] : m.items()) {
      j[k] = v["value"];
      j[k + "_display"] = v["display"];
    }
    out.push_back(std::move(j));
  }
  doc["rows"] = std::move(out);
  if (best) {
    if (best->second >= rows.size()) throw Error(ErrorCode::InvalidArgument, "best row out of range");
    Json b = Json::object();
    b["metric"] = to_string(best->first);
    b["index"] = best->second;
    b["threshold"] = rows[best->second].threshold;
    doc["best"] = std::move(b);
  }
  return dump(doc);
}

std::string distribution_report_to_json(const DistributionReport& report) {
  Json doc = header(kDistributionFormat);
  Json classes = Json::array();
  for (const auto& c : report.classes) {
    Json j = Json::object();
    j["index"] = c.class_index;
    j["name"] = c.class_name;
    j["correct"] = {{"mean", c.correct.mean}, {"std", c.correct.std}, {"count", c.correct.count}};
    j["wrong"] = {{"mean", c.wrong.mean}, {"std", c.wrong.std}, {"count", c.wrong.count}};
    j["ps_curve"] = {{"x", c.curve_x}, {"ps", c.curve_ps}};
    Json splits = Json::array();
    for (const auto& s : c.splits) {
      Json sj = Json::object();
      sj["split"] = s.split;
      sj["unlabeled"] = s.unlabeled;
      sj["edges"] = s.correct.edges;
      sj["correct_counts"] = s.correct.counts;
      sj["wrong_counts"] = s.wrong.counts;
      if (s.ood) sj["ood_counts"] = s.ood->counts;
      splits.push_back(std::move(sj));
    }
    j["splits"] = std::move(splits);
    classes.push_back(std::move(j));
  }
  doc["classes"] = std::move(classes);
  return dump(doc);
}

void write_report(const std::filesystem::path& path, const EvalReport& report,
                  const ReportContext& context) {
  write_text(path, eval_report_to_json(report, context));
}

void write_report(const std::filesystem::path& path, std::span<const SweepRow> rows,
                  DetectorKind detector, std::optional<std::pair<SweepMetric, std::size_t>> best) {
  write_text(path, sweep_to_json(rows, detector, best));
}

void write_report(const std::filesystem::path& path, const DistributionReport& report) {
  write_text(path, distribution_report_to_json(report));
}

// ------------------------------------------------------------- synthetic spec

namespace {

synth::GaussianParams gaussian_from(const DocReader& r, const Json& obj, const std::string& path,
                                    std::string_view key) {
  const Json& g = r.field(obj, path, key);
  const std::string sub = path + "." + std::string(key);
  return {r.number(g, sub, "mean"), r.number(g, sub, "std")};
}

Json gaussian_to(const synth::GaussianParams& g) { return {{"mean", g.mean}, {"std", g.std}}; }

}  // namespace

synth::SynthSpec synth_spec_from_json(std::string_view text, std::string_view source) {
  const Json doc = parse_json(text, source);
  const DocReader r(source);
  if (!doc.is_object()) schema_error(source, "$", "expected an object");
  synth::SynthSpec spec;
  if (r.has(doc, "classes")) {
    const Json& classes = r.array(doc, "$", "classes");
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const std::string path = "$.classes[" + std::to_string(k) + "]";
      spec.classes.push_back({r.string(classes[k], path, "name"), gaussian_from(r, classes[k], path, "own"),
                              gaussian_from(r, classes[k], path, "cross")});
    }
  } else {
    const auto c = r.count(doc, "$", "class_count");
    const auto own = gaussian_from(r, doc, "$", "own");
    const auto cross = gaussian_from(r, doc, "$", "cross");
    for (std::uint64_t k = 0; k < c; ++k) spec.classes.push_back({"class" + std::to_string(k), own, cross});
  }
  spec.ood_profile = gaussian_from(r, doc, "$", "ood_profile");
  const Json& counts = r.field(doc, "$", "counts");
  spec.train_per_class = r.count(counts, "$.counts", "train");
  spec.validation_per_class = r.count(counts, "$.counts", "validation");
  spec.test_per_class = r.count(counts, "$.counts", "test");
  spec.ood_count = r.count(counts, "$.counts", "ood");
  spec.seed = r.count(doc, "$", "seed");
  spec.validate();
  return spec;
}

std::string synth_spec_to_json(const synth::SynthSpec& spec) {
  Json doc = Json::object();
  Json classes = Json::array();
  for (const auto& c : spec.classes) {
    classes.push_back({{"name", c.name}, {"own", gaussian_to(c.own)}, {"cross", gaussian_to(c.cross)}});
  }
  doc["classes"] = std::move(classes);
  doc["ood_profile"] = gaussian_to(spec.ood_profile);
  doc["counts"] = {{"train", spec.train_per_class},
                   {"validation", spec.validation_per_class},
                   {"test", spec.test_per_class},
                   {"ood", spec.ood_count}};
  doc["seed"] = spec.seed;
  return dump(doc);
}

synth::SynthSpec read_synth_spec(const std::filesystem::path& path) {
  return synth_spec_from_json(read_text(path), path.string());
}

}  // namespace ood::io
