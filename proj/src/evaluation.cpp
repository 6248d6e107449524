#include "ood/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "ood/error.hpp"

namespace ood {

double weighted_accuracy(std::size_t n_correct, std::size_t n_test, std::size_t n_ood_flagged,
                         std::size_t n_ood) {
  if (n_test == 0 || n_ood == 0) {
    throw Error(ErrorCode::EmptySplit, "weighted accuracy needs non-empty ID and OOD splits");
  }
  if (n_correct > n_test || n_ood_flagged > n_ood) {
    throw Error(ErrorCode::InvalidArgument, "count exceeds its total");
  }
  const double acc = static_cast<double>(n_correct) / static_cast<double>(n_test);
  const double rate = static_cast<double>(n_ood_flagged) / static_cast<double>(n_ood);
  return (acc + rate) / 2.0;
}

std::uint64_t round_thousandths(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator");
  using u128 = unsigned __int128;
  const u128 scaled = static_cast<u128>(num) * 2000u + den;
  return static_cast<std::uint64_t>(scaled / (static_cast<u128>(den) * 2u));
}

std::string format_thousandths(std::uint64_t thousandths) {
  std::string frac = std::to_string(thousandths % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return std::to_string(thousandths / 1000) + "." + frac;
}

std::uint64_t EvalReport::classification_accuracy_thousandths() const {
  return round_thousandths(n_correct, n_test);
}

std::uint64_t EvalReport::ood_detection_rate_thousandths() const {
  return round_thousandths(n_ood_flagged, n_ood);
}

std::uint64_t EvalReport::weighted_accuracy_thousandths() const {
  using u128 = unsigned __int128;
  const u128 num = static_cast<u128>(n_correct) * n_ood + static_cast<u128>(n_ood_flagged) * n_test;
  const u128 den = static_cast<u128>(2) * n_test * n_ood;
  return static_cast<std::uint64_t>((num * 2000u + den) / (den * 2u));
}

EvalReport tally(std::span<const std::string> class_names, std::span<const Label> truth,
                 std::span<const DetectorDecision> decisions) {
  if (truth.size() != decisions.size()) {
    throw Error(ErrorCode::IdMismatch, std::to_string(decisions.size()) + " decisions for " +
                                           std::to_string(truth.size()) + " truth samples");
  }
  const std::size_t c = class_names.size();
  EvalReport r;
  r.class_names.assign(class_names.begin(), class_names.end());
  r.confusion.assign(c + 1, std::vector<std::size_t>(c + 1, 0));

  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Label& label = truth[i];
    const DetectorDecision& d = decisions[i];
    if (!d.is_ood && (!d.predicted_class || *d.predicted_class >= c)) {
      throw Error(ErrorCode::InvalidArgument,
                  "decision '" + d.sample_id + "' is in-distribution without a valid class");
    }
    const std::size_t col = d.is_ood ? c : *d.predicted_class;
    if (label.is_ood()) {
      ++r.n_ood;
      if (d.is_ood) ++r.n_ood_flagged;
      ++r.confusion[c][col];
    } else if (label.is_class()) {
      if (label.class_index >= c) throw Error(ErrorCode::InvalidArgument, "truth label out of range");
      ++r.n_test;
      if (!d.is_ood && *d.predicted_class == label.class_index) ++r.n_correct;
      ++r.confusion[label.class_index][col];
    } else {
      throw Error(ErrorCode::NonClassLabel,
                  "truth sample for decision '" + d.sample_id + "' has an unknown label");
    }
  }
  if (r.n_test == 0) throw Error(ErrorCode::EmptySplit, "evaluation has no in-distribution samples");
  if (r.n_ood == 0) throw Error(ErrorCode::EmptySplit, "evaluation has no OOD samples");

  r.classification_accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_test);
  r.ood_detection_rate = static_cast<double>(r.n_ood_flagged) / static_cast<double>(r.n_ood);
  r.weighted_accuracy = weighted_accuracy(r.n_correct, r.n_test, r.n_ood_flagged, r.n_ood);
  return r;
}

EvalReport evaluate(std::span<const DetectorDecision> decisions, const Dataset& truth) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(truth.samples.size());
  for (std::size_t i = 0; i < truth.samples.size(); ++i) {
    if (!index.emplace(truth.samples[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate truth id '" + truth.samples[i].id + "'");
    }
  }
  std::vector<Label> labels(decisions.size());
  std::vector<bool> seen(truth.samples.size(), false);
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto it = index.find(decisions[i].sample_id);
    if (it == index.end()) {
      throw Error(ErrorCode::IdMismatch, "decision id '" + decisions[i].sample_id + "' not in truth set");
    }
    if (seen[it->second]) {
      throw Error(ErrorCode::IdMismatch, "decision id '" + decisions[i].sample_id + "' appears twice");
    }
    seen[it->second] = true;
    labels[i] = truth.samples[it->second].label;
  }
  if (decisions.size() != truth.samples.size()) {
    const auto missing = std::find(seen.begin(), seen.end(), false) - seen.begin();
    throw Error(ErrorCode::IdMismatch,
                "truth sample '" + truth.samples[static_cast<std::size_t>(missing)].id +
                    "' has no decision");
  }
  return tally(truth.class_names, labels, decisions);
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

namespace {

// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> freedman_diaconis_edges(std::span<const double> pooled, std::size_t min_bins,
                                            std::size_t max_bins) {
  min_bins = std::max<std::size_t>(min_bins, 1);
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = min_bins;
  if (!pooled.empty()) {
    std::vector<double> sorted(pooled.begin(), pooled.end());
    std::sort(sorted.begin(), sorted.end());
    lo = sorted.front();
    hi = sorted.back();
    if (hi > lo) {
      const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
      if (iqr > 0.0) {
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
        const double wanted = std::ceil((hi - lo) / width);
        bins = static_cast<std::size_t>(
            std::clamp(wanted, static_cast<double>(min_bins), static_cast<double>(max_bins)));
      }
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  std::vector<double> edges(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges[bins] = hi;
  return edges;
}

Histogram make_histogram(std::vector<double> edges, std::span<const double> values) {
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  const std::size_t bins = h.counts.size();
  for (double v : values) {
    // upper_bound gives the first edge > v; the bin is the one before it.
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    bin = std::min(bin, bins - 1);
    ++h.counts[bin];
  }
  h.edges = std::move(edges);
  return h;
}

DistributionReport distribution_report(const DetectorModel& model, std::span<const NamedSplit> splits) {
  model.validate();
  const std::size_t c = model.class_count();
  for (const auto& split : splits) {
    if (split.data.get().class_count() != c) {
      throw Error(ErrorCode::DimensionMismatch,
                  "split '" + split.name + "' has " + std::to_string(split.data.get().class_count()) +
                      " logit columns, model has " + std::to_string(c));
    }
    for (const auto& s : split.data.get().samples) {
      if (s.logits.size() != c) {
        throw Error(ErrorCode::DimensionMismatch, "split '" + split.name + "' sample '" + s.id +
                                                      "' has the wrong logit count");
      }
    }
  }

  DistributionReport report;
  report.classes.reserve(c);
  for (std::size_t k = 0; k < c; ++k) {
    const ClassScoreFunction& sf = model.score_functions[k];
    ClassDistribution cd;
    cd.class_index = k;
    cd.class_name = model.class_names[k];
    cd.correct = sf.correct();
    cd.wrong = sf.wrong();

    for (const auto& split : splits) {
      std::vector<double> pooled;
      std::vector<double> own;
      std::vector<double> other;
      std::vector<double> ood;
      SplitDistribution sd;
      sd.split = split.name;
      for (const auto& s : split.data.get().samples) {
        const double v = s.logits[k];
        if (s.label.is_ood()) {
          ood.push_back(v);
        } else if (s.label.is_class()) {
          (s.label.class_index == k ? own : other).push_back(v);
        } else {
          ++sd.unlabeled;
          continue;
        }
        pooled.push_back(v);
      }
      const auto edges = freedman_diaconis_edges(pooled);
      sd.correct = make_histogram(edges, own);
      sd.wrong = make_histogram(edges, other);
      if (!ood.empty()) sd.ood = make_histogram(edges, ood);
      cd.splits.push_back(std::move(sd));
    }

    const double lo = sf.wrong().mean - 4.0 * sf.wrong().std;
    const double hi = sf.correct().mean + 4.0 * sf.correct().std;
    cd.curve_x.resize(kPsCurvePoints);
    cd.curve_ps.resize(kPsCurvePoints);
    for (std::size_t i = 0; i < kPsCurvePoints; ++i) {
      const double x = i + 1 == kPsCurvePoints
                           ? hi
                           : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kPsCurvePoints - 1);
      cd.curve_x[i] = x;
      cd.curve_ps[i] = sf.score(x);
    }
    report.classes.push_back(std::move(cd));
  }
  return report;
}

}  // namespace ood
