#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fallacyscope/taxonomy.hpp"

namespace fallacyscope::eval {

struct LabelPair {
  FallacyLabel gold = FallacyLabel::Nothing;
  FallacyLabel predicted = FallacyLabel::Nothing;
};

enum class MetricsMode { Full, Subset };
std::string_view to_string(MetricsMode mode);

using ConfusionMatrix = std::array<std::array<std::size_t, kLabelCount>, kLabelCount>;  // [gold][pred]
using NormalizedMatrix = std::array<std::array<double, kLabelCount>, kLabelCount>;

struct ClassScores {
  std::size_t support = 0;  // gold count
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

struct Averages {
  double precision = 0, recall = 0, f1 = 0;
};

struct MetricsReport {
  MetricsMode mode = MetricsMode::Full;
  std::size_t n = 0;
  double accuracy = 0;
  /// Labels occurring as gold or prediction, in taxonomy order; these are
  /// the classes averaged over.
  std::vector<FallacyLabel> labels;
  std::map<FallacyLabel, ClassScores> per_class;
  Averages macro;
  Averages weighted;
  ConfusionMatrix confusion{};
  NormalizedMatrix normalized_confusion{};
};

ConfusionMatrix confusion_matrix(std::span<const LabelPair> pairs);
/// Row-normalized; rows with no support stay all-zero.
NormalizedMatrix normalize_rows(const ConfusionMatrix& m);

/// Full mode scores every pair; subset mode first drops pairs predicted
/// Nothing. Every ratio is computed from exact integer fractions and
/// rounded once, so results do not depend on summation order. Classes
/// with a zero denominator score 0. Throws Error{EmptyResults}.
MetricsReport compute_metrics(std::span<const LabelPair> pairs, MetricsMode mode);

struct BreakdownRow {
  FallacyLabel label = FallacyLabel::Nothing;  // Nothing marks the totals row
  std::size_t count = 0;
  std::size_t classified_nothing = 0;
  std::size_t misclassified = 0;  // predicted != gold, Nothing included
  double nothing_pct = 0;
  double misclassified_pct = 0;
};

/// Per fallacy: instances with that gold label, how many were predicted
/// Nothing, how many were predicted anything else than the gold label,
/// percentages against the class count. The totals row sums the five
/// classes, with percentages against all scored instances (facts included).
struct Breakdown {
  std::array<BreakdownRow, kFallacyCount> rows;
  BreakdownRow total;
  std::size_t n = 0;
};

Breakdown breakdown_report(std::span<const LabelPair> pairs);

/// Three significant figures, "0" for zero: 8.92, 23.0, 14.8, 2.54.
std::string format_sig3(double value);

/// Display names used in tables: Latin for the two classes commonly named
/// that way, English otherwise.
std::string_view display_name(FallacyLabel label);

void write_breakdown_csv(std::ostream& out, const Breakdown& b);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m);
void write_confusion_csv(std::ostream& out, const NormalizedMatrix& m);
/// Heatmap of a normalized matrix with cell annotations.
void write_confusion_svg(std::ostream& out, const NormalizedMatrix& m, std::string_view title);
std::string metrics_json(const MetricsReport& report);

}  // namespace fallacyscope::eval
