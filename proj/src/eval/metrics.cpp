#include "fallacyscope/eval/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "fallacyscope/error.hpp"

namespace fallacyscope::eval {
namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    auto t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Non-negative fraction kept in lowest terms.
struct Fraction {
  i128 num = 0;
  i128 den = 1;

  static Fraction of(std::size_t n, std::size_t d) {
    if (d == 0) return {};
    return Fraction{static_cast<i128>(n), static_cast<i128>(d)}.reduced();
  }
  Fraction reduced() const {
    if (num == 0) return {0, 1};
    auto g = gcd128(num, den);
    return {num / g, den / g};
  }
  Fraction operator+(const Fraction& o) const {
    auto g = gcd128(den, o.den);
    return Fraction{num * (o.den / g) + o.num * (den / g), den / g * o.den}.reduced();
  }
  Fraction scaled(std::size_t k, std::size_t d) const {
    if (d == 0) return {};
    return Fraction{num * static_cast<i128>(k), den * static_cast<i128>(d)}.reduced();
  }
  double value() const {
    constexpr i128 kExact = i128{1} << 53;
    if (num < kExact && den < kExact) return static_cast<double>(num) / static_cast<double>(den);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  }
};

}  // namespace

std::string_view to_string(MetricsMode mode) { return mode == MetricsMode::Full ? "full" : "subset"; }

ConfusionMatrix confusion_matrix(std::span<const LabelPair> pairs) {
  ConfusionMatrix m{};
  for (const auto& p : pairs) ++m[index_of(p.gold)][index_of(p.predicted)];
  return m;
}

NormalizedMatrix normalize_rows(const ConfusionMatrix& m) {
  NormalizedMatrix out{};
  for (std::size_t r = 0; r < kLabelCount; ++r) {
    auto total = std::accumulate(m[r].begin(), m[r].end(), std::size_t{0});
    if (total == 0) continue;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      out[r][c] = static_cast<double>(m[r][c]) / static_cast<double>(total);
    }
  }
  return out;
}

MetricsReport compute_metrics(std::span<const LabelPair> pairs, MetricsMode mode) {
  std::vector<LabelPair> kept;
  kept.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (mode == MetricsMode::Subset && p.predicted == FallacyLabel::Nothing) continue;
    kept.push_back(p);
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyResults, "no results to score");

  MetricsReport r;
  r.mode = mode;
  r.n = kept.size();
  r.confusion = confusion_matrix(kept);
  r.normalized_confusion = normalize_rows(r.confusion);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < kLabelCount; ++i) correct += r.confusion[i][i];
  r.accuracy = Fraction::of(correct, r.n).value();

  Fraction macro_p, macro_r, macro_f, weighted_p, weighted_r, weighted_f;
  for (auto label : kAllLabels) {
    auto i = index_of(label);
    ClassScores s;
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      s.support += r.confusion[i][j];
      if (j != i) {
        s.fn += r.confusion[i][j];
        s.fp += r.confusion[j][i];
      }
    }
    s.tp = r.confusion[i][i];
    if (s.support == 0 && s.fp == 0) continue;

    auto p = Fraction::of(s.tp, s.tp + s.fp);
    auto rc = Fraction::of(s.tp, s.tp + s.fn);
    auto f = Fraction::of(2 * s.tp, 2 * s.tp + s.fp + s.fn);
    s.precision = p.value();
    s.recall = rc.value();
    s.f1 = f.value();

    macro_p = macro_p + p;
    macro_r = macro_r + rc;
    macro_f = macro_f + f;
    weighted_p = weighted_p + p.scaled(s.support, 1);
    weighted_r = weighted_r + rc.scaled(s.support, 1);
    weighted_f = weighted_f + f.scaled(s.support, 1);
    r.labels.push_back(label);
    r.per_class.emplace(label, s);
  }
  auto k = r.labels.size();
  r.macro = {macro_p.scaled(1, k).value(), macro_r.scaled(1, k).value(), macro_f.scaled(1, k).value()};
  r.weighted = {weighted_p.scaled(1, r.n).value(), weighted_r.scaled(1, r.n).value(),
                weighted_f.scaled(1, r.n).value()};
  return r;
}

Breakdown breakdown_report(std::span<const LabelPair> pairs) {
  Breakdown b;
  b.n = pairs.size();
  for (std::size_t i = 0; i < kFallacyCount; ++i) b.rows[i].label = kFallacies[i];
  for (const auto& p : pairs) {
    if (p.gold == FallacyLabel::Nothing) continue;
    auto& row = b.rows[index_of(p.gold)];
    ++row.count;
    if (p.predicted == FallacyLabel::Nothing) ++row.classified_nothing;
    if (p.predicted != p.gold) ++row.misclassified;
  }
  auto pct = [](std::size_t k, std::size_t n) { return n == 0 ? 0.0 : Fraction::of(100 * k, n).value(); };
  for (auto& row : b.rows) {
    row.nothing_pct = pct(row.classified_nothing, row.count);
    row.misclassified_pct = pct(row.misclassified, row.count);
    b.total.count += row.count;
    b.total.classified_nothing += row.classified_nothing;
    b.total.misclassified += row.misclassified;
  }
  b.total.nothing_pct = pct(b.total.classified_nothing, b.n);
  b.total.misclassified_pct = pct(b.total.misclassified, b.n);
  return b;
}

std::string format_sig3(double value) {
  if (value == 0 || !std::isfinite(value)) return "0";
  // Round to three significant figures first so 9.996 becomes 10.0, not 10.00.
  char probe[64];
  std::snprintf(probe, sizeof probe, "%.2e", value);
  double rounded = std::strtod(probe, nullptr);
  int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(rounded))));
  int decimals = std::max(0, 2 - magnitude);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

std::string_view display_name(FallacyLabel label) {
  switch (label) {
    case FallacyLabel::AgainstThePerson: return "ad hominem";
    case FallacyLabel::AppealToAuthority: return "appeal to authority";
    case FallacyLabel::AppealToPopularity: return "ad populum";
    case FallacyLabel::AppealToEmotion: return "appeal to emotion";
    case FallacyLabel::QuestionableCause: return "questionable cause";
    case FallacyLabel::Nothing: return "nothing";
  }
  return "";
}

void write_breakdown_csv(std::ostream& out, const Breakdown& b) {
  out << "row";
  for (const auto& row : b.rows) out << ',' << english_name(row.label);
  out << ",total\nall";
  for (const auto& row : b.rows) out << ',' << row.count;
  out << ',' << b.total.count << "\nclassified_nothing";
  for (const auto& row : b.rows) out << ',' << row.classified_nothing;
  out << ',' << b.total.classified_nothing << "\nnothing_pct";
  for (const auto& row : b.rows) out << ',' << format_sig3(row.nothing_pct);
  out << ',' << format_sig3(b.total.nothing_pct) << "\nmisclassified";
  for (const auto& row : b.rows) out << ',' << row.misclassified;
  out << ',' << b.total.misclassified << "\nmisclassified_pct";
  for (const auto& row : b.rows) out << ',' << format_sig3(row.misclassified_pct);
  out << ',' << format_sig3(b.total.misclassified_pct) << '\n';
}

namespace {

template <class Cell>
void write_matrix_csv(std::ostream& out, const std::array<std::array<Cell, kLabelCount>, kLabelCount>& m) {
  out << "gold\\predicted";
  for (auto l : kAllLabels) out << ',' << display_name(l);
  out << '\n';
  for (auto g : kAllLabels) {
    out << display_name(g);
    for (auto p : kAllLabels) {
      if constexpr (std::is_floating_point_v<Cell>) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", m[index_of(g)][index_of(p)]);
        out << ',' << buf;
      } else {
        out << ',' << m[index_of(g)][index_of(p)];
      }
    }
    out << '\n';
  }
}

}  // namespace

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) { write_matrix_csv(out, m); }
void write_confusion_csv(std::ostream& out, const NormalizedMatrix& m) { write_matrix_csv(out, m); }

void write_confusion_svg(std::ostream& out, const NormalizedMatrix& m, std::string_view title) {
  constexpr int cell = 70, left = 160, top = 60;
  constexpr int size = static_cast<int>(kLabelCount) * cell;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + size + 20 << "\" height=\""
      << top + size + 130 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  for (std::size_t r = 0; r < kLabelCount; ++r) {
    for (std::size_t c = 0; c < kLabelCount; ++c) {
      double v = m[r][c];
      int shade = static_cast<int>(std::lround(255 - 200 * v));
      int x = left + static_cast<int>(c) * cell, y = top + static_cast<int>(r) * cell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"#ccc\"/>\n";
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", v);
      out << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4 << "\" text-anchor=\"middle\" fill=\""
          << (v > 0.6 ? "#fff" : "#000") << "\">" << buf << "</text>\n";
    }
    out << "<text x=\"" << left - 8 << "\" y=\"" << top + static_cast<int>(r) * cell + cell / 2 + 4
        << "\" text-anchor=\"end\">" << display_name(kAllLabels[r]) << "</text>\n";
  }
  for (std::size_t c = 0; c < kLabelCount; ++c) {
    int x = left + static_cast<int>(c) * cell + cell / 2, y = top + size + 10;
    out << "<text transform=\"translate(" << x << ',' << y << ") rotate(40)\">" << display_name(kAllLabels[c])
        << "</text>\n";
  }
  out << "<text x=\"20\" y=\"" << top + size / 2 << "\">gold</text>\n";
  out << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 120 << "\">predicted</text>\n";
  out << "</svg>\n";
}

std::string metrics_json(const MetricsReport& r) {
  using json = nlohmann::ordered_json;
  json per_class = json::object();
  for (const auto& [label, s] : r.per_class) {
    per_class[std::string(label_key(label))] = {{"support", s.support}, {"tp", s.tp},
                                                {"fp", s.fp},           {"fn", s.fn},
                                                {"precision", s.precision}, {"recall", s.recall},
                                                {"f1", s.f1}};
  }
  json confusion = json::array(), normalized = json::array();
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    confusion.push_back(r.confusion[i]);
    normalized.push_back(r.normalized_confusion[i]);
  }
  json labels = json::array();
  for (auto l : kAllLabels) labels.push_back(label_key(l));
  json j{{"mode", to_string(r.mode)},
         {"n", r.n},
         {"accuracy", r.accuracy},
         {"macro", {{"precision", r.macro.precision}, {"recall", r.macro.recall}, {"f1", r.macro.f1}}},
         {"weighted",
          {{"precision", r.weighted.precision}, {"recall", r.weighted.recall}, {"f1", r.weighted.f1}}},
         {"per_class", per_class},
         {"labels", labels},
         {"confusion", confusion},
         {"normalized_confusion", normalized}};
  return j.dump(2);
}

}  // namespace fallacyscope::eval
