#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgtd/attacks.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/detector.hpp"
#include "mgtd/metrics.hpp"

namespace mgtd {

/// Column label used in tables: raw, +ms, +hg.
std::string_view report_label(Variant v);
Variant parse_report_label(std::string_view s);

/// One (test set, variant) cell, with one confusion matrix per seed.
struct ReportRow {
  std::string tag;
  std::string display_name;
  Variant variant = Variant::Raw;
  std::vector<ConfusionMatrix> per_seed;

  std::size_t units() const { return per_seed.empty() ? 0 : per_seed.front().total(); }
  std::map<std::string, Aggregate> aggregates() const;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::size_t seeds = 0;

  const ReportRow* find(std::string_view tag, Variant variant) const;
};

using TestSets = std::vector<std::pair<std::string, std::vector<ExampleUnit>>>;

namespace eval {

/// Accuracy and per-class scores of one model on every (set, variant) pair.
/// Raw is always evaluated; one extra variant per attack spec. Throws Error for
/// a tag missing from `registry`.
EvalReport robustness_table(const ModelParams& model, const features::Featurizer& featurizer,
                            const TestSets& test_sets, const std::vector<PerturbationSpec>& attacks,
                            const corpus::TestSetRegistry& registry =
                                corpus::TestSetRegistry::with_defaults());

/// Stacks single-seed reports with identical layout into one multi-seed report.
EvalReport merge_seeds(const std::vector<EvalReport>& reports);

/// One cell per (tag, variant, class, metric); values rounded to 4 decimals,
/// `std` omitted for single-seed reports.
nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Accuracy table in the layout test sets x {raw, +ms, +hg} (percent, 2 decimals)
/// followed by per-class precision/recall/F1 (2 decimals).
void render_markdown(std::ostream& out, const EvalReport& report);

/// Fixed-point with `decimals` digits, independent of the global locale.
std::string format_fixed(double v, int decimals);

}  // namespace eval
}  // namespace mgtd
