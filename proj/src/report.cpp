#include "mgtd/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "mgtd/error.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view report_label(Variant v) {
  switch (v) {
    case Variant::Raw: return "raw";
    case Variant::Misspelled: return "+ms";
    case Variant::Homoglyph: return "+hg";
  }
  return "raw";
}

Variant parse_report_label(std::string_view s) {
  if (s == "raw") return Variant::Raw;
  if (s == "+ms") return Variant::Misspelled;
  if (s == "+hg") return Variant::Homoglyph;
  throw FormatError("unknown report variant '" + std::string(s) + "'");
}

std::map<std::string, Aggregate> ReportRow::aggregates() const {
  std::vector<MetricSet> sets;
  for (const auto& cm : per_seed) sets.push_back(eval::metric_set(cm));
  return eval::aggregate_seeds(sets);
}

const ReportRow* EvalReport::find(std::string_view tag, Variant variant) const {
  for (const auto& r : rows)
    if (r.tag == tag && r.variant == variant) return &r;
  return nullptr;
}

namespace eval {
namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

ConfusionMatrix confusion_or_empty(const std::vector<Label>& preds, const std::vector<Label>& gold) {
  return gold.empty() ? ConfusionMatrix{} : confusion(preds, gold);
}

struct CellSpec {
  const char* cls;
  const char* metric;
  const char* key;
};

constexpr std::array<CellSpec, 8> kCells{{
    {"all", "accuracy", "accuracy"},
    {"all", "macro_f1", "macro_f1"},
    {"machine", "precision", "machine_precision"},
    {"machine", "recall", "machine_recall"},
    {"machine", "f1", "machine_f1"},
    {"human", "precision", "human_precision"},
    {"human", "recall", "human_recall"},
    {"human", "f1", "human_f1"},
}};

bool any_undefined(const ReportRow& row, std::string_view cls) {
  if (cls == "all") return false;
  const Label positive = cls == "machine" ? Label::Machine : Label::Human;
  return std::any_of(row.per_seed.begin(), row.per_seed.end(),
                     [&](const ConfusionMatrix& cm) { return prf1(cm, positive).undefined; });
}

}  // namespace

std::string format_fixed(double v, int decimals) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  std::string s(buf, p);
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

EvalReport robustness_table(const ModelParams& model, const features::Featurizer& featurizer,
                            const TestSets& test_sets, const std::vector<PerturbationSpec>& attacks,
                            const corpus::TestSetRegistry& registry) {
  if (featurizer.fingerprint() != model.fingerprint)
    throw FingerprintMismatch(model.fingerprint, featurizer.fingerprint());
  EvalReport report;
  report.seeds = 1;
  for (const auto& [tag, units] : test_sets) {
    const std::string& display = registry.display_name(tag);
    std::vector<Label> gold;
    for (const auto& u : units) gold.push_back(u.label);

    auto add_row = [&](Variant variant, const std::vector<ExampleUnit>& us) {
      ReportRow row;
      row.tag = tag;
      row.display_name = display;
      row.variant = variant;
      row.per_seed.push_back(confusion_or_empty(detector::predict_labels(model, featurizer, us), gold));
      report.rows.push_back(std::move(row));
    };
    add_row(Variant::Raw, units);
    for (const auto& spec : attacks)
      add_row(variant_of(spec.kind), attacks::perturb_testset(units, spec.kind, spec.rate, spec.seed,
                                                              featurizer.resources().confusables));
  }
  return report;
}

EvalReport merge_seeds(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw Error("merge_seeds: no reports");
  EvalReport out = reports.front();
  for (std::size_t k = 1; k < reports.size(); ++k) {
    const EvalReport& r = reports[k];
    if (r.rows.size() != out.rows.size()) throw Error("merge_seeds: reports have different layouts");
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      if (r.rows[i].tag != out.rows[i].tag || r.rows[i].variant != out.rows[i].variant)
        throw Error("merge_seeds: reports have different layouts");
      out.rows[i].per_seed.insert(out.rows[i].per_seed.end(), r.rows[i].per_seed.begin(),
                                  r.rows[i].per_seed.end());
    }
    out.seeds += r.seeds;
  }
  return out;
}

ordered_json to_json(const EvalReport& report) {
  ordered_json j;
  j["seeds"] = report.seeds;
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    ordered_json r;
    r["tag"] = row.tag;
    r["display_name"] = row.display_name;
    r["variant"] = report_label(row.variant);
    r["units"] = row.units();
    ordered_json confusions = ordered_json::array();
    for (const auto& cm : row.per_seed)
      confusions.push_back({{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}});
    r["confusion"] = std::move(confusions);

    std::vector<MetricSet> per_seed;
    for (const auto& cm : row.per_seed) per_seed.push_back(metric_set(cm));
    const auto agg = aggregate_seeds(per_seed);
    ordered_json cells = ordered_json::array();
    for (const auto& c : kCells) {
      ordered_json cell;
      cell["class"] = c.cls;
      cell["metric"] = c.metric;
      const Aggregate& a = agg.at(c.key);
      cell["mean"] = round4(a.mean);
      if (report.seeds > 1) cell["std"] = round4(a.sample_std);
      ordered_json values = ordered_json::array();
      for (const auto& m : per_seed) values.push_back(round4(m.at(c.key)));
      cell["values"] = std::move(values);
      if (any_undefined(row, c.cls)) cell["undefined"] = true;
      cells.push_back(std::move(cell));
    }
    r["cells"] = std::move(cells);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    EvalReport report;
    report.seeds = j.at("seeds").get<std::size_t>();
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      row.tag = r.at("tag").get<std::string>();
      row.display_name = r.value("display_name", row.tag);
      row.variant = parse_report_label(r.at("variant").get<std::string>());
      for (const auto& c : r.at("confusion"))
        row.per_seed.push_back({c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                                c.at("tn").get<std::size_t>(), c.at("fn").get<std::size_t>()});
      if (row.per_seed.size() != report.seeds)
        throw FormatError("row '" + row.tag + "' has " + std::to_string(row.per_seed.size()) +
                          " confusion matrices for " + std::to_string(report.seeds) + " seeds");
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

namespace {

void write_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows,
                 std::size_t left_aligned) {
  std::vector<std::size_t> width(rows.front().size(), 3);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], unicode::length(r[c]));
  auto line = [&](const std::vector<std::string>& r) {
    out << '|';
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::size_t pad = width[c] - unicode::length(r[c]);
      if (c < left_aligned) out << ' ' << r[c] << std::string(pad, ' ') << " |";
      else out << ' ' << std::string(pad, ' ') << r[c] << " |";
    }
    out << '\n';
  };
  line(rows.front());
  out << '|';
  for (std::size_t c = 0; c < width.size(); ++c)
    out << (c < left_aligned ? ' ' + std::string(width[c], '-') + " |"
                             : ' ' + std::string(width[c] - 1, '-') + ": |");
  out << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) line(rows[i]);
}

}  // namespace

void render_markdown(std::ostream& out, const EvalReport& report) {
  const bool with_std = report.seeds > 1;
  auto cell = [&](const Aggregate& a, double scale, int decimals) {
    std::string s = format_fixed(a.mean * scale, decimals);
    if (with_std) s += " ± " + format_fixed(a.sample_std * scale, decimals);
    return s;
  };

  std::vector<std::vector<std::string>> acc(2);
  acc[0].push_back("Model");
  acc[1].push_back(with_std ? "detector (" + std::to_string(report.seeds) + " seeds)" : "detector");
  for (const auto& row : report.rows) {
    acc[0].push_back(row.display_name + " " + std::string(report_label(row.variant)));
    acc[1].push_back(cell(row.aggregates().at("accuracy"), 100.0, 2));
  }
  out << "Accuracy (%)\n\n";
  write_table(out, acc, 1);

  std::vector<std::vector<std::string>> cls;
  cls.push_back({"Test set", "Variant", "Class", "Precision", "Recall", "F1-Score"});
  for (const auto& row : report.rows) {
    const auto agg = row.aggregates();
    for (const char* c : {"machine", "human"}) {
      const std::string prefix = std::string(c) + "_";
      std::string name = c == std::string_view("machine") ? "Machine" : "Human";
      if (any_undefined(row, c)) name += " (undef.)";
      cls.push_back({row.display_name, std::string(report_label(row.variant)), name,
                     cell(agg.at(prefix + "precision"), 1.0, 2), cell(agg.at(prefix + "recall"), 1.0, 2),
                     cell(agg.at(prefix + "f1"), 1.0, 2)});
    }
  }
  out << "\nPer-class scores\n\n";
  write_table(out, cls, 3);
}

}  // namespace eval
}  // namespace mgtd
