#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mgtd/correlation.hpp"
#include "mgtd/error.hpp"
#include "mgtd/pipeline.hpp"

namespace fs = std::filesystem;

namespace mgtd::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::shared_ptr<const Resources> load_resources() {
  if (const char* dir = std::getenv("MGTD_DATA_DIR"); dir && *dir) return Resources::from_directory(dir);
  return Resources::builtin();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump_to(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

void write_sidecar_manifest(const std::string& out_path, const std::vector<fs::path>& inputs,
                            const ordered_json& settings, std::vector<std::uint64_t> seeds) {
  RunManifest m = describe_inputs(inputs, sha256_hex(settings.dump()), std::move(seeds));
  m.outputs.push_back({fs::path(out_path).filename().string(), sha256_file(out_path)});
  write_manifest(out_path + ".manifest.json", m);
}

std::size_t count_answers(const std::vector<Record>& rs, Label label) {
  std::size_t n = 0;
  for (const auto& r : rs) n += label == Label::Human ? r.human_answers.size() : r.machine_answers.size();
  return n;
}

TrainingConfig training_config(const std::string& path) {
  if (path.empty()) return {};
  try {
    return TrainingConfig::from_json(json::parse(slurp(path)));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string schema = "hc3";
  std::string language = "fr";
  std::string source_tag = "hc3";
  std::string out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<Record> all;
  std::vector<fs::path> paths;
  for (const auto& p : a.inputs) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p);
    std::vector<Record> part;
    try {
      part = a.schema == "hc3" ? corpus::parse_hc3(in, parse_language(a.language), a.source_tag)
                               : corpus::parse_corpus(in);
    } catch (const FormatError& e) {
      throw FormatError(p + ": " + e.what());
    }
    all.insert(all.end(), part.begin(), part.end());
    paths.emplace_back(p);
  }
  std::map<std::string, int> seen;
  for (const auto& r : all)
    if (++seen[r.id] > 1) throw FormatError("duplicate record id '" + r.id + "' across inputs");
  if (all.empty()) err << "warning: no records found in input\n";
  corpus::write_corpus_file(a.out, all);
  write_sidecar_manifest(a.out, paths, {{"command", "ingest"}, {"schema", a.schema}, {"language", a.language},
                                        {"source_tag", a.source_tag}}, {});
  out << "ingested " << all.size() << " records (" << count_answers(all, Label::Human) << " human, "
      << count_answers(all, Label::Machine) << " machine answers) -> " << a.out << "\n";
  return 0;
}

struct SplitArgs {
  std::string corpus;
  std::size_t test_pairs = 0;
  double valid_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
  const auto records = corpus::read_corpus_file(a.corpus);
  const Split s = corpus::build_split(records, a.test_pairs, a.valid_fraction, a.seed);
  fs::create_directories(a.out_dir);
  const ordered_json settings{{"command", "split"}, {"test_pairs", a.test_pairs},
                              {"valid_fraction", a.valid_fraction}, {"seed", a.seed}};
  for (const auto& [name, part] : {std::pair{"train", &s.train}, {"valid", &s.valid}, {"test", &s.test}}) {
    const std::string path = (fs::path(a.out_dir) / (std::string(name) + ".jsonl")).string();
    corpus::write_corpus_file(path, *part);
    write_sidecar_manifest(path, {a.corpus}, settings, {a.seed});
  }
  out << "train " << s.train.size() << ", valid " << s.valid.size() << ", test " << s.test.size()
      << " (test answers: " << count_answers(s.test, Label::Human) << " human, "
      << count_answers(s.test, Label::Machine) << " machine)\n";
  return 0;
}

struct UnitsArgs {
  std::string corpus;
  std::string kind = "full";
  std::string out;
};

int cmd_units(const UnitsArgs& a, std::ostream& out) {
  const auto batch = corpus::build_units(corpus::read_corpus_file(a.corpus), parse_unit_kind(a.kind));
  corpus::write_units_file(a.out, batch.units);
  out << batch.units.size() << " " << a.kind << " units";
  if (batch.skipped_empty) out << ", " << batch.skipped_empty << " empty answers skipped";
  out << "\n";
  return 0;
}

struct AttackArgs {
  std::string kind;
  double rate = kDefaultAttackRate;
  std::uint64_t seed = 0;
  std::string in;
  std::string out;
  std::string layout = "azerty";
  std::string confusables;
};

int cmd_attack(const AttackArgs& a, std::ostream& out, const Resources& res) {
  ConfusableTable custom;
  const ConfusableTable* table = &res.confusables;
  if (!a.confusables.empty()) {
    custom = ConfusableTable::parse(std::string_view(slurp(a.confusables)));
    table = &custom;
  }
  const auto units = corpus::read_units_file(a.in);
  const auto attacked = attacks::perturb_testset(units, parse_attack_kind(a.kind), a.rate, a.seed, *table,
                                                 parse_keyboard_layout(a.layout));
  corpus::write_units_file(a.out, attacked);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < units.size(); ++i) changed += units[i].text != attacked[i].text;
  out << "attacked " << units.size() << " units (" << changed << " changed) -> " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string subset = "full";
  std::string config;
  std::size_t seeds = 5;
  std::uint64_t first_seed = 1;
  std::string train;
  std::string valid;
  std::optional<std::uint64_t> mix_seed;
  std::string layout = "azerty";
  std::string out;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::shared_ptr<const Resources> res) {
  if (a.seeds == 0) throw Error("--seeds must be at least 1");
  const TrainingConfig cfg = training_config(a.config);
  const UnitKind kind = parse_unit_kind(a.subset);
  auto train_units = corpus::build_units(corpus::read_corpus_file(a.train), kind).units;
  if (a.mix_seed)
    train_units = attacks::build_training_mix(train_units, *a.mix_seed, kDefaultAttackRate, res->confusables,
                                              parse_keyboard_layout(a.layout));
  std::vector<ExampleUnit> valid_units;
  if (!a.valid.empty()) valid_units = corpus::build_units(corpus::read_corpus_file(a.valid), kind).units;

  const features::Featurizer featurizer(cfg.features, res);
  const Dataset train_data = detector::featurize(train_units, featurizer);
  const Dataset valid_data = detector::featurize(valid_units, featurizer);
  std::vector<double> grid = cfg.learning_rate_grid;
  if (valid_units.empty()) grid = {cfg.hyper.learning_rate};

  std::vector<std::uint64_t> seeds;
  std::vector<MetricSet> per_seed;
  std::optional<Selection> best;
  for (std::size_t k = 0; k < a.seeds; ++k) {
    Hyperparams h = cfg.hyper;
    h.seed = a.first_seed + k;
    seeds.push_back(h.seed);
    Selection sel = detector::select_learning_rate(train_data, valid_data, cfg.features, h, grid);
    out << "seed " << h.seed << ": lr " << sel.learning_rate;
    if (!valid_units.empty()) {
      per_seed.push_back(eval::metric_set(
          eval::confusion(detector::predict_labels(sel.model, featurizer, valid_units), valid_data.labels)));
      out << ", valid macro-F1 " << eval::format_fixed(sel.valid_macro_f1, 4);
    }
    out << "\n";
    if (!best || sel.valid_macro_f1 > best->valid_macro_f1) best = std::move(sel);
  }
  if (!per_seed.empty()) {
    const auto agg = eval::aggregate_seeds(per_seed);
    for (const char* key : {"accuracy", "macro_f1", "machine_f1", "human_f1"}) {
      const Aggregate& m = agg.at(key);
      out << key << ": " << eval::format_fixed(m.mean, 4);
      if (m.n > 1) out << " ± " << eval::format_fixed(m.sample_std, 4);
      out << "\n";
    }
  }
  detector::save_model_file(a.out, best->model);
  std::vector<fs::path> inputs{a.train};
  if (!a.valid.empty()) inputs.emplace_back(a.valid);
  ordered_json settings = cfg.to_json();
  settings["command"] = "train";
  settings["subset"] = a.subset;
  settings["mix_seed"] = a.mix_seed ? json(*a.mix_seed) : json(nullptr);
  write_sidecar_manifest(a.out, inputs, settings, seeds);
  out << "model (lr " << best->learning_rate << ") -> " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::vector<std::string> test;
  std::vector<std::string> ood;
  std::string subset = "full";
  double rate = kDefaultAttackRate;
  std::uint64_t misspelling_seed = 101;
  std::uint64_t homoglyph_seed = 202;
  bool no_attacks = false;
  std::string json_out;
};

std::vector<Record> read_all(const std::vector<std::string>& paths) {
  std::vector<Record> all;
  for (const auto& p : paths) {
    auto part = corpus::read_corpus_file(p);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::shared_ptr<const Resources> res) {
  const ModelParams model = detector::load_model_file(a.model);
  const features::Featurizer featurizer(model.config, res);
  auto registry = corpus::TestSetRegistry::with_defaults();
  const auto sets = pipeline::make_test_sets(read_all(a.test), read_all(a.ood), parse_unit_kind(a.subset), registry);
  std::vector<PerturbationSpec> attacks;
  if (!a.no_attacks)
    attacks = {{AttackKind::Misspelling, a.rate, a.misspelling_seed}, {AttackKind::Homoglyph, a.rate, a.homoglyph_seed}};
  const EvalReport report = eval::robustness_table(model, featurizer, sets, attacks, registry);
  if (!a.json_out.empty()) dump_to(a.json_out, eval::to_json(report).dump(2) + "\n");
  eval::render_markdown(out, report);
  return 0;
}

struct ReportArgs {
  std::string in;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  json j;
  try {
    j = json::parse(slurp(a.in));
  } catch (const json::parse_error& e) {
    throw FormatError(a.in + ": " + e.what());
  }
  std::ostringstream md;
  if (j.contains("subsets")) pipeline::render_reports_markdown(md, pipeline::reports_from_json(j));
  else eval::render_markdown(md, eval::report_from_json(j));
  if (a.out.empty()) out << md.str();
  else dump_to(a.out, md.str());
  return 0;
}

struct CorrelateArgs {
  std::string corpus;
  std::string scores;
  std::string model;
  std::string subset = "full";
};

std::map<std::string, double> read_scores(const std::string& path) {
  std::map<std::string, double> scores;
  std::istringstream in(slurp(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("expected record_id<TAB>score", n);
    try {
      std::size_t used = 0;
      const std::string v = line.substr(tab + 1);
      scores[line.substr(0, tab)] = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::logic_error&) {
      throw FormatError("bad score '" + line.substr(tab + 1) + "'", n);
    }
  }
  return scores;
}

// Share of a record's units the model labels correctly.
std::map<std::string, double> model_scores(const std::vector<Record>& records, const std::string& model_path,
                                           UnitKind kind, std::shared_ptr<const Resources> res) {
  const ModelParams model = detector::load_model_file(model_path);
  const features::Featurizer featurizer(model.config, res);
  const auto units = corpus::build_units(records, kind).units;
  const auto preds = detector::predict_labels(model, featurizer, units);
  std::map<std::string, std::pair<double, double>> acc;
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto& [hit, total] = acc[units[i].record_id];
    hit += preds[i] == units[i].label;
    total += 1;
  }
  std::map<std::string, double> scores;
  for (const auto& [id, ht] : acc) scores[id] = ht.first / ht.second;
  return scores;
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out, std::shared_ptr<const Resources> res) {
  const auto records = corpus::read_corpus_file(a.corpus);
  const auto scores = a.scores.empty() ? model_scores(records, a.model, parse_unit_kind(a.subset), res)
                                       : read_scores(a.scores);
  const auto q = eval::correlate_quality(records, scores);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  ordered_json j{{"pearson", opt(q.coefficients.pearson)},
                 {"spearman", opt(q.coefficients.spearman)},
                 {"kendall_tau_b", opt(q.coefficients.kendall_tau_b)},
                 {"used", q.used},
                 {"skipped", q.skipped}};
  out << j.dump(2) << "\n";
  return 0;
}

struct PipelineArgs {
  std::string config;
  std::string out_dir;
};

int cmd_pipeline(const PipelineArgs& a, std::ostream& out, std::shared_ptr<const Resources> res) {
  const PipelineConfig cfg = PipelineConfig::from_file(a.config);
  const auto result = pipeline::run(cfg, a.out_dir, out, std::move(res));
  out << "report -> " << (fs::path(a.out_dir) / "report.md").string() << "\n";
  (void)result;
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Machine-generated text detection toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);
  app.footer("Environment: MGTD_DATA_DIR overrides the bundled data tables (confusables.tsv, lexicons).\n"
             "Exit codes: 0 ok, 1 runtime error, 2 usage error, 3 format error, 4 fingerprint mismatch.");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Normalize raw corpus files into the record schema");
  c_ingest->add_option("--in", ingest.inputs, "Input JSONL files")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--schema", ingest.schema, "Input layout")
      ->check(CLI::IsMember({"hc3", "record"}))->capture_default_str();
  c_ingest->add_option("--language", ingest.language, "Language for hc3 input")
      ->check(CLI::IsMember({"fr", "en"}))->capture_default_str();
  c_ingest->add_option("--source-tag", ingest.source_tag, "source_tag for hc3 rows lacking one")->capture_default_str();
  c_ingest->add_option("--out", ingest.out, "Output corpus file")->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Balanced test selection and train/valid split");
  c_split->add_option("--corpus", split.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  c_split->add_option("--test-pairs", split.test_pairs, "Records in the balanced test set")->required();
  c_split->add_option("--valid-fraction", split.valid_fraction, "Validation share of the rest")->capture_default_str();
  c_split->add_option("--seed", split.seed, "Split seed")->capture_default_str();
  c_split->add_option("--out-dir", split.out_dir, "Directory for train/valid/test.jsonl")->required();

  UnitsArgs units;
  auto* c_units = app.add_subcommand("units", "Expand records into labeled classification units");
  c_units->add_option("--corpus", units.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  c_units->add_option("--kind", units.kind, "Unit kind")
      ->check(CLI::IsMember({"qa", "full", "sentence"}))->capture_default_str();
  c_units->add_option("--out", units.out, "Output units file")->required();

  AttackArgs attack;
  auto* c_attack = app.add_subcommand("attack", "Perturb a units file");
  c_attack->add_option("--kind", attack.kind, "Attack")->required()->check(CLI::IsMember({"misspelling", "homoglyph"}));
  c_attack->add_option("--rate", attack.rate, "Per-token/per-character probability")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_attack->add_option("--seed", attack.seed, "Attack seed")->required();
  c_attack->add_option("--in", attack.in, "Input units file")->required()->check(CLI::ExistingFile);
  c_attack->add_option("--out", attack.out, "Output units file")->required();
  c_attack->add_option("--layout", attack.layout, "Keyboard for misspellings")
      ->check(CLI::IsMember({"azerty", "qwerty"}))->capture_default_str();
  c_attack->add_option("--confusables", attack.confusables, "Replacement homoglyph table (TSV)")
      ->check(CLI::ExistingFile);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the detector, one model per seed, keep the best");
  c_train->add_option("--subset", train.subset, "Unit kind")
      ->check(CLI::IsMember({"qa", "full", "sentence"}))->capture_default_str();
  c_train->add_option("--config", train.config, "Training config (JSON)")->check(CLI::ExistingFile);
  c_train->add_option("--seeds", train.seeds, "Number of seeds")->capture_default_str();
  c_train->add_option("--first-seed", train.first_seed, "First seed; later ones count up")->capture_default_str();
  c_train->add_option("--train", train.train, "Training records")->required()->check(CLI::ExistingFile);
  c_train->add_option("--valid", train.valid, "Validation records (enables the learning-rate grid)")
      ->check(CLI::ExistingFile);
  c_train->add_option("--mix-seed", train.mix_seed, "Train on raw + misspelled + homoglyph copies");
  c_train->add_option("--layout", train.layout, "Keyboard for the mix")
      ->check(CLI::IsMember({"azerty", "qwerty"}))->capture_default_str();
  c_train->add_option("--out", train.out, "Model file")->required();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Robustness table for a model");
  c_eval->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--test", ev.test, "In-domain test records")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--ood", ev.ood, "Out-of-domain records; one row per source_tag")->check(CLI::ExistingFile);
  c_eval->add_option("--subset", ev.subset, "Unit kind")
      ->check(CLI::IsMember({"qa", "full", "sentence"}))->capture_default_str();
  c_eval->add_option("--rate", ev.rate, "Attack rate")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_eval->add_option("--misspelling-seed", ev.misspelling_seed)->capture_default_str();
  c_eval->add_option("--homoglyph-seed", ev.homoglyph_seed)->capture_default_str();
  c_eval->add_flag("--no-attacks", ev.no_attacks, "Raw rows only");
  c_eval->add_option("--json", ev.json_out, "Also write the report as JSON");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Render a JSON report as markdown");
  c_report->add_option("--in", report.in, "report.json")->required()->check(CLI::ExistingFile);
  c_report->add_option("--out", report.out, "Markdown file (default stdout)");

  CorrelateArgs corr;
  auto* c_corr = app.add_subcommand("correlate", "Correlate translation quality with detector scores");
  c_corr->add_option("--corpus", corr.corpus, "Records with translation_quality")->required()->check(CLI::ExistingFile);
  auto* o_scores = c_corr->add_option("--scores", corr.scores, "TSV: record_id<TAB>score")->check(CLI::ExistingFile);
  auto* o_model = c_corr->add_option("--model", corr.model, "Score records by model correctness")
                      ->check(CLI::ExistingFile);
  o_scores->excludes(o_model);
  c_corr->add_option("--subset", corr.subset, "Unit kind with --model")
      ->check(CLI::IsMember({"qa", "full", "sentence"}))->capture_default_str();
  c_corr->callback([&] {
    if (corr.scores.empty() && corr.model.empty()) throw CLI::ValidationError("one of --scores or --model is required");
  });

  PipelineArgs pipe;
  auto* c_pipe = app.add_subcommand("pipeline", "Run split, units, training and evaluation from one config");
  c_pipe->add_option("--config", pipe.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  c_pipe->add_option("--out-dir", pipe.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    auto res = load_resources();
    if (c_ingest->parsed()) return cmd_ingest(ingest, out, err);
    if (c_split->parsed()) return cmd_split(split, out);
    if (c_units->parsed()) return cmd_units(units, out);
    if (c_attack->parsed()) return cmd_attack(attack, out, *res);
    if (c_train->parsed()) return cmd_train(train, out, res);
    if (c_eval->parsed()) return cmd_eval(ev, out, res);
    if (c_report->parsed()) return cmd_report(report, out);
    if (c_corr->parsed()) return cmd_correlate(corr, out, res);
    if (c_pipe->parsed()) return cmd_pipeline(pipe, out, res);
  } catch (const FingerprintMismatch& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mgtd::cli
