#include "mgtd/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "mgtd/error.hpp"

namespace fs = std::filesystem;

namespace mgtd {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Digests

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

namespace {

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["toolkit_version"] = toolkit_version;
  j["config_hash"] = config_hash;
  auto files = [](const std::vector<FileDigest>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return a;
  };
  j["inputs"] = files(inputs);
  j["seeds"] = seeds;
  ordered_json ts = ordered_json::object();
  for (const auto& [k, v] : timestamps) ts[k] = v;
  j["timestamps"] = ts;
  j["outputs"] = files(outputs);
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& f : j.at("inputs")) m.inputs.push_back({f.at("path"), f.at("sha256")});
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& [k, v] : j.at("timestamps").items()) m.timestamps.emplace_back(k, v.get<std::string>());
    for (const auto& f : j.at("outputs")) m.outputs.push_back({f.at("path"), f.at("sha256")});
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

const RunManifest::FileDigest* RunManifest::find_output(std::string_view path) const {
  for (const auto& f : outputs)
    if (f.path == path) return &f;
  return nullptr;
}

RunManifest describe_inputs(const std::vector<fs::path>& inputs, std::string config_hash,
                            std::vector<std::uint64_t> seeds) {
  RunManifest m;
  m.config_hash = std::move(config_hash);
  m.seeds = std::move(seeds);
  std::time_t newest = 0;
  for (const auto& p : inputs) {
    m.inputs.push_back({p.filename().string(), sha256_file(p)});
    auto ft = fs::last_write_time(p);
    auto sys = std::chrono::file_clock::to_sys(ft);
    newest = std::max(newest, std::chrono::system_clock::to_time_t(
                                  std::chrono::time_point_cast<std::chrono::system_clock::duration>(sys)));
  }
  m.timestamps.emplace_back("inputs_modified", iso_utc(newest));
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde)
    m.timestamps.emplace_back("source_date_epoch", iso_utc(static_cast<std::time_t>(std::strtoll(sde, nullptr, 10))));
  return m;
}

void write_manifest(const fs::path& path, const RunManifest& manifest) {
  write_text(path, manifest.to_json().dump(2) + "\n");
}

std::optional<RunManifest> read_manifest(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    return RunManifest::from_json(json::parse(read_text(path)));
  } catch (const json::exception&) {
    return std::nullopt;
  } catch (const FormatError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto name : known) ok |= k == name;
    if (!ok) throw FormatError("unknown key '" + k + "' in " + std::string(where));
  }
}

NgramRange range_from(const json& j) {
  auto v = j.get<std::vector<int>>();
  if (v.size() != 2) throw FormatError("n-gram range must be [min, max]");
  return {v[0], v[1]};
}

std::vector<UnitKind> subsets_from(const json& j) {
  std::vector<UnitKind> out;
  for (const auto& s : j) out.push_back(parse_unit_kind(s.get<std::string>()));
  return out;
}

}  // namespace

TrainingConfig TrainingConfig::from_json(const json& j) {
  TrainingConfig c;
  try {
    if (auto f = j.find("features"); f != j.end()) {
      reject_unknown(*f, {"char_ngrams", "word_ngrams", "hash_dimension", "stylometric",
                          "fold_confusables", "lowercase"}, "features");
      if (f->contains("char_ngrams")) c.features.char_ngrams = range_from(f->at("char_ngrams"));
      if (f->contains("word_ngrams")) c.features.word_ngrams = range_from(f->at("word_ngrams"));
      c.features.hash_dimension = f->value("hash_dimension", c.features.hash_dimension);
      c.features.use_stylometric = f->value("stylometric", c.features.use_stylometric);
      c.features.fold_confusables = f->value("fold_confusables", c.features.fold_confusables);
      c.features.lowercase = f->value("lowercase", c.features.lowercase);
    }
    if (auto h = j.find("hyper"); h != j.end()) {
      reject_unknown(*h, {"learning_rate", "epochs", "batch_size", "l2_penalty", "warmup_ratio"}, "hyper");
      c.hyper.learning_rate = h->value("learning_rate", c.hyper.learning_rate);
      c.hyper.epochs = h->value("epochs", c.hyper.epochs);
      c.hyper.batch_size = h->value("batch_size", c.hyper.batch_size);
      c.hyper.l2_penalty = h->value("l2_penalty", c.hyper.l2_penalty);
      c.hyper.warmup_ratio = h->value("warmup_ratio", c.hyper.warmup_ratio);
    }
    if (auto g = j.find("learning_rate_grid"); g != j.end())
      c.learning_rate_grid = g->get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad training config: ") + e.what());
  }
  c.features.validate();
  c.hyper.validate();
  return c;
}

ordered_json TrainingConfig::to_json() const {
  ordered_json j;
  j["features"] = {{"char_ngrams", {features.char_ngrams.min, features.char_ngrams.max}},
                   {"word_ngrams", {features.word_ngrams.min, features.word_ngrams.max}},
                   {"hash_dimension", features.hash_dimension},
                   {"stylometric", features.use_stylometric},
                   {"fold_confusables", features.fold_confusables},
                   {"lowercase", features.lowercase}};
  j["hyper"] = {{"learning_rate", hyper.learning_rate},
                {"epochs", hyper.epochs},
                {"batch_size", hyper.batch_size},
                {"l2_penalty", hyper.l2_penalty},
                {"warmup_ratio", hyper.warmup_ratio}};
  j["learning_rate_grid"] = learning_rate_grid;
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    reject_unknown(j, {"corpus", "out_of_domain", "split", "subsets", "training_mix", "features", "hyper",
                       "learning_rate_grid", "seeds", "attacks", "keyboard"}, "pipeline config");
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
    c.corpus = resolve(j.at("corpus").get<std::string>());
    for (const auto& p : j.value("out_of_domain", std::vector<std::string>{})) c.out_of_domain.push_back(resolve(p));
    if (auto s = j.find("split"); s != j.end()) {
      reject_unknown(*s, {"test_pairs", "valid_fraction", "seed"}, "split");
      c.test_pairs = s->value("test_pairs", c.test_pairs);
      c.valid_fraction = s->value("valid_fraction", c.valid_fraction);
      c.split_seed = s->value("seed", c.split_seed);
    }
    if (j.contains("subsets")) c.subsets = subsets_from(j.at("subsets"));
    if (auto m = j.find("training_mix"); m != j.end()) {
      reject_unknown(*m, {"enabled", "seed", "rate"}, "training_mix");
      c.training_mix = m->value("enabled", false);
      c.mix_seed = m->value("seed", c.mix_seed);
      c.mix_rate = m->value("rate", c.mix_rate);
    }
    c.training = TrainingConfig::from_json(j);
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (auto a = j.find("attacks"); a != j.end()) {
      c.attacks.clear();
      for (const auto& spec : *a)
        c.attacks.push_back({parse_attack_kind(spec.at("kind").get<std::string>()),
                             spec.value("rate", kDefaultAttackRate), spec.value("seed", std::uint64_t{0})});
    }
    if (j.contains("keyboard")) c.layout = parse_keyboard_layout(j.at("keyboard").get<std::string>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad pipeline config: ") + e.what());
  }
  if (c.seeds.empty()) throw FormatError("pipeline config needs at least one seed");
  if (c.subsets.empty()) throw FormatError("pipeline config needs at least one subset");
  return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["corpus"] = corpus.filename().string();
  ordered_json ood = ordered_json::array();
  for (const auto& p : out_of_domain) ood.push_back(p.filename().string());
  j["out_of_domain"] = ood;
  j["split"] = {{"test_pairs", test_pairs}, {"valid_fraction", valid_fraction}, {"seed", split_seed}};
  ordered_json subs = ordered_json::array();
  for (auto s : subsets) subs.push_back(to_string(s));
  j["subsets"] = subs;
  j["training_mix"] = {{"enabled", training_mix}, {"seed", mix_seed}, {"rate", mix_rate}};
  const ordered_json t = training.to_json();
  for (const auto& [k, v] : t.items()) j[k] = v;
  j["seeds"] = seeds;
  ordered_json atk = ordered_json::array();
  for (const auto& a : attacks) atk.push_back({{"kind", to_string(a.kind)}, {"rate", a.rate}, {"seed", a.seed}});
  j["attacks"] = atk;
  j["keyboard"] = layout == KeyboardLayout::Azerty ? "azerty" : "qwerty";
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline

namespace pipeline {

TestSets make_test_sets(const std::vector<Record>& test_records, const std::vector<Record>& out_of_domain,
                        UnitKind kind, corpus::TestSetRegistry& registry) {
  TestSets sets;
  sets.emplace_back("test", corpus::build_units(test_records, kind).units);
  for (auto& [tag, records] : corpus::group_by_source(out_of_domain)) {
    if (tag == "test") throw Error("out-of-domain source_tag 'test' collides with the in-domain test set");
    if (!registry.contains(tag)) registry.add(tag, tag);
    sets.emplace_back(tag, corpus::build_units(records, kind).units);
  }
  return sets;
}

ordered_json reports_to_json(const std::vector<SubsetReport>& reports) {
  ordered_json j;
  j["toolkit_version"] = kToolkitVersion;
  ordered_json subs = ordered_json::array();
  for (const auto& r : reports) subs.push_back({{"subset", to_string(r.subset)}, {"report", eval::to_json(r.report)}});
  j["subsets"] = subs;
  return j;
}

std::vector<SubsetReport> reports_from_json(const json& j) {
  std::vector<SubsetReport> out;
  try {
    if (!j.contains("subsets")) {
      out.push_back({UnitKind::Full, eval::report_from_json(j)});
      return out;
    }
    for (const auto& s : j.at("subsets"))
      out.push_back({parse_unit_kind(s.at("subset").get<std::string>()), eval::report_from_json(s.at("report"))});
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
  return out;
}

void render_reports_markdown(std::ostream& out, const std::vector<SubsetReport>& reports) {
  out << "# Detector evaluation\n";
  for (const auto& r : reports) {
    out << "\n## Subset: " << to_string(r.subset) << "\n\n";
    eval::render_markdown(out, r.report);
  }
}

namespace {

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

bool same_inputs(const RunManifest& a, const RunManifest& b) {
  if (a.config_hash != b.config_hash || a.inputs.size() != b.inputs.size()) return false;
  for (std::size_t i = 0; i < a.inputs.size(); ++i)
    if (a.inputs[i].path != b.inputs[i].path || a.inputs[i].sha256 != b.inputs[i].sha256) return false;
  return true;
}

}  // namespace

PipelineResult run(const PipelineConfig& config, const fs::path& out_dir, std::ostream& log,
                   std::shared_ptr<const Resources> resources) {
  PipelineResult result;
  fs::create_directories(out_dir / "split");
  fs::create_directories(out_dir / "models");

  std::vector<fs::path> inputs{config.corpus};
  inputs.insert(inputs.end(), config.out_of_domain.begin(), config.out_of_domain.end());
  const std::string config_hash = sha256_hex(config.to_json().dump());
  RunManifest manifest = stage("manifest", [&] { return describe_inputs(inputs, config_hash, config.seeds); });
  const auto previous = read_manifest(out_dir / "manifest.json");
  const bool can_resume = previous && same_inputs(*previous, manifest);

  auto record_output = [&](const std::string& rel) {
    manifest.outputs.push_back({rel, sha256_file(out_dir / rel)});
  };

  const std::vector<Record> records = stage("ingest", [&] { return corpus::read_corpus_file(config.corpus.string()); });
  const std::vector<Record> ood = stage("ingest", [&] {
    std::vector<Record> all;
    for (const auto& p : config.out_of_domain) {
      auto part = corpus::read_corpus_file(p.string());
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  });
  log << "ingest: " << records.size() << " records, " << ood.size() << " out-of-domain records\n";

  const Split split = stage("split", [&] {
    Split s = corpus::build_split(records, config.test_pairs, config.valid_fraction, config.split_seed);
    corpus::write_corpus_file((out_dir / "split/train.jsonl").string(), s.train);
    corpus::write_corpus_file((out_dir / "split/valid.jsonl").string(), s.valid);
    corpus::write_corpus_file((out_dir / "split/test.jsonl").string(), s.test);
    return s;
  });
  for (const char* f : {"split/train.jsonl", "split/valid.jsonl", "split/test.jsonl"}) record_output(f);
  log << "split: train " << split.train.size() << ", valid " << split.valid.size() << ", test "
      << split.test.size() << "\n";

  const features::Featurizer featurizer(config.training.features, resources);
  corpus::TestSetRegistry registry = corpus::TestSetRegistry::with_defaults();

  for (UnitKind subset : config.subsets) {
    const std::string sub(to_string(subset));
    auto train_units = stage("units", [&] { return corpus::build_units(split.train, subset).units; });
    auto valid_units = stage("units", [&] { return corpus::build_units(split.valid, subset).units; });
    if (config.training_mix)
      train_units = stage("mix", [&] {
        return attacks::build_training_mix(train_units, config.mix_seed, config.mix_rate,
                                           resources->confusables, config.layout);
      });
    const TestSets test_sets = stage("units", [&] { return make_test_sets(split.test, ood, subset, registry); });
    log << "units[" << sub << "]: train " << train_units.size() << ", valid " << valid_units.size() << "\n";

    const Dataset train_data = stage("features", [&] { return detector::featurize(train_units, featurizer); });
    const Dataset valid_data = stage("features", [&] { return detector::featurize(valid_units, featurizer); });

    std::vector<EvalReport> per_seed;
    for (std::uint64_t seed : config.seeds) {
      const std::string rel = "models/" + sub + "-seed" + std::to_string(seed) + ".model";
      const fs::path model_path = out_dir / rel;
      ModelParams model = stage("train", [&] {
        if (can_resume && fs::exists(model_path)) {
          const auto* prior = previous->find_output(rel);
          if (prior && prior->sha256 == sha256_file(model_path)) {
            log << "train[" << sub << ", seed " << seed << "]: reusing " << rel << "\n";
            return detector::load_model_file(model_path.string());
          }
        }
        Hyperparams h = config.training.hyper;
        h.seed = seed;
        Selection sel = detector::select_learning_rate(train_data, valid_data, config.training.features, h,
                                                       config.training.learning_rate_grid);
        log << "train[" << sub << ", seed " << seed << "]: lr " << sel.learning_rate << ", valid macro-F1 "
            << eval::format_fixed(sel.valid_macro_f1, 4) << "\n";
        detector::save_model_file(model_path.string(), sel.model);
        return sel.model;
      });
      record_output(rel);
      per_seed.push_back(stage("eval", [&] {
        return eval::robustness_table(model, featurizer, test_sets, config.attacks, registry);
      }));
    }
    result.reports.push_back({subset, eval::merge_seeds(per_seed)});
  }

  stage("report", [&] {
    write_text(out_dir / "report.json", reports_to_json(result.reports).dump(2) + "\n");
    std::ostringstream md;
    render_reports_markdown(md, result.reports);
    write_text(out_dir / "report.md", md.str());
    return 0;
  });
  record_output("report.json");
  record_output("report.md");
  write_manifest(out_dir / "manifest.json", manifest);
  result.manifest = std::move(manifest);
  return result;
}

}  // namespace pipeline
}  // namespace mgtd
