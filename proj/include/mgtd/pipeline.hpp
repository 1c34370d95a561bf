#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mgtd/attacks.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/detector.hpp"
#include "mgtd/error.hpp"
#include "mgtd/features.hpp"
#include "mgtd/report.hpp"

namespace mgtd {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance of one pipeline output directory.
///
/// Every field is a function of the inputs, so re-running an unchanged
/// configuration rewrites the same bytes. `timestamps` holds the newest input
/// modification time, plus SOURCE_DATE_EPOCH when that variable is set.
struct RunManifest {
  struct FileDigest {
    std::string path;
    std::string sha256;
  };

  std::string toolkit_version{kToolkitVersion};
  std::string config_hash;
  std::vector<FileDigest> inputs;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> timestamps;
  std::vector<FileDigest> outputs;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  const FileDigest* find_output(std::string_view path) const;
};

/// Digests and timestamps for a list of input files.
RunManifest describe_inputs(const std::vector<std::filesystem::path>& inputs,
                            std::string config_hash, std::vector<std::uint64_t> seeds);

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
std::optional<RunManifest> read_manifest(const std::filesystem::path& path);

/// Training-side settings shared by `train` and `pipeline`.
struct TrainingConfig {
  FeatureConfig features;
  Hyperparams hyper;
  std::vector<double> learning_rate_grid{kLearningRateGrid.begin(), kLearningRateGrid.end()};

  static TrainingConfig from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct PipelineConfig {
  std::filesystem::path corpus;
  std::vector<std::filesystem::path> out_of_domain;
  std::size_t test_pairs = 0;
  double valid_fraction = 0.2;
  std::uint64_t split_seed = 0;
  std::vector<UnitKind> subsets{UnitKind::Qa, UnitKind::Full, UnitKind::Sentence};
  bool training_mix = false;
  std::uint64_t mix_seed = 0;
  double mix_rate = kDefaultAttackRate;
  TrainingConfig training;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<PerturbationSpec> attacks{{AttackKind::Misspelling, kDefaultAttackRate, 101},
                                        {AttackKind::Homoglyph, kDefaultAttackRate, 202}};
  KeyboardLayout layout = KeyboardLayout::Azerty;

  /// Relative paths resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig from_file(const std::filesystem::path& path);
  /// Canonical form; its SHA-256 is the manifest's config hash.
  nlohmann::ordered_json to_json() const;
};

struct SubsetReport {
  UnitKind subset = UnitKind::Full;
  EvalReport report;
};

struct PipelineResult {
  std::vector<SubsetReport> reports;
  RunManifest manifest;
};

/// Error raised by a pipeline stage; the message starts with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error(stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace pipeline {

/// split -> units -> optional mix -> per-seed training with learning-rate
/// selection -> robustness tables -> report.json, report.md, manifest.json.
/// Models whose digest is recorded in a matching manifest are reused.
PipelineResult run(const PipelineConfig& config, const std::filesystem::path& out_dir,
                   std::ostream& log,
                   std::shared_ptr<const Resources> resources = Resources::builtin());

nlohmann::ordered_json reports_to_json(const std::vector<SubsetReport>& reports);
std::vector<SubsetReport> reports_from_json(const nlohmann::json& j);
void render_reports_markdown(std::ostream& out, const std::vector<SubsetReport>& reports);

/// Test sets for one subset: the in-domain test split under tag `test`, then one
/// set per distinct source_tag of the out-of-domain records.
TestSets make_test_sets(const std::vector<Record>& test_records,
                        const std::vector<Record>& out_of_domain, UnitKind kind,
                        corpus::TestSetRegistry& registry);

}  // namespace pipeline

namespace cli {

/// Entry point of the `mgtd` executable. Exit codes: 0 success, 1 runtime
/// error, 2 usage error, 3 format error, 4 fingerprint mismatch.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cli
}  // namespace mgtd
