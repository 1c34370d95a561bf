#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgtd/attacks.hpp"

namespace mgtd {

/// One phrase per line, `#` comments, surrounding whitespace ignored.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {}
  static Lexicon parse(std::string_view text);

  const std::vector<std::string>& phrases() const { return phrases_; }
  bool contains(std::string_view phrase) const;

 private:
  std::vector<std::string> phrases_;
};

/// Data tables consulted by feature extraction.
struct Resources {
  ConfusableTable confusables;
  Lexicon hedging;
  Lexicon personal;
  Lexicon openers;
  Lexicon stopwords;
  /// Hash over the raw text of every table; part of the feature fingerprint.
  std::string digest;

  static std::shared_ptr<const Resources> builtin();
  /// Loads confusables.tsv, hedging_fr.txt, personal_fr.txt, openers_fr.txt and
  /// stopwords_fr.txt from `dir`; files missing there fall back to the builtin copy.
  static std::shared_ptr<const Resources> from_directory(const std::string& dir);
};

struct NgramRange {
  int min = 0;
  int max = 0;
  bool enabled() const { return max > 0; }
  friend bool operator==(const NgramRange&, const NgramRange&) = default;
};

struct FeatureConfig {
  NgramRange char_ngrams{2, 4};
  NgramRange word_ngrams{1, 2};  // {0, 0} disables
  std::uint32_t hash_dimension = 1u << 18;
  bool use_stylometric = true;
  bool fold_confusables = false;
  bool lowercase = true;

  /// Throws Error on a non power-of-two dimension below 2^10 or a bad range.
  void validate() const;
  /// Stable textual form, e.g. `char=2-4;word=1-2;dim=262144;stylo=1;fold=0;lower=1`.
  std::string canonical() const;
  static FeatureConfig parse_canonical(std::string_view s);

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Sparse vector with strictly increasing indices.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dimension = 0;
  std::string config_fingerprint;

  double norm() const;
  FeatureVector normalized() const;
  /// `index:weight` per line.
  void write_sparse(std::ostream& out) const;
};

enum class Cue : std::size_t {
  Conditional,
  Hedging,
  ImpersonalOpener,
  ListStructure,
  PunctuationIrregularity,
  PersonalMarker,
};
inline constexpr std::size_t kCueCount = 6;

std::string_view cue_name(Cue c);

/// Raw counts and per-1000-character rates for each cue.
struct CueProfile {
  std::array<std::size_t, kCueCount> counts{};
  std::array<double, kCueCount> rates{};
  std::size_t length = 0;  // code points

  std::size_t count(Cue c) const { return counts[static_cast<std::size_t>(c)]; }
  double rate(Cue c) const { return rates[static_cast<std::size_t>(c)]; }
  std::vector<std::pair<std::string, double>> named_rates() const;
};

namespace features {

CueProfile stylometric_cues(std::string_view text, const Resources& res = *Resources::builtin());

/// Share of the question's content words that reappear in the answer.
double question_overlap(std::string_view question, std::string_view answer,
                        const Resources& res = *Resources::builtin());

/// Content tokens used by question_overlap: lowercased, hyphens and elisions
/// folded, stopwords removed, lightly stemmed.
std::vector<std::string> content_tokens(std::string_view text, const Lexicon& stopwords);

std::string fold_confusables(std::string_view text,
                             const ConfusableTable& table = ConfusableTable::builtin());

/// Extraction bound to one configuration and one set of data tables.
class Featurizer {
 public:
  explicit Featurizer(FeatureConfig config,
                      std::shared_ptr<const Resources> resources = Resources::builtin());

  /// Raw n-gram counts plus stylometric slots; throws Error on empty text.
  FeatureVector extract(std::string_view text) const;

  const FeatureConfig& config() const { return config_; }
  const Resources& resources() const { return *resources_; }
  const std::string& fingerprint() const { return fingerprint_; }
  /// hash_dimension plus stylometric slots.
  std::uint32_t dimension() const;

 private:
  FeatureConfig config_;
  std::shared_ptr<const Resources> resources_;
  std::string fingerprint_;
};

FeatureVector extract(std::string_view text, const FeatureConfig& config);

}  // namespace features
}  // namespace mgtd
