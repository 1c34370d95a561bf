#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mgtd {

/// Positive class throughout the toolkit is Machine.
enum class Label { Human, Machine };

enum class UnitKind { Qa, Full, Sentence };

enum class Variant { Raw, Misspelled, Homoglyph };

enum class Language { Fr, En };

std::string_view to_string(Label l);
std::string_view to_string(UnitKind k);
std::string_view to_string(Variant v);
std::string_view to_string(Language l);

Label parse_label(std::string_view s);
UnitKind parse_unit_kind(std::string_view s);
Variant parse_variant(std::string_view s);
Language parse_language(std::string_view s);

/// One question with its human and machine answers.
struct Record {
  std::string id;
  std::string question;
  std::vector<std::string> human_answers;
  std::vector<std::string> machine_answers;
  Language language = Language::Fr;
  std::string source_tag = "hc3";
  std::optional<int> translation_quality;  // 1..5

  friend bool operator==(const Record&, const Record&) = default;
};

/// One labeled classification instance.
struct ExampleUnit {
  std::string text;
  Label label = Label::Human;
  UnitKind unit_kind = UnitKind::Full;
  std::string record_id;
  Variant variant = Variant::Raw;

  friend bool operator==(const ExampleUnit&, const ExampleUnit&) = default;
};

struct Split {
  std::vector<Record> train;
  std::vector<Record> valid;
  std::vector<Record> test;
};

struct UnitBatch {
  std::vector<ExampleUnit> units;
  std::size_t skipped_empty = 0;
};

namespace corpus {

/// Reads one JSON record per line. Blank lines are ignored. Text is NFC-normalized.
/// Throws FormatError naming the line for malformed input or a duplicate id.
std::vector<Record> parse_corpus(std::istream& in);
std::vector<Record> read_corpus_file(const std::string& path);

/// Maps the HC3 layout (`question`, `human_answers`, `chatgpt_answers`, optional
/// `id` and `source`) onto Record.
std::vector<Record> parse_hc3(std::istream& in, Language language,
                              std::string_view default_source_tag);

void write_corpus(std::ostream& out, const std::vector<Record>& records);
void write_corpus_file(const std::string& path, const std::vector<Record>& records);

/// Balanced test carve-out followed by a seeded train/valid split of the rest.
/// valid receives ceil(valid_fraction * remaining) records.
Split build_split(const std::vector<Record>& records, std::size_t test_pairs,
                  double valid_fraction, std::uint64_t seed);

/// Separator between question and answer in qa units.
inline constexpr std::string_view kQaSeparator = "\n\n";

UnitBatch build_units(const std::vector<Record>& records, UnitKind kind);

/// Rule-based sentence segmentation for French and English prose.
std::vector<std::string> split_sentences(std::string_view text);

/// Abbreviations that never end a sentence.
const std::vector<std::string>& sentence_abbreviations();

std::vector<ExampleUnit> parse_units(std::istream& in);
std::vector<ExampleUnit> read_units_file(const std::string& path);
void write_units(std::ostream& out, const std::vector<ExampleUnit>& units);
void write_units_file(const std::string& path, const std::vector<ExampleUnit>& units);

/// Records grouped by source_tag, tags in first-seen order.
std::vector<std::pair<std::string, std::vector<Record>>> group_by_source(
    const std::vector<Record>& records);

/// Named evaluation sets. Report rows are only emitted for registered tags.
class TestSetRegistry {
 public:
  /// Registry pre-populated with the in-domain test set and the out-of-domain
  /// collections: ftb, faq-rand, faq-gouv, adversarial, chatgpt-native, bing.
  static TestSetRegistry with_defaults();

  void add(std::string tag, std::string display_name);
  bool contains(std::string_view tag) const;
  /// Throws Error for an unregistered tag.
  const std::string& display_name(std::string_view tag) const;
  const std::vector<std::string>& tags() const { return order_; }

 private:
  std::map<std::string, std::string, std::less<>> names_;
  std::vector<std::string> order_;
};

}  // namespace corpus
}  // namespace mgtd
