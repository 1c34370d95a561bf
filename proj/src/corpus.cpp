#include "mgtd/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Label l) { return l == Label::Machine ? "machine" : "human"; }

std::string_view to_string(UnitKind k) {
  switch (k) {
    case UnitKind::Qa: return "qa";
    case UnitKind::Full: return "full";
    case UnitKind::Sentence: return "sentence";
  }
  return "full";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Raw: return "raw";
    case Variant::Misspelled: return "misspelled";
    case Variant::Homoglyph: return "homoglyph";
  }
  return "raw";
}

std::string_view to_string(Language l) { return l == Language::En ? "en" : "fr"; }

Label parse_label(std::string_view s) {
  if (s == "human") return Label::Human;
  if (s == "machine") return Label::Machine;
  throw FormatError("unknown label '" + std::string(s) + "'");
}

UnitKind parse_unit_kind(std::string_view s) {
  if (s == "qa") return UnitKind::Qa;
  if (s == "full") return UnitKind::Full;
  if (s == "sentence") return UnitKind::Sentence;
  throw FormatError("unknown unit kind '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  if (s == "raw") return Variant::Raw;
  if (s == "misspelled") return Variant::Misspelled;
  if (s == "homoglyph") return Variant::Homoglyph;
  throw FormatError("unknown variant '" + std::string(s) + "'");
}

Language parse_language(std::string_view s) {
  if (s == "fr") return Language::Fr;
  if (s == "en") return Language::En;
  throw FormatError("unknown language '" + std::string(s) + "'");
}

namespace corpus {
namespace {

std::string text_field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw FormatError(std::string("field '") + key + "' must be a string", line);
  return unicode::nfc(it->get<std::string>());
}

std::vector<std::string> answers_field(const json& obj, const char* key, std::size_t line) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw FormatError(std::string("field '") + key + "' must be an array", line);
  for (const auto& a : *it) {
    if (!a.is_string()) throw FormatError(std::string("field '") + key + "' must hold strings", line);
    out.push_back(unicode::nfc(a.get<std::string>()));
  }
  return out;
}

std::string id_field(const json& obj, std::size_t line) {
  auto it = obj.find("id");
  if (it == obj.end() || it->is_null()) return "line-" + std::to_string(line);
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw FormatError("field 'id' must be a string or integer", line);
}

template <typename RecordFromJson>
std::vector<Record> parse_lines(std::istream& in, RecordFromJson&& make) {
  std::vector<Record> records;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("malformed record: ") + e.what(), lineno);
    }
    if (!obj.is_object()) throw FormatError("record must be an object", lineno);
    Record r = make(obj, lineno);
    if (r.human_answers.empty() && r.machine_answers.empty())
      throw FormatError("record '" + r.id + "' has no answers", lineno);
    if (!seen.insert(r.id).second) throw FormatError("duplicate id '" + r.id + "'", lineno);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

std::vector<Record> parse_corpus(std::istream& in) {
  return parse_lines(in, [](const json& obj, std::size_t line) {
    Record r;
    r.id = id_field(obj, line);
    r.question = text_field(obj, "question", line);
    r.human_answers = answers_field(obj, "human_answers", line);
    r.machine_answers = answers_field(obj, "machine_answers", line);
    if (auto it = obj.find("language"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw FormatError("field 'language' must be a string", line);
      try {
        r.language = parse_language(it->get<std::string>());
      } catch (const FormatError& e) {
        throw FormatError(e.what(), line);
      }
    }
    if (auto it = obj.find("source_tag"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw FormatError("field 'source_tag' must be a string", line);
      r.source_tag = it->get<std::string>();
    }
    if (auto it = obj.find("translation_quality"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer()) throw FormatError("translation_quality must be an integer", line);
      int q = it->get<int>();
      if (q < 1 || q > 5) throw FormatError("translation_quality must be in [1,5]", line);
      r.translation_quality = q;
    }
    return r;
  });
}

std::vector<Record> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path);
  try {
    return parse_corpus(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<Record> parse_hc3(std::istream& in, Language language,
                              std::string_view default_source_tag) {
  return parse_lines(in, [&](const json& obj, std::size_t line) {
    Record r;
    r.id = id_field(obj, line);
    r.question = text_field(obj, "question", line);
    r.human_answers = answers_field(obj, "human_answers", line);
    r.machine_answers = answers_field(obj, "chatgpt_answers", line);
    r.language = language;
    std::string source = text_field(obj, "source", line);
    r.source_tag = source.empty() ? std::string(default_source_tag) : source;
    return r;
  });
}

void write_corpus(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["question"] = r.question;
    j["human_answers"] = r.human_answers;
    j["machine_answers"] = r.machine_answers;
    j["language"] = to_string(r.language);
    j["source_tag"] = r.source_tag;
    if (r.translation_quality) j["translation_quality"] = *r.translation_quality;
    out << j.dump() << '\n';
  }
}

void write_corpus_file(const std::string& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_corpus(out, records);
}

// ---------------------------------------------------------------------------
// Splitting

namespace {

constexpr std::uint64_t kSaltTestOrder = 0x7e57;
constexpr std::uint64_t kSaltRemainder = 0x5e11;

long long net_answers(const Record& r) {
  return static_cast<long long>(r.human_answers.size()) -
         static_cast<long long>(r.machine_answers.size());
}

// Greedy pick minimizing the running human-minus-machine imbalance, then
// improving swaps with the unselected pool until the imbalance is within 1.
std::vector<std::size_t> select_balanced(const std::vector<Record>& records,
                                         const std::vector<std::size_t>& order, std::size_t count) {
  std::vector<char> used(records.size(), 0);
  std::vector<std::size_t> picked;
  picked.reserve(count);
  long long diff = 0;
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t best = records.size();
    long long best_abs = 0;
    for (std::size_t idx : order) {
      if (used[idx]) continue;
      long long a = std::llabs(diff + net_answers(records[idx]));
      if (best == records.size() || a < best_abs) {
        best = idx;
        best_abs = a;
        if (a == 0) break;
      }
    }
    used[best] = 1;
    picked.push_back(best);
    diff += net_answers(records[best]);
  }

  bool improved = true;
  while (std::llabs(diff) > 1 && improved) {
    improved = false;
    for (std::size_t& s : picked) {
      for (std::size_t u : order) {
        if (used[u]) continue;
        long long next = diff - net_answers(records[s]) + net_answers(records[u]);
        if (std::llabs(next) < std::llabs(diff)) {
          used[s] = 0;
          used[u] = 1;
          s = u;
          diff = next;
          improved = true;
          break;
        }
      }
      if (improved) break;
    }
  }
  if (std::llabs(diff) > 1)
    throw Error("cannot balance test set: human/machine answer imbalance " + std::to_string(diff));
  return picked;
}

}  // namespace

Split build_split(const std::vector<Record>& records, std::size_t test_pairs, double valid_fraction,
                  std::uint64_t seed) {
  if (test_pairs > records.size())
    throw Error("test_pairs (" + std::to_string(test_pairs) + ") exceeds corpus size (" +
                std::to_string(records.size()) + ")");
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
    throw Error("valid_fraction must lie strictly between 0 and 1");

  if (test_pairs > 0) {
    std::size_t human = 0;
    std::size_t machine = 0;
    for (const auto& r : records) {
      human += r.human_answers.size();
      machine += r.machine_answers.size();
    }
    if (human == 0) throw Error("cannot balance test set: class Human is absent");
    if (machine == 0) throw Error("cannot balance test set: class Machine is absent");
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 test_rng(stream_seed(seed, 0, kSaltTestOrder));
  shuffle(std::span<std::size_t>(order), test_rng);

  Split split;
  std::vector<char> in_test(records.size(), 0);
  if (test_pairs > 0) {
    for (std::size_t idx : select_balanced(records, order, test_pairs)) {
      in_test[idx] = 1;
      split.test.push_back(records[idx]);
    }
  }

  std::vector<std::size_t> rest;
  rest.reserve(records.size() - test_pairs);
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!in_test[i]) rest.push_back(i);
  SplitMix64 rest_rng(stream_seed(seed, 0, kSaltRemainder));
  shuffle(std::span<std::size_t>(rest), rest_rng);

  // The epsilon absorbs representation error such as 0.2 * 290 = 58.000000000000007.
  auto n_valid = static_cast<std::size_t>(
      std::ceil(valid_fraction * static_cast<double>(rest.size()) - 1e-9));
  for (std::size_t k = 0; k < rest.size(); ++k)
    (k < n_valid ? split.valid : split.train).push_back(records[rest[k]]);
  return split;
}

// ---------------------------------------------------------------------------
// Units

UnitBatch build_units(const std::vector<Record>& records, UnitKind kind) {
  UnitBatch batch;
  for (const auto& r : records) {
    const std::string question = unicode::trim(r.question);
    auto emit = [&](const std::vector<std::string>& answers, Label label) {
      for (const auto& raw : answers) {
        std::string answer = unicode::trim(raw);
        if (answer.empty()) {
          ++batch.skipped_empty;
          continue;
        }
        switch (kind) {
          case UnitKind::Qa: {
            std::string text = question.empty() ? answer
                                                : question + std::string(kQaSeparator) + answer;
            batch.units.push_back({std::move(text), label, kind, r.id, Variant::Raw});
            break;
          }
          case UnitKind::Full:
            batch.units.push_back({std::move(answer), label, kind, r.id, Variant::Raw});
            break;
          case UnitKind::Sentence:
            for (auto& s : split_sentences(answer))
              batch.units.push_back({std::move(s), label, kind, r.id, Variant::Raw});
            break;
        }
      }
    };
    emit(r.human_answers, Label::Human);
    emit(r.machine_answers, Label::Machine);
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Sentence segmentation

namespace {

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U'…'; }

bool is_closing(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'»' || c == U')' || c == U']' || c == U'”' ||
         c == U'’';
}

std::u32string trimmed(std::u32string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && unicode::is_space(s[b])) ++b;
  while (e > b && unicode::is_space(s[e - 1])) --e;
  return std::u32string(s.substr(b, e - b));
}

const std::vector<std::u32string>& abbreviations32() {
  static const std::vector<std::u32string> abbrevs = [] {
    std::vector<std::u32string> out;
    for (const auto& a : sentence_abbreviations()) out.push_back(unicode::decode(a));
    return out;
  }();
  return abbrevs;
}

// True when the mark ending at `end` (exclusive) belongs to a listed abbreviation,
// either as its final dot or as an internal one ("p." in "p. ex.").
bool guarded(std::u32string_view text, std::size_t end) {
  for (const auto& abbr : abbreviations32()) {
    for (std::size_t p = 1; p <= abbr.size(); ++p) {
      if (!is_terminal(abbr[p - 1]) || p > end) continue;
      std::size_t start = end - p;
      if (start + abbr.size() > text.size()) continue;
      if (text.compare(start, abbr.size(), abbr) != 0) continue;
      if (start > 0 && unicode::is_alnum(text[start - 1])) continue;
      return true;
    }
  }
  return false;
}

}  // namespace

const std::vector<std::string>& sentence_abbreviations() {
  static const std::vector<std::string> list{"M.", "MM.", "Mme.", "Mlle.", "Dr.", "etc.", "p. ex.",
                                             "cf."};
  return list;
}

std::vector<std::string> split_sentences(std::string_view text) {
  const std::u32string cps = unicode::decode(text);
  const std::size_t n = cps.size();
  std::vector<std::string> out;
  auto flush = [&](std::size_t b, std::size_t e) {
    std::u32string seg = trimmed(std::u32string_view(cps).substr(b, e - b));
    if (!seg.empty()) out.push_back(unicode::encode(seg));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminal(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && (is_terminal(cps[j]) || is_closing(cps[j]))) ++j;
    // French spacing: "stop. »"
    std::size_t p = j;
    while (p < n && unicode::is_space(cps[p])) ++p;
    if (p > j && p < n && cps[p] == U'»') j = p + 1;
    std::size_t k = j;
    while (k < n && unicode::is_space(cps[k])) ++k;
    bool boundary = k > j && k < n && (unicode::is_upper(cps[k]) || unicode::is_digit(cps[k])) &&
                    !guarded(cps, i + 1);
    if (boundary) {
      flush(start, j);
      start = k;
      i = k;
    } else {
      i = j;
    }
  }
  flush(start, n);
  return out;
}

// ---------------------------------------------------------------------------
// Unit files

std::vector<ExampleUnit> parse_units(std::istream& in) {
  std::vector<ExampleUnit> units;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      json obj = json::parse(line);
      ExampleUnit u;
      u.text = obj.at("text").get<std::string>();
      u.label = parse_label(obj.at("label").get<std::string>());
      u.unit_kind = parse_unit_kind(obj.value("unit_kind", std::string("full")));
      u.record_id = obj.value("record_id", std::string());
      u.variant = parse_variant(obj.value("variant", std::string("raw")));
      if (unicode::trim(u.text).empty()) throw FormatError("unit text is empty");
      units.push_back(std::move(u));
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed unit: ") + e.what(), lineno);
    } catch (const FormatError& e) {
      if (e.line() != 0) throw;
      throw FormatError(e.what(), lineno);
    }
  }
  return units;
}

std::vector<ExampleUnit> read_units_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open units file " + path);
  try {
    return parse_units(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_units(std::ostream& out, const std::vector<ExampleUnit>& units) {
  for (const auto& u : units) {
    ordered_json j;
    j["text"] = u.text;
    j["label"] = to_string(u.label);
    j["unit_kind"] = to_string(u.unit_kind);
    j["record_id"] = u.record_id;
    j["variant"] = to_string(u.variant);
    out << j.dump() << '\n';
  }
}

void write_units_file(const std::string& path, const std::vector<ExampleUnit>& units) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_units(out, units);
}

std::vector<std::pair<std::string, std::vector<Record>>> group_by_source(
    const std::vector<Record>& records) {
  std::vector<std::pair<std::string, std::vector<Record>>> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == r.source_tag; });
    if (it == groups.end()) {
      groups.emplace_back(r.source_tag, std::vector<Record>{});
      it = std::prev(groups.end());
    }
    it->second.push_back(r);
  }
  return groups;
}

// ---------------------------------------------------------------------------

TestSetRegistry TestSetRegistry::with_defaults() {
  TestSetRegistry reg;
  reg.add("test", "In-domain");
  reg.add("ftb", "FTB");
  reg.add("faq-rand", "FAQ-Rand");
  reg.add("faq-gouv", "FAQ-Gouv");
  reg.add("adversarial", "Adversarial");
  reg.add("chatgpt-native", "Native");
  reg.add("bing", "BingGPT");
  return reg;
}

void TestSetRegistry::add(std::string tag, std::string display_name) {
  if (names_.count(tag)) return;
  order_.push_back(tag);
  names_.emplace(std::move(tag), std::move(display_name));
}

bool TestSetRegistry::contains(std::string_view tag) const { return names_.find(tag) != names_.end(); }

const std::string& TestSetRegistry::display_name(std::string_view tag) const {
  auto it = names_.find(tag);
  if (it == names_.end()) throw Error("unknown test set tag '" + std::string(tag) + "'");
  return it->second;
}

}  // namespace corpus
}  // namespace mgtd
