#include "mgtd/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mgtd/corpus.hpp"
#include "mgtd/data.hpp"
#include "mgtd/error.hpp"
#include "mgtd/hash.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

// ---------------------------------------------------------------------------
// Lexicons and resources

Lexicon Lexicon::parse(std::string_view text) {
  std::vector<std::string> phrases;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    std::string p = unicode::trim(line);
    if (!p.empty()) phrases.push_back(unicode::nfc(p));
  }
  return Lexicon(std::move(phrases));
}

bool Lexicon::contains(std::string_view phrase) const {
  return std::find(phrases_.begin(), phrases_.end(), phrase) != phrases_.end();
}

namespace {

constexpr std::array<std::string_view, 5> kDataFiles{
    "confusables.tsv", "hedging_fr.txt", "personal_fr.txt", "openers_fr.txt", "stopwords_fr.txt"};

std::shared_ptr<const Resources> make_resources(const std::array<std::string, 5>& texts) {
  auto res = std::make_shared<Resources>();
  res->confusables = ConfusableTable::parse(texts[0]);
  res->hedging = Lexicon::parse(texts[1]);
  res->personal = Lexicon::parse(texts[2]);
  res->openers = Lexicon::parse(texts[3]);
  res->stopwords = Lexicon::parse(texts[4]);
  Fnv1a64 h;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    h.update(kDataFiles[i]).byte(0);
    h.update(texts[i]).byte(0);
  }
  res->digest = hex64(h.value());
  return res;
}

}  // namespace

std::shared_ptr<const Resources> Resources::builtin() {
  static const std::shared_ptr<const Resources> res = [] {
    std::array<std::string, 5> texts;
    for (std::size_t i = 0; i < texts.size(); ++i) texts[i] = std::string(builtin_data(kDataFiles[i]));
    return make_resources(texts);
  }();
  return res;
}

std::shared_ptr<const Resources> Resources::from_directory(const std::string& dir) {
  std::array<std::string, 5> texts;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::filesystem::path p = std::filesystem::path(dir) / kDataFiles[i];
    if (std::filesystem::exists(p)) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      texts[i] = ss.str();
    } else {
      texts[i] = std::string(builtin_data(kDataFiles[i]));
    }
  }
  return make_resources(texts);
}

// ---------------------------------------------------------------------------
// Configuration

void FeatureConfig::validate() const {
  auto check_range = [](const NgramRange& r, const char* name) {
    if (r.min == 0 && r.max == 0) return;
    if (r.min < 1 || r.min > r.max)
      throw Error(std::string(name) + " n-gram range must satisfy 1 <= min <= max");
  };
  check_range(char_ngrams, "char");
  check_range(word_ngrams, "word");
  if (hash_dimension < (1u << 10) || (hash_dimension & (hash_dimension - 1)) != 0)
    throw Error("hash_dimension must be a power of two >= 1024");
}

std::string FeatureConfig::canonical() const {
  std::ostringstream s;
  s << "char=" << char_ngrams.min << '-' << char_ngrams.max << ";word=" << word_ngrams.min << '-'
    << word_ngrams.max << ";dim=" << hash_dimension << ";stylo=" << use_stylometric
    << ";fold=" << fold_confusables << ";lower=" << lowercase;
  return s.str();
}

FeatureConfig FeatureConfig::parse_canonical(std::string_view s) {
  FeatureConfig c;
  auto to_int = [&](std::string_view v) {
    long long x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc{} || p != v.data() + v.size())
      throw FormatError("bad feature config value '" + std::string(v) + "'");
    return x;
  };
  auto to_range = [&](std::string_view v) {
    auto dash = v.find('-');
    if (dash == std::string_view::npos) throw FormatError("bad n-gram range '" + std::string(v) + "'");
    return NgramRange{static_cast<int>(to_int(v.substr(0, dash))),
                      static_cast<int>(to_int(v.substr(dash + 1)))};
  };
  std::set<std::string> seen;
  while (!s.empty()) {
    auto semi = s.find(';');
    std::string_view item = s.substr(0, semi);
    s = semi == std::string_view::npos ? std::string_view{} : s.substr(semi + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw FormatError("bad feature config item '" + std::string(item) + "'");
    std::string key(item.substr(0, eq));
    std::string_view val = item.substr(eq + 1);
    seen.insert(key);
    if (key == "char") c.char_ngrams = to_range(val);
    else if (key == "word") c.word_ngrams = to_range(val);
    else if (key == "dim") c.hash_dimension = static_cast<std::uint32_t>(to_int(val));
    else if (key == "stylo") c.use_stylometric = to_int(val) != 0;
    else if (key == "fold") c.fold_confusables = to_int(val) != 0;
    else if (key == "lower") c.lowercase = to_int(val) != 0;
    else throw FormatError("unknown feature config key '" + key + "'");
  }
  if (seen.size() != 6) throw FormatError("incomplete feature config");
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Vectors

double FeatureVector::norm() const {
  double s = 0.0;
  for (const auto& [i, w] : entries) s += w * w;
  return std::sqrt(s);
}

FeatureVector FeatureVector::normalized() const {
  FeatureVector out = *this;
  const double n = norm();
  if (n > 0.0)
    for (auto& [i, w] : out.entries) w /= n;
  return out;
}

void FeatureVector::write_sparse(std::ostream& out) const {
  char buf[64];
  for (const auto& [i, w] : entries) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, w);
    out << i << ':' << std::string_view(buf, static_cast<std::size_t>(p - buf)) << '\n';
  }
}

std::string_view cue_name(Cue c) {
  switch (c) {
    case Cue::Conditional: return "conditional";
    case Cue::Hedging: return "hedging";
    case Cue::ImpersonalOpener: return "impersonal_opener";
    case Cue::ListStructure: return "list_structure";
    case Cue::PunctuationIrregularity: return "punctuation_irregularity";
    case Cue::PersonalMarker: return "personal_marker";
  }
  return "";
}

std::vector<std::pair<std::string, double>> CueProfile::named_rates() const {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t k = 0; k < kCueCount; ++k)
    out.emplace_back(std::string(cue_name(static_cast<Cue>(k))), rates[k]);
  return out;
}

namespace features {
namespace {

bool ends_with(std::u32string_view s, std::u32string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::u32string_view s, std::u32string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

std::u32string lowered32(std::string_view text) {
  std::u32string cps = unicode::decode(unicode::lower(text));
  for (char32_t& c : cps)
    if (c == U'’') c = U'\'';
  return cps;
}

// Non-overlapping occurrences of `phrase` in `text` that are not glued to a
// surrounding letter.
std::size_t count_phrase(std::u32string_view text, std::u32string_view phrase) {
  if (phrase.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = 0;
  const bool check_tail = unicode::is_alpha(phrase.back());
  while ((pos = text.find(phrase, pos)) != std::u32string_view::npos) {
    std::size_t end = pos + phrase.size();
    bool head_ok = pos == 0 || !unicode::is_alpha(text[pos - 1]);
    bool tail_ok = !check_tail || end == text.size() || !unicode::is_alpha(text[end]);
    if (head_ok && tail_ok) {
      ++count;
      pos = end;
    } else {
      ++pos;
    }
  }
  return count;
}

std::size_t count_lexicon(std::u32string_view lowered, const Lexicon& lex) {
  std::size_t n = 0;
  for (const auto& p : lex.phrases()) n += count_phrase(lowered, lowered32(p));
  return n;
}

std::size_t count_conditionals(std::u32string_view lowered) {
  static const std::array<std::u32string_view, 4> kSuffixes{U"raient", U"rait", U"riez", U"rions"};
  static const std::array<std::u32string_view, 5> kPouvoir{U"pourrais", U"pourrait", U"pourrions",
                                                           U"pourriez", U"pourraient"};
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < lowered.size()) {
    if (!unicode::is_alpha(lowered[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < lowered.size() && unicode::is_alpha(lowered[j])) ++j;
    std::u32string_view w = lowered.substr(i, j - i);
    bool hit = std::find(kPouvoir.begin(), kPouvoir.end(), w) != kPouvoir.end();
    for (auto suf : kSuffixes)
      if (!hit && w.size() > suf.size() + 1 && ends_with(w, suf)) hit = true;
    n += hit;
    i = j;
  }
  return n;
}

std::size_t count_openers(std::string_view text, const Lexicon& openers) {
  std::vector<std::u32string> ops;
  for (const auto& o : openers.phrases()) ops.push_back(unicode::decode(o));
  std::size_t n = 0;
  for (const auto& sentence : corpus::split_sentences(text)) {
    std::u32string s = unicode::decode(sentence);
    for (const auto& o : ops) {
      if (starts_with(s, o) && (s.size() == o.size() || !unicode::is_alpha(s[o.size()]))) {
        ++n;
        break;
      }
    }
  }
  return n;
}

std::size_t count_list_lines(std::u32string_view text) {
  std::size_t n = 0;
  std::size_t b = 0;
  while (b <= text.size()) {
    std::size_t e = text.find(U'\n', b);
    if (e == std::u32string_view::npos) e = text.size();
    std::u32string_view line = text.substr(b, e - b);
    std::size_t s = 0;
    std::size_t t = line.size();
    while (s < t && unicode::is_space(line[s])) ++s;
    while (t > s && unicode::is_space(line[t - 1])) --t;
    line = line.substr(s, t - s);
    if (!line.empty()) {
      std::size_t d = 0;
      while (d < line.size() && unicode::is_digit(line[d])) ++d;
      bool numbered = d > 0 && d < line.size() && (line[d] == U'.' || line[d] == U')');
      bool bulleted = line.size() > 1 && (line[0] == U'-' || line[0] == U'•' || line[0] == U'*') &&
                      unicode::is_space(line[1]);
      bool lead_in = line.back() == U':';
      n += numbered || bulleted || lead_in;
    }
    b = e + 1;
  }
  return n;
}

std::size_t count_punctuation_irregularities(std::u32string_view text) {
  std::size_t n = 0;
  std::size_t dq = 0, open_guil = 0, close_guil = 0, open_par = 0, close_par = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char32_t c = text[i];
    if (c == U' ' && i + 1 < text.size() && text[i + 1] == U' ' && (i == 0 || text[i - 1] != U' ')) ++n;
    if (c == U',' && i + 1 < text.size() && !unicode::is_space(text[i + 1]) &&
        !unicode::is_digit(text[i + 1]))
      ++n;
    dq += c == U'"';
    open_guil += c == U'«';
    close_guil += c == U'»';
    open_par += c == U'(';
    close_par += c == U')';
  }
  n += dq % 2;
  n += open_guil > close_guil ? open_guil - close_guil : close_guil - open_guil;
  n += open_par > close_par ? open_par - close_par : close_par - open_par;
  return n;
}

// Light French stemming: plural s/x, then -er/-ez or a final mute e.
std::string stem(std::u32string w) {
  if (w.size() > 3 && (w.back() == U's' || w.back() == U'x')) w.pop_back();
  if (w.size() > 4 && (ends_with(w, U"er") || ends_with(w, U"ez")))
    w.resize(w.size() - 2);
  else if (w.size() > 3 && w.back() == U'e')
    w.pop_back();
  return unicode::encode(w);
}

}  // namespace

CueProfile stylometric_cues(std::string_view text, const Resources& res) {
  CueProfile p;
  const std::u32string cps = unicode::decode(text);
  p.length = cps.size();
  if (cps.empty()) return p;
  const std::u32string lowered = lowered32(text);

  auto set = [&](Cue c, std::size_t v) { p.counts[static_cast<std::size_t>(c)] = v; };
  set(Cue::Conditional, count_conditionals(lowered));
  set(Cue::Hedging, count_lexicon(lowered, res.hedging));
  set(Cue::ImpersonalOpener, count_openers(text, res.openers));
  set(Cue::ListStructure, count_list_lines(cps));
  set(Cue::PunctuationIrregularity, count_punctuation_irregularities(cps));
  set(Cue::PersonalMarker, count_lexicon(lowered, res.personal));

  for (std::size_t k = 0; k < kCueCount; ++k)
    p.rates[k] = static_cast<double>(p.counts[k]) * 1000.0 / static_cast<double>(p.length);
  return p;
}

std::vector<std::string> content_tokens(std::string_view text, const Lexicon& stopwords) {
  const std::u32string cps = lowered32(text);
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto emit = [&](std::u32string w) {
    if (w.empty()) return;
    std::string utf8 = unicode::encode(w);
    if (stopwords.contains(utf8)) return;
    std::string s = stem(std::move(w));
    if (seen.insert(s).second) out.push_back(std::move(s));
  };

  std::u32string word;
  for (std::size_t i = 0; i <= cps.size(); ++i) {
    char32_t c = i < cps.size() ? cps[i] : U' ';
    if (unicode::is_alnum(c)) {
      word.push_back(c);
    } else if (c == U'-' && !word.empty() && i + 1 < cps.size() && unicode::is_alnum(cps[i + 1])) {
      // wi-fi -> wifi
    } else if (c == U'\'' && !word.empty()) {
      emit(std::move(word));  // elided article or pronoun: l'eau -> l, eau
      word.clear();
    } else {
      emit(std::move(word));
      word.clear();
    }
  }
  return out;
}

double question_overlap(std::string_view question, std::string_view answer, const Resources& res) {
  std::vector<std::string> q = content_tokens(question, res.stopwords);
  if (q.empty()) return 0.0;
  std::vector<std::string> a = content_tokens(answer, res.stopwords);
  std::set<std::string> answer_set(a.begin(), a.end());
  std::size_t shared = 0;
  for (const auto& t : q) shared += answer_set.count(t);
  return static_cast<double>(shared) / static_cast<double>(q.size());
}

std::string fold_confusables(std::string_view text, const ConfusableTable& table) {
  std::u32string cps = unicode::decode(text);
  bool changed = false;
  for (char32_t& c : cps) {
    char32_t canon = table.canonical(c);
    changed |= canon != c;
    c = canon;
  }
  return changed ? unicode::encode(cps) : std::string(text);
}

// ---------------------------------------------------------------------------
// Extraction

Featurizer::Featurizer(FeatureConfig config, std::shared_ptr<const Resources> resources)
    : config_(std::move(config)), resources_(std::move(resources)) {
  config_.validate();
  if (!resources_) throw Error("featurizer needs resources");
  fingerprint_ = hex64(Fnv1a64{}.update(config_.canonical()).byte('|').update(resources_->digest).value());
}

std::uint32_t Featurizer::dimension() const {
  return config_.hash_dimension + (config_.use_stylometric ? static_cast<std::uint32_t>(kCueCount) : 0u);
}

FeatureVector Featurizer::extract(std::string_view text) const {
  if (text.empty()) throw Error("cannot extract features from empty text");

  std::string base = config_.fold_confusables ? fold_confusables(text, resources_->confusables)
                                              : std::string(text);
  const std::string grams_text = config_.lowercase ? unicode::lower(base) : base;
  const std::uint32_t mask = config_.hash_dimension - 1;

  std::vector<std::uint32_t> hits;
  if (config_.char_ngrams.enabled()) {
    const std::u32string cps = unicode::decode(grams_text);
    std::string buf;
    for (int n = config_.char_ngrams.min; n <= config_.char_ngrams.max; ++n) {
      const auto len = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + len <= cps.size(); ++i) {
        buf.clear();
        for (std::size_t k = 0; k < len; ++k) unicode::append_utf8(buf, cps[i + k]);
        Fnv1a64 h;
        h.byte('c').byte(0x1F).update(buf);
        hits.push_back(static_cast<std::uint32_t>(h.value() & mask));
      }
    }
  }
  if (config_.word_ngrams.enabled()) {
    const auto toks = unicode::split_whitespace(grams_text);
    for (int n = config_.word_ngrams.min; n <= config_.word_ngrams.max; ++n) {
      const auto len = static_cast<std::size_t>(n);
      for (std::size_t i = 0; i + len <= toks.size(); ++i) {
        Fnv1a64 h;
        h.byte('w');
        for (std::size_t k = 0; k < len; ++k) h.byte(0x1F).update(toks[i + k]);
        hits.push_back(static_cast<std::uint32_t>(h.value() & mask));
      }
    }
  }
  std::sort(hits.begin(), hits.end());

  FeatureVector v;
  v.dimension = dimension();
  v.config_fingerprint = fingerprint_;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    v.entries.emplace_back(hits[i], static_cast<double>(j - i));
    i = j;
  }
  if (config_.use_stylometric) {
    const CueProfile cues = stylometric_cues(base, *resources_);
    for (std::size_t k = 0; k < kCueCount; ++k)
      if (cues.rates[k] > 0.0)
        v.entries.emplace_back(config_.hash_dimension + static_cast<std::uint32_t>(k),
                               std::log1p(cues.rates[k]));
  }
  return v;
}

FeatureVector extract(std::string_view text, const FeatureConfig& config) {
  return Featurizer(config).extract(text);
}

}  // namespace features
}  // namespace mgtd
