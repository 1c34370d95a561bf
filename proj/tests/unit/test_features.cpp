#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mgtd/attacks.hpp"
#include "mgtd/error.hpp"
#include "mgtd/features.hpp"
#include "mgtd/unicode.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace mgtd;

namespace {

FeatureConfig bigrams_only() {
  FeatureConfig c;
  c.char_ngrams = {2, 2};
  c.word_ngrams = {0, 0};
  c.use_stylometric = false;
  c.hash_dimension = 1u << 12;
  return c;
}

// Independent FNV-1a over the char n-gram key layout.
std::uint32_t char_bucket(const std::u32string& gram, std::uint32_t dim) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto step = [&](unsigned char b) { h = (h ^ b) * 0x100000001B3ULL; };
  step('c');
  step(0x1F);
  for (unsigned char b : unicode::encode(gram)) step(b);
  return static_cast<std::uint32_t>(h % dim);
}

std::map<std::uint32_t, double> oracle_vector(const std::string& text, const FeatureConfig& c) {
  std::map<std::uint32_t, double> out;
  for (const auto& [g, n] : oracle::char_ngrams(unicode::decode(text), c.char_ngrams.min, c.char_ngrams.max))
    out[char_bucket(g, c.hash_dimension)] += n;
  return out;
}

std::map<std::uint32_t, double> as_map(const FeatureVector& v) {
  std::map<std::uint32_t, double> out;
  for (const auto& [i, w] : v.entries) out[i] = w;
  return out;
}

double cue(const std::string& text, Cue c) { return static_cast<double>(features::stylometric_cues(text).count(c)); }

}  // namespace

TEST_CASE("extract: \"aa\" has one bigram") {
  const auto v = features::extract("aa", bigrams_only());
  REQUIRE(v.entries.size() == 1);
  CHECK(v.entries[0].second == 1.0);
}

TEST_CASE("extract: empty text throws") { CHECK_THROWS_AS(features::extract("", FeatureConfig{}), Error); }

TEST_CASE("extract: abcd vs abce against a non-hashed counter") {
  const auto c = bigrams_only();
  const auto a = features::extract("abcd", c), b = features::extract("abce", c);
  CHECK(as_map(a) == oracle_vector("abcd", c));
  CHECK(as_map(b) == oracle_vector("abce", c));
  const auto ab = char_bucket(U"ab", c.hash_dimension), bc = char_bucket(U"bc", c.hash_dimension);
  CHECK(as_map(a).count(ab));
  CHECK(as_map(b).count(ab));
  CHECK(as_map(a).count(bc));
  CHECK(as_map(b).count(bc));
  std::set<std::uint32_t> sa, sb, diff;
  for (const auto& [i, w] : a.entries) sa.insert(i);
  for (const auto& [i, w] : b.entries) sb.insert(i);
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(diff, diff.end()));
  CHECK(diff.size() == 2);  // "cd" on one side, "ce" on the other
}

TEST_CASE("extract: char n-grams match the oracle on real text") {
  FeatureConfig c = bigrams_only();
  c.char_ngrams = {2, 4};
  c.lowercase = false;
  mgtd::SplitMix64 rng(5);
  for (int i = 0; i < 30; ++i) {
    const std::string text = synthetic::machine_text(rng, i);
    CHECK(as_map(features::extract(text, c)) == oracle_vector(text, c));
  }
}

TEST_CASE("extract: deterministic, sorted, indices in range") {
  const FeatureConfig c;
  const features::Featurizer f(c);
  mgtd::SplitMix64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const std::string text = synthetic::human_text(rng, i);
    const auto a = f.extract(text), b = f.extract(text);
    CHECK(a.entries == b.entries);
    CHECK(a.dimension == c.hash_dimension + kCueCount);
    for (std::size_t k = 0; k < a.entries.size(); ++k) {
      CHECK(a.entries[k].first < a.dimension);
      if (k) CHECK(a.entries[k - 1].first < a.entries[k].first);
    }
    const auto n = a.normalized();
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("extract: stylometric slots hold log1p of rates") {
  const FeatureConfig c;
  const std::string text = "Cela pourrait entraîner une baisse.";
  const auto v = features::extract(text, c);
  const auto cues = features::stylometric_cues(text);
  const auto m = as_map(v);
  for (std::size_t k = 0; k < kCueCount; ++k) {
    const auto slot = c.hash_dimension + static_cast<std::uint32_t>(k);
    if (cues.rates[k] > 0) CHECK(m.at(slot) == doctest::Approx(std::log1p(cues.rates[k])));
    else CHECK_FALSE(m.count(slot));
  }
}

TEST_CASE("FeatureConfig validate and canonical form") {
  FeatureConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.canonical() == "char=2-4;word=1-2;dim=262144;stylo=1;fold=0;lower=1");
  CHECK(FeatureConfig::parse_canonical(c.canonical()) == c);
  c.hash_dimension = 1000;
  CHECK_THROWS_AS(c.validate(), Error);
  c.hash_dimension = 512;
  CHECK_THROWS_AS(c.validate(), Error);
  c = FeatureConfig{};
  c.char_ngrams = {3, 2};
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(FeatureConfig::parse_canonical("char=2-4;word=1-2"), FormatError);
  CHECK_THROWS_AS(FeatureConfig::parse_canonical("char=2-4;word=1-2;dim=1024;stylo=1;fold=0;lower=1;x=1"),
                  FormatError);
}

TEST_CASE("fingerprint depends on config and resources") {
  FeatureConfig c;
  const features::Featurizer a(c);
  c.fold_confusables = true;
  const features::Featurizer b(c);
  CHECK(a.fingerprint() != b.fingerprint());
  CHECK(a.fingerprint() == features::Featurizer(FeatureConfig{}).fingerprint());
  auto res = std::make_shared<Resources>(*Resources::builtin());
  res->digest = "different";
  CHECK(features::Featurizer(FeatureConfig{}, res).fingerprint() != a.fingerprint());
}

TEST_CASE("write_sparse") {
  FeatureVector v;
  v.entries = {{3, 1.0}, {17, 0.5}};
  std::ostringstream out;
  v.write_sparse(out);
  CHECK(out.str() == "3:1\n17:0.5\n");
}

TEST_CASE("stylometric cues: examples") {
  const auto p = features::stylometric_cues("Cela pourrait entraîner une baisse.");
  CHECK(p.rate(Cue::Conditional) > 0);
  CHECK(p.count(Cue::ImpersonalOpener) == 1);
  CHECK(cue("Il est important de consulter un médecin.", Cue::Hedging) == 1);
  const auto b = features::stylometric_cues("bonjour");
  for (double r : b.rates) CHECK(r == 0.0);
  CHECK(cue("Ils mangeraient. Vous finiriez. Nous partirions.", Cue::Conditional) == 3);
  CHECK(cue("1. premier\n2) second\n- tiret\nVoici la liste :\nrien", Cue::ListStructure) == 4);
  CHECK(cue("a  b,c « d", Cue::PunctuationIrregularity) == 3);
  CHECK(cue("Je pense que oui. Perso, je crois pas.", Cue::PersonalMarker) == 3);
  CHECK(cue("personne", Cue::PersonalMarker) == 0);
  CHECK(cue("3,5 kilos", Cue::PunctuationIrregularity) == 0);
}

TEST_CASE("stylometric rates scale inversely with padding") {
  const std::string base = "Il est important de noter que cela pourrait changer.";
  const auto a = features::stylometric_cues(base);
  std::string padded = base;
  for (int i = 0; i < 20; ++i) padded += " mot";
  const auto b = features::stylometric_cues(padded);
  for (std::size_t k = 0; k < kCueCount; ++k) {
    CHECK(std::isfinite(a.rates[k]));
    CHECK(a.rates[k] >= 0);
    if (a.counts[k] == b.counts[k] && a.counts[k] > 0)
      CHECK(b.rates[k] == doctest::Approx(a.rates[k] * static_cast<double>(a.length) / static_cast<double>(b.length)));
  }
}

TEST_CASE("question_overlap") {
  CHECK(features::question_overlap("Pourquoi le ciel est bleu ?", "Pourquoi le ciel est bleu ?") == 1.0);
  CHECK(features::question_overlap("chat noir", "voiture rouge") == 0.0);
  CHECK(features::question_overlap("le de la", "chat") == 0.0);
  // pourquoi, signal, wifi, sembl, dégrad -> signal, wifi, dégrad shared
  const double o = features::question_overlap("pourquoi mon signal wifi semble se dégrader",
                                              "votre signal Wi-Fi se dégrade avec le temps");
  CHECK(o > 0.4);
  CHECK(o == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("fold_confusables") {
  CHECK(features::fold_confusables("bаnаnа") == "banana");
  mgtd::SplitMix64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const std::string x = synthetic::machine_text(rng, i);
    const std::string once = features::fold_confusables(x);
    CHECK(features::fold_confusables(once) == once);
    const std::string latin = "The quick brown fox jumps over the lazy dog " + std::to_string(i);
    for (double rate : {0.1, 0.5, 1.0})
      CHECK(features::fold_confusables(attacks::apply_homoglyph(latin, {AttackKind::Homoglyph, rate,
                                                                        static_cast<std::uint64_t>(i)})) == latin);
  }
}

TEST_CASE("folding makes vectors homoglyph invariant") {
  FeatureConfig c;
  c.fold_confusables = true;
  const features::Featurizer f(c);
  const std::string latin = "Il est important de consulter un medecin avant toute decision.";
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto attacked = attacks::apply_homoglyph(latin, {AttackKind::Homoglyph, 0.5, seed});
    CHECK(f.extract(attacked).entries == f.extract(latin).entries);
  }
}

TEST_CASE("lexicon parsing") {
  const auto l = Lexicon::parse("# c\n  je pense \n\nperso\n");
  CHECK(l.phrases() == std::vector<std::string>{"je pense", "perso"});
  CHECK(l.contains("perso"));
  CHECK_FALSE(l.contains("# c"));
}
