#include "mgtd/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mgtd/data.hpp"
#include "mgtd/error.hpp"
#include "mgtd/rng.hpp"
#include "mgtd/unicode.hpp"

namespace mgtd {

std::string_view to_string(AttackKind k) {
  return k == AttackKind::Misspelling ? "misspelling" : "homoglyph";
}

AttackKind parse_attack_kind(std::string_view s) {
  if (s == "misspelling") return AttackKind::Misspelling;
  if (s == "homoglyph") return AttackKind::Homoglyph;
  throw Error("unknown attack kind '" + std::string(s) + "'");
}

Variant variant_of(AttackKind k) {
  return k == AttackKind::Misspelling ? Variant::Misspelled : Variant::Homoglyph;
}

KeyboardLayout parse_keyboard_layout(std::string_view s) {
  if (s == "azerty") return KeyboardLayout::Azerty;
  if (s == "qwerty") return KeyboardLayout::Qwerty;
  throw Error("unknown keyboard layout '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Confusables

ConfusableTable::ConfusableTable(std::map<char32_t, std::vector<char32_t>> entries)
    : forward_(std::move(entries)) {
  for (const auto& [src, reps] : forward_) {
    if (reps.empty()) throw Error("confusable source without replacements");
    for (char32_t r : reps) {
      if (r == src) throw Error("confusable maps a character to itself");
      if (unicode::is_space(r)) throw Error("confusable replacement is whitespace");
      if (forward_.count(r)) throw Error("confusable replacement is itself a source");
      auto [it, inserted] = backward_.emplace(r, src);
      if (!inserted && it->second != src)
        throw Error("confusable replacement claimed by two sources");
    }
  }
}

ConfusableTable ConfusableTable::parse(std::istream& in) {
  std::map<char32_t, std::vector<char32_t>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("expected source<TAB>replacements", lineno);
    std::u32string src = unicode::decode(line.substr(0, tab));
    if (src.size() != 1) throw FormatError("source must be a single character", lineno);
    auto& reps = entries[src[0]];
    std::stringstream rest(line.substr(tab + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      std::u32string rep = unicode::decode(item);
      if (rep.size() != 1) throw FormatError("replacement must be a single character", lineno);
      reps.push_back(rep[0]);
    }
    if (reps.empty()) throw FormatError("no replacements listed", lineno);
  }
  try {
    return ConfusableTable(std::move(entries));
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
}

ConfusableTable ConfusableTable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

const ConfusableTable& ConfusableTable::builtin() {
  static const ConfusableTable table = parse(builtin_data("confusables.tsv"));
  return table;
}

const std::vector<char32_t>& ConfusableTable::replacements(char32_t c) const {
  static const std::vector<char32_t> kNone;
  auto it = forward_.find(c);
  return it == forward_.end() ? kNone : it->second;
}

char32_t ConfusableTable::canonical(char32_t c) const {
  auto it = backward_.find(c);
  return it == backward_.end() ? c : it->second;
}

// ---------------------------------------------------------------------------
// Keyboards

namespace {

using NeighborTable = std::array<std::vector<char32_t>, 26>;

// Rows are staggered: second row shifted a quarter key right, third row three quarters.
NeighborTable build_neighbors(const std::array<std::string_view, 3>& rows) {
  constexpr std::array<double, 3> kOffset{0.0, 0.25, 0.75};
  NeighborTable table;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < rows[r].size(); ++i) {
      double x = kOffset[r] + static_cast<double>(i);
      auto& out = table[static_cast<std::size_t>(rows[r][i] - 'a')];
      for (std::size_t r2 = 0; r2 < rows.size(); ++r2) {
        if (r2 + 1 < r || r2 > r + 1) continue;
        for (std::size_t j = 0; j < rows[r2].size(); ++j) {
          if (r2 == r && j == i) continue;
          double dx = std::abs(kOffset[r2] + static_cast<double>(j) - x);
          if ((r2 == r && dx <= 1.0) || (r2 != r && dx < 1.0))
            out.push_back(static_cast<char32_t>(rows[r2][j]));
        }
      }
    }
  }
  return table;
}

const NeighborTable& neighbor_table(KeyboardLayout layout) {
  static const NeighborTable azerty = build_neighbors({"azertyuiop", "qsdfghjklm", "wxcvbn"});
  static const NeighborTable qwerty = build_neighbors({"qwertyuiop", "asdfghjkl", "zxcvbnm"});
  return layout == KeyboardLayout::Azerty ? azerty : qwerty;
}

char32_t ascii_lower(char32_t c) { return (c >= U'A' && c <= U'Z') ? c + 32 : c; }
char32_t ascii_upper(char32_t c) { return (c >= U'a' && c <= U'z') ? c - 32 : c; }

void check_spec(const PerturbationSpec& spec, AttackKind expected) {
  if (spec.kind != expected)
    throw Error("perturbation spec kind is " + std::string(to_string(spec.kind)) + ", expected " +
                std::string(to_string(expected)));
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) throw Error("perturbation rate must lie in [0,1]");
}

}  // namespace

const std::vector<char32_t>& keyboard_neighbors(char32_t lower_letter, KeyboardLayout layout) {
  static const std::vector<char32_t> kNone;
  if (lower_letter < U'a' || lower_letter > U'z') return kNone;
  return neighbor_table(layout)[lower_letter - U'a'];
}

namespace attacks {

std::string apply_homoglyph(std::string_view text, const PerturbationSpec& spec,
                            const ConfusableTable& table) {
  check_spec(spec, AttackKind::Homoglyph);
  if (spec.rate == 0.0) return std::string(text);
  std::u32string cps = unicode::decode(text);
  SplitMix64 rng(spec.seed);
  for (char32_t& c : cps) {
    const auto& reps = table.replacements(c);
    if (reps.empty()) continue;
    if (rng.uniform() < spec.rate) c = reps[rng.below(reps.size())];
  }
  return unicode::encode(cps);
}

namespace {

enum class Typo { Swap, Delete, Substitute, Insert };

void misspell_token(std::u32string& tok, SplitMix64& rng, KeyboardLayout layout) {
  const std::size_t len = tok.size();
  std::vector<std::size_t> keyed;  // interior positions with keyboard neighbours
  for (std::size_t p = 1; p + 1 < len; ++p)
    if (!keyboard_neighbors(ascii_lower(tok[p]), layout).empty()) keyed.push_back(p);

  std::vector<Typo> actions;
  if (len >= 4) actions.push_back(Typo::Swap);
  actions.push_back(Typo::Delete);
  if (!keyed.empty()) {
    actions.push_back(Typo::Substitute);
    actions.push_back(Typo::Insert);
  }

  auto neighbor_of = [&](char32_t c) {
    const auto& nbs = keyboard_neighbors(ascii_lower(c), layout);
    char32_t n = nbs[rng.below(nbs.size())];
    return (c >= U'A' && c <= U'Z') ? ascii_upper(n) : n;
  };

  switch (actions[rng.below(actions.size())]) {
    case Typo::Swap: {
      std::size_t p = 1 + rng.below(len - 3);
      std::swap(tok[p], tok[p + 1]);
      break;
    }
    case Typo::Delete:
      tok.erase(1 + rng.below(len - 2), 1);
      break;
    case Typo::Substitute: {
      std::size_t p = keyed[rng.below(keyed.size())];
      tok[p] = neighbor_of(tok[p]);
      break;
    }
    case Typo::Insert: {
      std::size_t p = keyed[rng.below(keyed.size())];
      tok.insert(tok.begin() + static_cast<std::ptrdiff_t>(p + 1), neighbor_of(tok[p]));
      break;
    }
  }
}

}  // namespace

std::string apply_misspelling(std::string_view text, const PerturbationSpec& spec,
                              KeyboardLayout layout) {
  check_spec(spec, AttackKind::Misspelling);
  if (spec.rate == 0.0) return std::string(text);
  const std::u32string cps = unicode::decode(text);
  SplitMix64 rng(spec.seed);
  std::u32string out;
  out.reserve(cps.size() + cps.size() / 8);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_space(cps[i])) {
      out.push_back(cps[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && !unicode::is_space(cps[j])) ++j;
    std::u32string tok = cps.substr(i, j - i);
    if (tok.size() >= 3 && rng.uniform() < spec.rate) misspell_token(tok, rng, layout);
    out += tok;
    i = j;
  }
  return unicode::encode(out);
}

std::string apply(std::string_view text, const PerturbationSpec& spec, const ConfusableTable& table,
                  KeyboardLayout layout) {
  return spec.kind == AttackKind::Homoglyph ? apply_homoglyph(text, spec, table)
                                            : apply_misspelling(text, spec, layout);
}

std::vector<ExampleUnit> perturb_testset(const std::vector<ExampleUnit>& units, AttackKind kind,
                                         double rate, std::uint64_t seed,
                                         const ConfusableTable& table, KeyboardLayout layout) {
  std::vector<ExampleUnit> out;
  out.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    ExampleUnit u = units[i];
    u.text = apply(u.text, {kind, rate, stream_seed(seed, i)}, table, layout);
    u.variant = variant_of(kind);
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<ExampleUnit> build_training_mix(const std::vector<ExampleUnit>& units,
                                            std::uint64_t seed, double rate,
                                            const ConfusableTable& table, KeyboardLayout layout) {
  constexpr std::uint64_t kSaltOrder = 0x3d1;
  constexpr std::uint64_t kSaltMisspell = 0x3d2;
  constexpr std::uint64_t kSaltHomoglyph = 0x3d3;

  for (std::size_t i = 0; i < units.size(); ++i)
    if (units[i].variant != Variant::Raw)
      throw Error("training mix input unit " + std::to_string(i) + " is not raw");

  const std::size_t n = units.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(stream_seed(seed, 0, kSaltOrder));
  shuffle(std::span<std::size_t>(order), rng);

  const std::size_t n_misspelled = n / 2;
  std::vector<std::size_t> misspelled(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_misspelled));
  std::vector<std::size_t> homoglyphed(order.begin() + static_cast<std::ptrdiff_t>(n_misspelled), order.end());
  std::sort(misspelled.begin(), misspelled.end());
  std::sort(homoglyphed.begin(), homoglyphed.end());

  std::vector<ExampleUnit> out(units);
  out.reserve(2 * n);
  for (std::size_t i : misspelled) {
    ExampleUnit u = units[i];
    u.text = apply_misspelling(u.text, {AttackKind::Misspelling, rate, stream_seed(seed, i, kSaltMisspell)},
                               layout);
    u.variant = Variant::Misspelled;
    out.push_back(std::move(u));
  }
  for (std::size_t i : homoglyphed) {
    ExampleUnit u = units[i];
    u.text = apply_homoglyph(u.text, {AttackKind::Homoglyph, rate, stream_seed(seed, i, kSaltHomoglyph)},
                             table);
    u.variant = Variant::Homoglyph;
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace attacks
}  // namespace mgtd
