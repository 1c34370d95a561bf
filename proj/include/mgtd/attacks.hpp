#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mgtd/corpus.hpp"

namespace mgtd {

enum class AttackKind { Misspelling, Homoglyph };

std::string_view to_string(AttackKind k);
AttackKind parse_attack_kind(std::string_view s);
/// Variant flag carried by units perturbed with `k`.
Variant variant_of(AttackKind k);

struct PerturbationSpec {
  AttackKind kind = AttackKind::Homoglyph;
  double rate = 0.3;
  std::uint64_t seed = 0;
};

inline constexpr double kDefaultAttackRate = 0.3;

/// Latin characters and their visually confusable single-code-point lookalikes.
///
/// Invariants checked on construction: no character maps to itself, no
/// replacement is claimed by two sources, replacements are not whitespace.
class ConfusableTable {
 public:
  ConfusableTable() = default;
  explicit ConfusableTable(std::map<char32_t, std::vector<char32_t>> entries);

  /// `source<TAB>replacement[,replacement...]` lines; `#` starts a comment.
  static ConfusableTable parse(std::istream& in);
  static ConfusableTable parse(std::string_view text);
  /// The curated table compiled into the binary.
  static const ConfusableTable& builtin();

  /// Empty when `c` has no lookalikes.
  const std::vector<char32_t>& replacements(char32_t c) const;
  /// Canonical source for a replacement character, or `c` itself.
  char32_t canonical(char32_t c) const;

  std::size_t size() const { return forward_.size(); }
  const std::map<char32_t, std::vector<char32_t>>& entries() const { return forward_; }

 private:
  std::map<char32_t, std::vector<char32_t>> forward_;
  std::map<char32_t, char32_t> backward_;
};

enum class KeyboardLayout { Azerty, Qwerty };

KeyboardLayout parse_keyboard_layout(std::string_view s);

/// Physical neighbours of a lowercase letter on the layout; empty for other keys.
const std::vector<char32_t>& keyboard_neighbors(char32_t lower_letter, KeyboardLayout layout);

namespace attacks {

/// Each table character is replaced with probability `spec.rate` by a uniform
/// choice among its lookalikes. Character count is preserved.
std::string apply_homoglyph(std::string_view text, const PerturbationSpec& spec,
                            const ConfusableTable& table = ConfusableTable::builtin());

/// Each whitespace token of 3+ characters is perturbed with probability
/// `spec.rate` by one of: adjacent interior swap, interior deletion, interior
/// substitution by a keyboard neighbour, insertion of a neighbour after an
/// interior character. First and last characters and all whitespace are kept.
std::string apply_misspelling(std::string_view text, const PerturbationSpec& spec,
                              KeyboardLayout layout = KeyboardLayout::Azerty);

/// Dispatches on spec.kind.
std::string apply(std::string_view text, const PerturbationSpec& spec,
                  const ConfusableTable& table = ConfusableTable::builtin(),
                  KeyboardLayout layout = KeyboardLayout::Azerty);

/// Perturbs every unit; unit i draws from stream_seed(seed, i).
std::vector<ExampleUnit> perturb_testset(const std::vector<ExampleUnit>& units, AttackKind kind,
                                         double rate, std::uint64_t seed,
                                         const ConfusableTable& table = ConfusableTable::builtin(),
                                         KeyboardLayout layout = KeyboardLayout::Azerty);

/// All N raw units, then floor(N/2) of them misspelled and the other ceil(N/2)
/// homoglyphed, the halves chosen by a seeded shuffle. Output size is 2N.
std::vector<ExampleUnit> build_training_mix(const std::vector<ExampleUnit>& units,
                                            std::uint64_t seed,
                                            double rate = kDefaultAttackRate,
                                            const ConfusableTable& table = ConfusableTable::builtin(),
                                            KeyboardLayout layout = KeyboardLayout::Azerty);

}  // namespace attacks
}  // namespace mgtd
