#pragma once

#include <string_view>

namespace mgtd {

/// Raw text of a data file compiled into the library (confusables.tsv,
/// hedging_fr.txt, personal_fr.txt, openers_fr.txt, stopwords_fr.txt).
/// Throws Error for an unknown name.
std::string_view builtin_data(std::string_view name);

}  // namespace mgtd
