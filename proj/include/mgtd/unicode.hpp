#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers. Text is stored as UTF-8 std::string everywhere; character-level
// operations work on code points (std::u32string). Invalid UTF-8 decodes to U+FFFD.

namespace mgtd::unicode {

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

/// Canonical composition (NFC).
std::string nfc(std::string_view utf8);
/// Full Unicode lowercase mapping, root locale.
std::string lower(std::string_view utf8);

bool is_space(char32_t cp);
bool is_upper(char32_t cp);
bool is_alpha(char32_t cp);
bool is_digit(char32_t cp);
bool is_alnum(char32_t cp);

std::size_t length(std::string_view utf8);

/// Whitespace-delimited tokens (Unicode White_Space).
std::vector<std::string> split_whitespace(std::string_view utf8);

/// Runs of whitespace become one ASCII space; leading and trailing whitespace dropped.
std::string collapse_whitespace(std::string_view utf8);

std::string trim(std::string_view utf8);

}  // namespace mgtd::unicode
