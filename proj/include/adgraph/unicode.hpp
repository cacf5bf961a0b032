#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace adgraph::text {

/// Decodes UTF-8; malformed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view utf8);
std::string encode_utf8(std::u32string_view text);
std::size_t codepoint_count(std::string_view utf8);

/// True for codepoints in the shipped emoji range table.
bool is_emoji(char32_t cp);
std::size_t emoji_count(std::u32string_view text);

/// Emoji presentation helpers (variation selectors, ZWJ, skin-tone
/// modifiers) that attach to a preceding emoji.
bool is_emoji_joiner(char32_t cp);

bool is_whitespace(char32_t cp);
bool is_control(char32_t cp);

/// NFC followed by default case folding, repeated to a fixpoint.
std::u32string nfc_casefold(std::u32string_view text);

inline char32_t ascii_lower(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
}
inline bool is_ascii_alpha(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}
inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
inline bool is_ascii_alnum(char32_t cp) { return is_ascii_alpha(cp) || is_ascii_digit(cp); }

}  // namespace adgraph::text
