// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace xling::unicode {

bool is_valid_utf8(std::string_view text);

// Number of Unicode scalar values. Input must be valid UTF-8.
std::size_t scalar_count(std::string_view text);

// Canonical composition (NFC). Invalid UTF-8 is returned unchanged.
std::string nfc(std::string_view text);

// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view text);

// Decodes the code point starting at byte offset `pos` and advances `pos`.
// Malformed sequences decode as U+FFFD and advance by one byte.
char32_t decode_next(std::string_view text, std::size_t& pos);

// Decodes the code point ending right before byte offset `end`.
char32_t decode_prev(std::string_view text, std::size_t end);

bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

// Letters from scripts without case (Han, Devanagari, ...).
bool is_caseless_letter(char32_t cp);

}  // namespace xling::unicode
