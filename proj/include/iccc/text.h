// Unicode text helpers backed by ICU.

#ifndef ICCC_TEXT_H_
#define ICCC_TEXT_H_

#include <string>
#include <string_view>

namespace iccc::text {

// NFC, trim outer whitespace, collapse inner whitespace runs to one space.
// Case is preserved.
std::string normalize_caption(std::string_view raw);

// Full Unicode case folding; used for keying and comparisons only.
std::string case_fold(std::string_view s);

std::string to_lower(std::string_view s);

// Uppercases the first code point and leaves the rest untouched.
std::string capitalize_first(std::string_view s);

bool starts_with_upper(std::string_view s);

bool is_valid_utf8(std::string_view s);

}  // namespace iccc::text

#endif  // ICCC_TEXT_H_
