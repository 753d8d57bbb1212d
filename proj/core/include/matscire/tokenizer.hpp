#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace matscire {

// Rule-based word tokenizer for scientific prose.
//
// Text is split on whitespace; each chunk then sheds leading opening brackets
// and quotes, and trailing punctuation (closing brackets without a partner
// inside the chunk, quotes, commas, semicolons, colons, '!', '?', '%' and a
// final '.'). Everything else stays attached, so formulas such as
// "Na0.35MnO2", decimals, "C-rate" and "mAh/g" survive as single tokens.
// Throws Error("empty text") when the input has no tokens.
std::vector<std::string> tokenize(std::string_view raw_text);

// Splits running text into sentences at '.', '!' or '?' followed by
// whitespace and an upper-case letter, digit or opening bracket. Common
// abbreviations ("Fig.", "et al.", "e.g.") do not end a sentence.
std::vector<std::string> split_sentences(std::string_view text);

// Decodes UTF-8 into code points; invalid bytes map to U+FFFD.
std::vector<char32_t> utf8_code_points(std::string_view s);

std::string to_lower_ascii(std::string_view s);

}  // namespace matscire
