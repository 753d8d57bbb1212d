#include "matscire/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>

#include "matscire/types.hpp"

namespace matscire {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_trailing_punct(char c) {
  switch (c) {
    case ',': case ';': case ':': case '!': case '?': case '%':
    case '"': case '\'': case '.':
      return true;
    default:
      return false;
  }
}

bool is_quote(char c) { return c == '"' || c == '\''; }

char closing_for(char open) {
  switch (open) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
    default: return '\0';
  }
}

char opening_for(char close) {
  switch (close) {
    case ')': return '(';
    case ']': return '[';
    case '}': return '{';
    default: return '\0';
  }
}

// Index of the bracket closing s[0], or npos.
std::size_t matching_close(std::string_view s) {
  const char open = s.front();
  const char close = closing_for(open);
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == open) ++depth;
    if (s[i] == close && --depth == 0) return i;
  }
  return std::string_view::npos;
}

// True when s.back() closes a bracket opened inside s.
bool has_matching_open(std::string_view s) {
  const char close = s.back();
  const char open = opening_for(close);
  int depth = 0;
  for (std::size_t i = s.size(); i-- > 0;) {
    if (s[i] == close) ++depth;
    if (s[i] == open && --depth == 0) return true;
  }
  return false;
}

void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::vector<std::string> leading;
  std::deque<std::string> trailing;
  std::string_view core = chunk;
  while (core.size() > 1) {
    const char first = core.front();
    const char last = core.back();
    if (is_trailing_punct(last)) {
      trailing.emplace_front(1, last);
      core.remove_suffix(1);
    } else if (is_quote(first)) {
      leading.emplace_back(1, first);
      core.remove_prefix(1);
    } else if (closing_for(first) != '\0' &&
               (matching_close(core) == std::string_view::npos ||
                matching_close(core) == core.size() - 1)) {
      leading.emplace_back(1, first);
      core.remove_prefix(1);
    } else if (opening_for(last) != '\0' && !has_matching_open(core)) {
      trailing.emplace_front(1, last);
      core.remove_suffix(1);
    } else {
      break;
    }
  }
  for (auto& t : leading) out.push_back(std::move(t));
  out.emplace_back(core);
  for (auto& t : trailing) out.push_back(std::move(t));
}

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "fig", "figs", "eq", "eqs", "ref", "refs", "al", "e.g", "i.e", "vs", "ca", "approx",
    "no", "tab", "sect", "cf"};

bool is_abbreviation(std::string_view word) {
  std::string lower = to_lower_ascii(word);
  while (!lower.empty() && !std::isalnum(static_cast<unsigned char>(lower.front())) &&
         lower.front() != '.') {
    lower.erase(lower.begin());
  }
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view raw_text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < raw_text.size()) {
    while (i < raw_text.size() && is_space(raw_text[i])) ++i;
    std::size_t j = i;
    while (j < raw_text.size() && !is_space(raw_text[j])) ++j;
    if (j > i) split_chunk(raw_text.substr(i, j - i), tokens);
    i = j;
  }
  if (tokens.empty()) throw Error("empty text");
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view piece = text.substr(start, end - start);
    while (!piece.empty() && is_space(piece.front())) piece.remove_prefix(1);
    while (!piece.empty() && is_space(piece.back())) piece.remove_suffix(1);
    if (!piece.empty()) sentences.emplace_back(piece);
  };
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (!is_space(text[i + 1])) continue;
    std::size_t k = i + 1;
    while (k < text.size() && is_space(text[k])) ++k;
    if (k >= text.size()) break;
    const char next = text[k];
    if (!(std::isupper(static_cast<unsigned char>(next)) ||
          std::isdigit(static_cast<unsigned char>(next)) || next == '(' || next == '[')) {
      continue;
    }
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(text[w - 1])) --w;
      if (is_abbreviation(text.substr(w, i - w))) continue;
    }
    flush(i + 1);
    start = k;
  }
  flush(text.size());
  return sentences;
}

std::vector<char32_t> utf8_code_points(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

}  // namespace matscire
