#include "matscire/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "matscire/tokenizer.hpp"

namespace matscire {
namespace {

struct BaseUnit {
  std::string_view base;
  std::vector<std::string_view> symbols;
  std::vector<std::string_view> words;  // lower case
  bool prefixable = true;
};

const std::vector<BaseUnit>& base_units() {
  static const std::vector<BaseUnit> kUnits = {
      {"ampere", {"A"}, {"amp", "amps", "ampere", "amperes"}},
      {"volt", {"V"}, {"volt", "volts"}},
      {"watt", {"W"}, {"watt", "watts"}},
      {"hour", {"h", "hr"}, {"hour", "hours", "hrs"}},
      {"gram", {"g"}, {"gram", "grams", "gramme", "grammes"}},
      {"siemens", {"S"}, {"siemens"}},
      {"meter", {"m"}, {"meter", "meters", "metre", "metres"}},
      {"electronvolt", {"eV"}, {"electronvolt", "electronvolts"}},
      {"ohm", {"Ω"}, {"ohm", "ohms"}},
      {"percent", {"%"}, {"percent", "pct"}, false},
  };
  return kUnits;
}

struct Prefix {
  std::string_view name;
  std::vector<std::string_view> symbols;
};

const std::vector<Prefix>& prefixes() {
  static const std::vector<Prefix> kPrefixes = {
      {"milli", {"m"}},       {"kilo", {"k"}}, {"micro", {"μ", "µ", "u"}},
      {"centi", {"c"}},       {"nano", {"n"}}, {"mega", {"M"}},
  };
  return kPrefixes;
}

const std::map<std::string, UnitAtom, std::less<>>& symbol_table() {
  static const auto kTable = [] {
    std::map<std::string, UnitAtom, std::less<>> t;
    for (const auto& u : base_units()) {
      for (auto sym : u.symbols) {
        t.emplace(std::string(sym), UnitAtom{"", std::string(u.base)});
        if (!u.prefixable) continue;
        for (const auto& p : prefixes()) {
          for (auto ps : p.symbols) {
            t.emplace(std::string(ps) + std::string(sym),
                      UnitAtom{std::string(p.name), std::string(u.base)});
          }
        }
      }
    }
    return t;
  }();
  return kTable;
}

const std::map<std::string, UnitAtom, std::less<>>& word_table() {
  static const auto kTable = [] {
    std::map<std::string, UnitAtom, std::less<>> t;
    for (const auto& u : base_units()) {
      for (auto w : u.words) {
        t.emplace(std::string(w), UnitAtom{"", std::string(u.base)});
        if (!u.prefixable) continue;
        for (const auto& p : prefixes()) {
          t.emplace(std::string(p.name) + std::string(w),
                    UnitAtom{std::string(p.name), std::string(u.base)});
        }
      }
    }
    return t;
  }();
  return kTable;
}

constexpr std::array<std::string_view, 4> kLetterLikeMultibyte = {"μ", "µ", "Ω",
                                                                  "%"};
constexpr std::array<std::string_view, 8> kDecorationMultibyte = {
    "·", "−", "–", "⋅", "⁻", "¹", "²", "³"};

bool is_decoration_ascii(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-' ||
         c == '(' || c == ')' || c == '^' || c == '/' || c == '*' || c == ',';
}

// Length of a letter-like sequence starting at s[0], 0 if none.
std::size_t letter_len(std::string_view s) {
  if (std::isalpha(static_cast<unsigned char>(s[0]))) return 1;
  for (auto m : kLetterLikeMultibyte) {
    if (s.starts_with(m)) return m.size();
  }
  return 0;
}

std::size_t decoration_len(std::string_view s) {
  if (is_decoration_ascii(s[0])) return 1;
  for (auto m : kDecorationMultibyte) {
    if (s.starts_with(m)) return m.size();
  }
  return 0;
}

bool marks_negative(std::string_view deco) {
  return deco.find('-') != std::string_view::npos ||
         deco.find("−") != std::string_view::npos ||
         deco.find("–") != std::string_view::npos ||
         deco.find("⁻") != std::string_view::npos;
}

bool lex_symbols(std::string_view run, std::vector<UnitAtom>& out) {
  if (run.empty()) return true;
  const auto& table = symbol_table();
  for (std::size_t len = std::min<std::size_t>(run.size(), 5); len > 0; --len) {
    auto it = table.find(run.substr(0, len));
    if (it == table.end()) continue;
    out.push_back(it->second);
    if (lex_symbols(run.substr(len), out)) return true;
    out.pop_back();
  }
  return false;
}

struct DetailedAtom {
  UnitAtom atom;
  bool denominator = false;
};

std::optional<std::vector<DetailedAtom>> lex_detailed(std::string_view text) {
  std::vector<DetailedAtom> out;
  bool after_slash = false;
  std::size_t i = 0;
  while (i < text.size()) {
    std::string_view rest = text.substr(i);
    if (std::size_t d = decoration_len(rest); d > 0) {
      std::size_t j = i;
      while (j < text.size()) {
        std::size_t dj = decoration_len(text.substr(j));
        if (dj == 0) break;
        j += dj;
      }
      std::string_view deco = text.substr(i, j - i);
      if (deco.find('/') != std::string_view::npos) after_slash = true;
      if (!out.empty() && marks_negative(deco) && deco.find('/') == std::string_view::npos) {
        out.back().denominator = true;
      }
      i = j;
      continue;
    }
    if (letter_len(rest) == 0) return std::nullopt;
    std::size_t j = i;
    while (j < text.size()) {
      std::size_t lj = letter_len(text.substr(j));
      if (lj == 0) break;
      j += lj;
    }
    std::string_view run = text.substr(i, j - i);
    std::vector<UnitAtom> atoms;
    auto wit = word_table().find(to_lower_ascii(run));
    if (wit != word_table().end()) {
      atoms.push_back(wit->second);
    } else if (!lex_symbols(run, atoms)) {
      return std::nullopt;
    }
    for (auto& a : atoms) out.push_back({std::move(a), after_slash});
    i = j;
  }
  return out;
}

std::vector<DetailedAtom> parse_detailed(std::string_view unit) {
  std::vector<DetailedAtom> all;
  std::size_t i = 0;
  while (i < unit.size()) {
    while (i < unit.size() && std::isspace(static_cast<unsigned char>(unit[i]))) ++i;
    std::size_t j = i;
    while (j < unit.size() && !std::isspace(static_cast<unsigned char>(unit[j]))) ++j;
    if (j > i) {
      std::string_view chunk = unit.substr(i, j - i);
      if (is_exponent_decoration(chunk) && !all.empty()) {
        if (marks_negative(chunk)) all.back().denominator = true;
      } else {
        auto atoms = lex_detailed(chunk);
        if (!atoms || atoms->empty()) return {};
        all.insert(all.end(), atoms->begin(), atoms->end());
      }
    }
    i = j;
  }
  return all;
}

std::string_view first_prefix_symbol(std::string_view prefix) {
  for (const auto& p : prefixes()) {
    if (p.name == prefix) return p.symbols.front();
  }
  return "";
}

const BaseUnit* find_base(std::string_view base) {
  for (const auto& u : base_units()) {
    if (u.base == base) return &u;
  }
  return nullptr;
}

std::string render_symbol(const UnitAtom& a) {
  const BaseUnit* u = find_base(a.base);
  return std::string(first_prefix_symbol(a.prefix)) + std::string(u->symbols.front());
}

}  // namespace

std::optional<std::vector<UnitAtom>> lex_unit_token(std::string_view text) {
  if (text.empty()) return std::nullopt;
  auto detailed = lex_detailed(text);
  if (!detailed) return std::nullopt;
  std::vector<UnitAtom> out;
  for (auto& d : *detailed) out.push_back(std::move(d.atom));
  return out;
}

UnitSignature parse_unit(std::string_view unit) {
  UnitSignature sig;
  for (auto& d : parse_detailed(unit)) {
    if (d.denominator) ++sig.denominator_atoms;
    sig.atoms.push_back(std::move(d.atom));
  }
  std::sort(sig.atoms.begin(), sig.atoms.end());
  return sig;
}

bool is_exponent_decoration(std::string_view token) {
  std::string_view s = token;
  auto eat = [&s](std::string_view p) {
    if (s.starts_with(p)) {
      s.remove_prefix(p.size());
      return true;
    }
    return false;
  };
  const bool open = eat("(");
  if (!eat("-") && !eat("−") && !eat("⁻")) eat("+");
  bool digit = false;
  if (!s.empty() && std::isdigit(static_cast<unsigned char>(s[0]))) {
    s.remove_prefix(1);
    digit = true;
  } else if (eat("¹") || eat("²") || eat("³")) {
    digit = true;
  }
  if (!digit) return false;
  if (open && !eat(")")) return false;
  return s.empty();
}

std::set<std::string> expand_unit_variants(std::string_view unit) {
  std::set<std::string> out;
  out.emplace(unit);
  const auto atoms = parse_detailed(unit);
  if (atoms.empty()) return out;

  if (atoms.size() == 1 && !atoms.front().denominator) {
    const UnitAtom& a = atoms.front().atom;
    const BaseUnit* u = find_base(a.base);
    std::vector<std::string_view> psyms = {""};
    std::string pword;
    if (!a.prefix.empty()) {
      psyms.clear();
      for (const auto& p : prefixes()) {
        if (p.name == a.prefix) psyms.assign(p.symbols.begin(), p.symbols.end());
      }
      pword = a.prefix;
    }
    for (auto ps : psyms) {
      for (auto sym : u->symbols) out.insert(std::string(ps) + std::string(sym));
    }
    for (auto w : u->words) out.insert(pword + std::string(w));
    return out;
  }

  std::vector<std::string> num, den;
  for (const auto& d : atoms) (d.denominator ? den : num).push_back(render_symbol(d.atom));
  auto join = [](const std::vector<std::string>& parts, std::string_view sep) {
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) s += sep;
      s += parts[i];
    }
    return s;
  };
  static constexpr std::array<std::string_view, 5> kExponentStyles = {"-1", " 1", "(-1)",
                                                                      "−1", "^-1"};
  for (std::string_view sep : {" ", ""}) {
    const std::string head = join(num, sep);
    if (den.empty()) {
      out.insert(head);
      continue;
    }
    out.insert(head + "/" + join(den, "/"));
    for (auto style : kExponentStyles) {
      std::vector<std::string> decorated;
      for (const auto& d : den) decorated.push_back(d + std::string(style));
      const std::string tail = join(decorated, " ");
      out.insert(head.empty() ? tail : head + " " + tail);
      out.insert(head.empty() ? tail : tail + " " + head);
    }
  }
  return out;
}

std::string normalized_unit_key(std::string_view unit) {
  const auto atoms = parse_detailed(unit);
  if (atoms.empty()) {
    std::string s = to_lower_ascii(unit);
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
            s.end());
    return s;
  }
  std::vector<std::string> parts;
  for (const auto& d : atoms) {
    parts.push_back(d.atom.prefix + d.atom.base + (d.denominator ? "^-1" : ""));
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) key += p + ";";
  return key;
}

}  // namespace matscire
