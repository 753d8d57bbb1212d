#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace matscire {

// One unit component, e.g. {"milli", "ampere"}.
struct UnitAtom {
  std::string prefix;  // "", "milli", "kilo", "micro", "centi", "nano", "mega"
  std::string base;    // "ampere", "volt", "watt", "hour", "gram", ...

  auto operator<=>(const UnitAtom&) const = default;
  bool operator==(const UnitAtom&) const = default;
};

// Parsed form of a unit string: the sorted atom multiset plus how many of
// the atoms sit in a denominator ("/g", "g-1", "Gram^(-1.0)").
struct UnitSignature {
  std::vector<UnitAtom> atoms;
  int denominator_atoms = 0;

  bool empty() const { return atoms.empty(); }
};

// Splits `text` (one token, no whitespace) into unit atoms. Digits, signs,
// brackets, '^', '/', '.' and '·' are treated as exponent decoration.
// Returns nullopt when any letter run is not a known unit.
std::optional<std::vector<UnitAtom>> lex_unit_token(std::string_view text);

// Parses a record-side unit string such as "mAh/g", "S cm-1" or
// "Gram^(-1.0)  Hour^(1.0)  MilliAmpere^(1.0)". Unknown units produce an
// empty signature.
UnitSignature parse_unit(std::string_view unit);

// True for stand-alone exponent tokens: "1", "-1", "(-1)", "−1", "2".
bool is_exponent_decoration(std::string_view token);

// Alternate surface forms of `unit`. Single-atom units expand through the
// unit table ("ampere" -> A, amp, amps, ampere, amperes); compound units
// expand to spaced and exponent-decorated renderings. Unknown units return
// {unit}.
std::set<std::string> expand_unit_variants(std::string_view unit);

// Canonical text for a unit, used as a de-duplication key.
std::string normalized_unit_key(std::string_view unit);

}  // namespace matscire
