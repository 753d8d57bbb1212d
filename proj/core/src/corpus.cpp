#include "matscire/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "matscire/tokenizer.hpp"

namespace matscire {
namespace {

bool missing(const std::string& v) { return v.empty() || v == "None" || v == "null"; }

std::string field(const std::map<std::string, std::string>& lower, std::string_view key) {
  auto it = lower.find(std::string(key));
  return it == lower.end() ? std::string() : it->second;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Unit components a window must cover. Units the lexer cannot read fall back
// to their literal tokens.
struct UnitPattern {
  UnitSignature signature;
  std::vector<std::string> literals;  // sorted, lower case; used when signature is empty

  std::size_t size() const {
    return signature.empty() ? literals.size() : signature.atoms.size();
  }
};

UnitPattern make_pattern(std::string_view unit) {
  UnitPattern p;
  p.signature = parse_unit(unit);
  if (p.signature.empty()) {
    try {
      for (auto& t : tokenize(unit)) p.literals.push_back(to_lower_ascii(t));
    } catch (const Error&) {
    }
    std::sort(p.literals.begin(), p.literals.end());
  }
  return p;
}

// Unit components carried by `token` under `pattern`, as comparable strings.
std::optional<std::vector<std::string>> unit_components(const UnitPattern& pattern,
                                                        std::string_view token) {
  if (pattern.signature.empty()) {
    std::string lower = to_lower_ascii(token);
    if (std::binary_search(pattern.literals.begin(), pattern.literals.end(), lower)) {
      return std::vector<std::string>{lower};
    }
    return std::nullopt;
  }
  auto atoms = lex_unit_token(token);
  if (!atoms || atoms->empty()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& a : *atoms) out.push_back(a.prefix + ":" + a.base);
  return out;
}

std::vector<std::string> pattern_components(const UnitPattern& pattern) {
  if (pattern.signature.empty()) return pattern.literals;
  std::vector<std::string> out;
  for (const auto& a : pattern.signature.atoms) out.push_back(a.prefix + ":" + a.base);
  std::sort(out.begin(), out.end());
  return out;
}

// The value token, possibly with unit material attached ("4.5V").
std::optional<std::vector<std::string>> value_components(const UnitPattern& pattern,
                                                         std::string_view token,
                                                         std::string_view value) {
  if (token == value) return std::vector<std::string>{};
  auto tv = parse_number(token);
  auto vv = parse_number(value);
  if (tv && vv && *tv == *vv) return std::vector<std::string>{};
  if (token.size() > value.size() && token.starts_with(value)) {
    auto rest = unit_components(pattern, token.substr(value.size()));
    if (rest) return rest;
  }
  return std::nullopt;
}

bool is_bracket(std::string_view t) { return t == "(" || t == ")" || t == "[" || t == "]"; }

int find_run(const std::vector<std::string>& tokens, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > tokens.size()) return -1;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<long>(i))) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

RecordParseResult parse_battery_record(const std::map<std::string, std::string>& fields) {
  std::map<std::string, std::string> lower;
  for (const auto& [k, v] : fields) lower[to_lower_ascii(k)] = trim(v);

  RecordParseResult result;
  const std::string property = field(lower, "property");
  if (missing(property)) {
    result.rejection = "missing Property";
    return result;
  }
  auto relation = parse_relation(property);
  if (!relation || *relation == Relation::kEot) {
    result.rejection = "unsupported property '" + property + "'";
    return result;
  }
  const std::string name = field(lower, "name");
  if (missing(name)) {
    result.rejection = "missing Name";
    return result;
  }
  if (to_lower_ascii(field(lower, "correctness")) == "f") {
    result.rejection = "marked incorrect";
    return result;
  }

  BatteryRecord rec;
  rec.property = *relation;
  rec.name = name;
  rec.raw_value = field(lower, "raw_value");
  rec.raw_unit = field(lower, "raw_unit");
  rec.canonical_unit = field(lower, "unit");
  rec.doi = field(lower, "doi");
  const std::string db_value = field(lower, "value");

  if (!missing(rec.raw_value) && !missing(rec.raw_unit)) {
    rec.value = rec.raw_value;
    rec.unit = rec.raw_unit;
  } else if (!missing(db_value) && !missing(rec.canonical_unit)) {
    rec.value = db_value;
    rec.unit = rec.canonical_unit;
  } else {
    rec.value = !missing(rec.raw_value) ? rec.raw_value : db_value;
  }
  if (rec.property == Relation::kCoulombicEfficiency && missing(rec.unit)) rec.unit = "%";
  if (missing(rec.value) || missing(rec.unit)) {
    result.rejection = "missing value or unit";
    return result;
  }
  for (const auto& [k, v] : fields) {
    static const std::unordered_set<std::string> kKnown = {
        "property", "name", "value", "raw_value", "raw_unit", "unit", "doi"};
    if (!kKnown.count(to_lower_ascii(k))) rec.extra.emplace(k, v);
  }
  result.record = std::move(rec);
  return result;
}

std::string CandidateTriplet::dedup_key() const {
  std::string key = entity1_text;
  key += '\x1f';
  key += relation_name(relation);
  key += '\x1f';
  key += value;
  key += '\x1f';
  key += normalized_unit_key(unit);
  return key;
}

CandidateTriplet make_candidate(const BatteryRecord& record) {
  CandidateTriplet c;
  c.entity1_text = record.name;
  c.relation = record.property;
  c.value = record.value;
  c.unit = record.unit;
  c.unit_variants = expand_unit_variants(record.unit);
  const std::string& shown = missing(record.canonical_unit) ? record.unit : record.canonical_unit;
  const std::string& shown_value = missing(record.raw_value) ? record.value : record.raw_value;
  c.original_text = shown_value + " " + shown;
  return c;
}

std::vector<CandidateTriplet> deduplicate(std::vector<CandidateTriplet> candidates) {
  std::unordered_set<std::string> seen;
  std::vector<CandidateTriplet> out;
  out.reserve(candidates.size());
  for (auto& c : candidates) {
    if (seen.insert(c.dedup_key()).second) out.push_back(std::move(c));
  }
  return out;
}

std::optional<EntitySpan> match_entity2(const Sentence& sentence, std::string_view value,
                                        std::string_view unit, int max_window) {
  if (value.empty() || unit.empty()) return std::nullopt;
  const UnitPattern pattern = make_pattern(unit);
  if (pattern.size() == 0) return std::nullopt;
  const std::vector<std::string> wanted = pattern_components(pattern);
  const auto& tokens = sentence.tokens;
  const int n = sentence.size();

  for (int i = 0; i < n; ++i) {
    bool have_value = false;
    int exponent_tokens = 0;
    std::vector<std::string> got;
    for (int j = i; j < n && j - i < max_window; ++j) {
      const std::string& tok = tokens[static_cast<std::size_t>(j)];
      bool anchor = false;  // value or unit material; windows start and end on these
      std::optional<std::vector<std::string>> vc;
      if (!have_value) vc = value_components(pattern, tok, value);
      if (vc) {
        have_value = true;
        got.insert(got.end(), vc->begin(), vc->end());
        anchor = true;
      } else if (auto uc = unit_components(pattern, tok)) {
        got.insert(got.end(), uc->begin(), uc->end());
        anchor = true;
      } else if (j > i && is_exponent_decoration(tok)) {
        ++exponent_tokens;
      } else if (j > i && is_bracket(tok)) {
      } else {
        break;
      }
      if (got.size() > wanted.size()) break;
      if (!anchor || !have_value || got.size() != wanted.size()) continue;
      std::vector<std::string> sorted = got;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != wanted) continue;

      int end = j;
      int budget = pattern.signature.denominator_atoms - exponent_tokens;
      while (budget-- > 0 && end + 1 < n &&
             is_exponent_decoration(tokens[static_cast<std::size_t>(end) + 1])) {
        ++end;
      }
      return make_span(sentence, i, end);
    }
  }
  return std::nullopt;
}

IndicatorLexicon IndicatorLexicon::defaults() {
  IndicatorLexicon lex;
  lex.add(Relation::kVoltage, "voltage");
  lex.add(Relation::kVoltage, "voltages");
  lex.add(Relation::kCapacity, "capacity");
  lex.add(Relation::kCapacity, "capacities");
  lex.add(Relation::kConductivity, "conductivity");
  lex.add(Relation::kConductivity, "conductivities");
  lex.add(Relation::kCoulombicEfficiency, "coulombic efficiency");
  lex.add(Relation::kCoulombicEfficiency, "coulombic efficiencies");
  lex.add(Relation::kEnergy, "energy");
  lex.add(Relation::kEnergy, "energies");
  return lex;
}

IndicatorLexicon IndicatorLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open indicator lexicon " + path.string());
  IndicatorLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('\t');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 'Relation<TAB>phrase'");
    }
    auto rel = parse_relation(trim(line.substr(0, sep)));
    if (!rel || *rel == Relation::kEot) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": unknown relation '" +
                  trim(line.substr(0, sep)) + "'");
    }
    lex.add(*rel, trim(line.substr(sep + 1)));
  }
  return lex;
}

void IndicatorLexicon::add(Relation r, std::string_view phrase) {
  std::vector<std::string> toks;
  for (auto& t : tokenize(phrase)) toks.push_back(to_lower_ascii(t));
  auto& list = phrases_[r];
  if (std::find(list.begin(), list.end(), toks) == list.end()) list.push_back(std::move(toks));
}

const std::vector<std::vector<std::string>>& IndicatorLexicon::phrases(Relation r) const {
  static const std::vector<std::vector<std::string>> kEmpty;
  auto it = phrases_.find(r);
  return it == phrases_.end() ? kEmpty : it->second;
}

std::optional<IndicatorLexicon::Hit> IndicatorLexicon::find(const Sentence& sentence,
                                                           Relation r) const {
  std::vector<std::string> lower;
  lower.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) lower.push_back(to_lower_ascii(t));

  std::optional<Hit> best;
  for (const auto& phrase : phrases(r)) {
    int at = find_run(lower, phrase);
    if (at >= 0 && (!best || at < best->begin)) {
      best = Hit{at, at + static_cast<int>(phrase.size()) - 1};
    }
  }
  if (best) return best;
  for (const auto& phrase : phrases(r)) {
    std::size_t k = 0;
    for (const auto& t : lower) {
      if (k < phrase.size() && t == phrase[k]) ++k;
    }
    if (k == phrase.size()) return Hit{};
  }
  return std::nullopt;
}

std::optional<AnnotatedSentence> distant_supervise(const Sentence& sentence,
                                                   std::span<const CandidateTriplet> candidates,
                                                   const IndicatorLexicon& lexicon,
                                                   const SupervisionOptions& options) {
  std::vector<Triplet> attached;
  for (const auto& c : candidates) {
    if (c.relation == Relation::kEot) continue;
    std::vector<std::string> e1;
    try {
      e1 = tokenize(c.entity1_text);
    } catch (const Error&) {
      continue;
    }
    const int b1 = find_run(sentence.tokens, e1);
    if (b1 < 0) continue;
    auto indicator = lexicon.find(sentence, c.relation);
    if (!indicator) continue;
    auto e2 = match_entity2(sentence, c.value, c.unit, options.max_window);
    if (!e2) continue;

    Triplet t;
    t.entity1 = make_span(sentence, b1, b1 + static_cast<int>(e1.size()) - 1);
    t.relation = c.relation;
    t.entity2 = *e2;
    t.entity2_original = c.original_text;
    t.relation_begin = indicator->begin;
    t.relation_end = indicator->end;
    attached.push_back(std::move(t));
  }
  if (attached.empty()) return std::nullopt;
  std::stable_sort(attached.begin(), attached.end(), [](const Triplet& a, const Triplet& b) {
    return std::tuple(a.entity1.begin, a.entity2.begin, relation_name(a.relation), a.entity1.end,
                      a.entity2.end) < std::tuple(b.entity1.begin, b.entity2.begin,
                                                  relation_name(b.relation), b.entity1.end,
                                                  b.entity2.end);
  });
  AnnotatedSentence out;
  out.sentence = sentence;
  out.triplets = unique_triplets(std::move(attached));
  return out;
}

bool verify_supervision(const Sentence& sentence, const Triplet& triplet,
                        const CandidateTriplet& candidate, const IndicatorLexicon& lexicon,
                        int max_window) {
  std::vector<std::string> e1;
  try {
    e1 = tokenize(candidate.entity1_text);
  } catch (const Error&) {
    return false;
  }
  if (triplet.entity1.length() != static_cast<int>(e1.size())) return false;
  for (std::size_t k = 0; k < e1.size(); ++k) {
    if (sentence.tokens.at(static_cast<std::size_t>(triplet.entity1.begin) + k) != e1[k]) {
      return false;
    }
  }
  if (!lexicon.find(sentence, triplet.relation)) return false;
  // The emitted window must itself be accepted by the matcher.
  Sentence window = Sentence::from_tokens(
      0, 0,
      std::vector<std::string>(sentence.tokens.begin() + triplet.entity2.begin,
                               sentence.tokens.begin() + triplet.entity2.end + 1));
  auto m = match_entity2(window, candidate.value, candidate.unit, max_window);
  return m && m->begin == 0;
}

CandidateIndex::CandidateIndex(std::vector<CandidateTriplet> candidates)
    : candidates_(std::move(candidates)) {
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    try {
      auto toks = tokenize(candidates_[i].entity1_text);
      by_first_token_[toks.front()].push_back(i);
    } catch (const Error&) {
    }
  }
}

std::vector<CandidateTriplet> CandidateIndex::lookup(const Sentence& sentence) const {
  std::vector<std::size_t> hits;
  std::unordered_set<std::string> seen;
  for (const auto& t : sentence.tokens) {
    if (!seen.insert(t).second) continue;
    auto it = by_first_token_.find(t);
    if (it != by_first_token_.end()) hits.insert(hits.end(), it->second.begin(), it->second.end());
  }
  std::sort(hits.begin(), hits.end());
  std::vector<CandidateTriplet> out;
  out.reserve(hits.size());
  for (auto i : hits) out.push_back(candidates_[i]);
  return out;
}

double annotation_agreement(const AnnotatorDecisions& a, const AnnotatorDecisions& b) {
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw Error("annotators labelled different sentence ids");
  }
  double both_yes = 0, a_only = 0, b_only = 0, both_no = 0;
  for (const auto& [id, items_a] : a) {
    const auto& items_b = b.at(id);
    std::set<Triplet::Key> keys;
    for (const auto& [k, _] : items_a) keys.insert(k);
    for (const auto& [k, _] : items_b) keys.insert(k);
    for (const auto& k : keys) {
      auto ia = items_a.find(k);
      auto ib = items_b.find(k);
      const bool ya = ia != items_a.end() && ia->second;
      const bool yb = ib != items_b.end() && ib->second;
      if (ya && yb) ++both_yes;
      else if (ya) ++a_only;
      else if (yb) ++b_only;
      else ++both_no;
    }
  }
  const double n = both_yes + a_only + b_only + both_no;
  if (n == 0) throw Error("no decisions to compare");
  const double po = (both_yes + both_no) / n;
  const double pa = (both_yes + a_only) / n;
  const double pb = (both_yes + b_only) / n;
  const double pe = pa * pb + (1 - pa) * (1 - pb);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1 - pe);
}

}  // namespace matscire
