#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "matscire/types.hpp"
#include "matscire/units.hpp"

namespace matscire {

// One entry of the battery property database dump.
struct BatteryRecord {
  Relation property = Relation::kVoltage;
  std::string name;
  std::string value;      // the value used for matching (Raw_value, else Value)
  std::string raw_value;
  std::string raw_unit;
  std::string unit;       // the unit used for matching (Raw_unit, else Unit)
  std::string canonical_unit;  // the database's "Unit" field, verbatim
  std::string doi;
  std::map<std::string, std::string> extra;
};

struct RecordParseResult {
  std::optional<BatteryRecord> record;
  std::string rejection;  // empty when `record` is set
};

// Normalises a raw key-value record. Records outside the five properties,
// without a Name, without a usable value/unit pair, or flagged
// Correctness = "F" come back rejected with a reason.
RecordParseResult parse_battery_record(const std::map<std::string, std::string>& fields);

struct CandidateTriplet {
  std::string entity1_text;
  Relation relation = Relation::kVoltage;
  std::string value;
  std::string unit;
  std::set<std::string> unit_variants;
  std::string original_text;  // value + database unit, e.g. "1.7 Volt^(1.0)"

  std::string dedup_key() const;
};

CandidateTriplet make_candidate(const BatteryRecord& record);

// Stable de-duplication on (entity1_text, relation, value, normalised unit).
std::vector<CandidateTriplet> deduplicate(std::vector<CandidateTriplet> candidates);

// Leftmost window (at most `max_window` tokens before trailing exponent
// decoration) made only of the value token, tokens that lex to the unit's
// atoms in any order, and stand-alone exponent decoration, whose atom
// multiset equals the unit's. Trailing exponent tokens adjacent to the
// window are absorbed, up to the unit's denominator count.
std::optional<EntitySpan> match_entity2(const Sentence& sentence, std::string_view value,
                                        std::string_view unit, int max_window = 8);

// Surface phrases that signal each relation in a sentence.
class IndicatorLexicon {
 public:
  // Relation names plus plural forms, lower case.
  static IndicatorLexicon defaults();

  // Lines "Relation<TAB>phrase" (or "Relation: phrase"); '#' starts a comment.
  static IndicatorLexicon load(const std::filesystem::path& path);

  void add(Relation r, std::string_view phrase);
  const std::vector<std::vector<std::string>>& phrases(Relation r) const;

  struct Hit {
    int begin = -1;  // -1 when the phrase occurs only non-contiguously
    int end = -1;
  };
  // First contiguous occurrence of any phrase; failing that, an in-order
  // non-contiguous occurrence (reported with -1 indices).
  std::optional<Hit> find(const Sentence& sentence, Relation r) const;

 private:
  std::map<Relation, std::vector<std::vector<std::string>>> phrases_;
};

struct SupervisionOptions {
  int max_window = 8;
};

// Attaches every candidate whose entity1 tokens, entity2 value/unit window
// and relation indicator all occur in `sentence`. Returns nullopt when no
// candidate attaches. Triplets are sorted by (entity1 begin, entity2 begin,
// relation) and de-duplicated.
std::optional<AnnotatedSentence> distant_supervise(const Sentence& sentence,
                                                   std::span<const CandidateTriplet> candidates,
                                                   const IndicatorLexicon& lexicon,
                                                   const SupervisionOptions& options = {});

// Re-checks the strictness conditions for one emitted triplet.
bool verify_supervision(const Sentence& sentence, const Triplet& triplet,
                        const CandidateTriplet& candidate, const IndicatorLexicon& lexicon,
                        int max_window = 8);

// Finds candidates whose entity1 could occur in a sentence, keyed on the
// first entity1 token.
class CandidateIndex {
 public:
  explicit CandidateIndex(std::vector<CandidateTriplet> candidates);
  std::vector<CandidateTriplet> lookup(const Sentence& sentence) const;
  std::size_t size() const { return candidates_.size(); }

 private:
  std::vector<CandidateTriplet> candidates_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
};

// Cohen's kappa over per-sentence accept/reject decisions. Each annotator
// maps sentence id -> (triplet key -> accepted). Items judged by only one
// annotator count as rejected by the other. Throws when the sentence ids
// differ.
using AnnotatorDecisions = std::map<int, std::map<Triplet::Key, bool>>;
double annotation_agreement(const AnnotatorDecisions& a, const AnnotatorDecisions& b);

}  // namespace matscire
