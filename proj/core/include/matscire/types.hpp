#pragma once

#include <array>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace matscire {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The five property relations plus the sequence terminator.
enum class Relation : int {
  kVoltage = 0,
  kCapacity,
  kConductivity,
  kCoulombicEfficiency,
  kEnergy,
  kEot,
};

inline constexpr int kNumRelations = 6;          // including EOT
inline constexpr int kNumPropertyRelations = 5;  // excluding EOT

inline constexpr std::array<Relation, kNumPropertyRelations> kPropertyRelations = {
    Relation::kVoltage, Relation::kCapacity, Relation::kConductivity,
    Relation::kCoulombicEfficiency, Relation::kEnergy};

// Canonical token form, e.g. "Coulombic_Efficiency".
std::string_view relation_name(Relation r);

// Accepts the canonical name, the spaced form ("Coulombic Efficiency") and any
// letter case. Returns nullopt for anything else.
std::optional<Relation> parse_relation(std::string_view name);

inline int relation_index(Relation r) { return static_cast<int>(r); }
inline Relation relation_from_index(int i) { return static_cast<Relation>(i); }

struct Sentence {
  int id = 0;
  int doc_id = 0;
  std::vector<std::string> tokens;
  std::string raw_text;

  int size() const { return static_cast<int>(tokens.size()); }

  // Builds a sentence whose raw_text is the space-joined tokens.
  static Sentence from_tokens(int id, int doc_id, std::vector<std::string> tokens);
};

// Inclusive token span [begin, end].
struct EntitySpan {
  int begin = 0;
  int end = 0;
  std::string surface;

  int length() const { return end - begin + 1; }
  bool same_position(const EntitySpan& o) const { return begin == o.begin && end == o.end; }
};

struct Triplet {
  EntitySpan entity1;
  Relation relation = Relation::kVoltage;
  EntitySpan entity2;
  // Value and unit as written in the source record, when known.
  std::optional<std::string> entity2_original;
  // Relation indicator position in the sentence; -1 when absent or when the
  // indicator words are not contiguous.
  int relation_begin = -1;
  int relation_end = -1;

  // Position/relation identity used for exact-match evaluation.
  struct Key {
    int b1, e1, b2, e2;
    int relation;
    auto operator<=>(const Key&) const = default;
  };
  Key key() const {
    return {entity1.begin, entity1.end, entity2.begin, entity2.end, relation_index(relation)};
  }
};

struct PointerRecord {
  int b1 = 0;
  int e1 = 0;
  int b2 = 0;
  int e2 = 0;
  Relation relation = Relation::kVoltage;

  auto operator<=>(const PointerRecord&) const = default;
  bool operator==(const PointerRecord&) const = default;

  static PointerRecord from_triplet(const Triplet& t) {
    return {t.entity1.begin, t.entity1.end, t.entity2.begin, t.entity2.end, t.relation};
  }
};

struct AnnotatedSentence {
  Sentence sentence;
  std::vector<Triplet> triplets;
};

// Throws Error when `span` does not fit in `sentence`.
void check_span(const Sentence& sentence, int begin, int end);

// Space-joined tokens[begin..end]; throws naming the offending index.
std::string span_surface(const Sentence& sentence, const EntitySpan& span);
std::string span_surface(const Sentence& sentence, int begin, int end);

EntitySpan make_span(const Sentence& sentence, int begin, int end);

Triplet make_triplet(const Sentence& sentence, const PointerRecord& rec);

// Removes duplicate triplets (by Key), keeping first occurrences.
std::vector<Triplet> unique_triplets(std::vector<Triplet> triplets);

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end);

}  // namespace matscire
