#include "matscire/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace matscire {
namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "Voltage", "Capacity", "Conductivity", "Coulombic_Efficiency", "Energy", "EOT"};

std::string normalize_relation(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

std::string_view relation_name(Relation r) { return kRelationNames.at(relation_index(r)); }

std::optional<Relation> parse_relation(std::string_view name) {
  const std::string key = normalize_relation(name);
  if (key.empty()) return std::nullopt;
  for (int i = 0; i < kNumRelations; ++i) {
    if (normalize_relation(kRelationNames[i]) == key) return relation_from_index(i);
  }
  return std::nullopt;
}

std::string join_tokens(const std::vector<std::string>& tokens, std::size_t begin,
                        std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Sentence Sentence::from_tokens(int id, int doc_id, std::vector<std::string> tokens) {
  Sentence s;
  s.id = id;
  s.doc_id = doc_id;
  s.raw_text = join_tokens(tokens, 0, tokens.size());
  s.tokens = std::move(tokens);
  return s;
}

void check_span(const Sentence& sentence, int begin, int end) {
  const int n = sentence.size();
  if (begin < 0 || begin >= n) {
    throw Error("span begin index " + std::to_string(begin) + " out of bounds for sentence of " +
                std::to_string(n) + " tokens");
  }
  if (end < 0 || end >= n) {
    throw Error("span end index " + std::to_string(end) + " out of bounds for sentence of " +
                std::to_string(n) + " tokens");
  }
  if (begin > end) {
    throw Error("span begin index " + std::to_string(begin) + " exceeds end index " +
                std::to_string(end));
  }
}

std::string span_surface(const Sentence& sentence, int begin, int end) {
  check_span(sentence, begin, end);
  return join_tokens(sentence.tokens, static_cast<std::size_t>(begin),
                     static_cast<std::size_t>(end) + 1);
}

std::string span_surface(const Sentence& sentence, const EntitySpan& span) {
  return span_surface(sentence, span.begin, span.end);
}

EntitySpan make_span(const Sentence& sentence, int begin, int end) {
  return {begin, end, span_surface(sentence, begin, end)};
}

Triplet make_triplet(const Sentence& sentence, const PointerRecord& rec) {
  if (rec.relation == Relation::kEot) throw Error("EOT cannot label a triplet");
  Triplet t;
  t.entity1 = make_span(sentence, rec.b1, rec.e1);
  t.relation = rec.relation;
  t.entity2 = make_span(sentence, rec.b2, rec.e2);
  return t;
}

std::vector<Triplet> unique_triplets(std::vector<Triplet> triplets) {
  std::set<Triplet::Key> seen;
  std::vector<Triplet> out;
  out.reserve(triplets.size());
  for (auto& t : triplets) {
    if (seen.insert(t.key()).second) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace matscire
