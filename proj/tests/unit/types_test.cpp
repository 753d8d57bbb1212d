#include <gtest/gtest.h>

#include <cctype>
#include <random>

#include "matscire/hashing.hpp"
#include "matscire/tokenizer.hpp"
#include "matscire/types.hpp"
#include "matscire/vocabulary.hpp"

namespace matscire {
namespace {

const char* kTio2 =
    "The voltage plateau at around 2.0 and 1.7 V are verified the lithium ion insertion / "
    "extraction of anatase TiO2 .";

// Independent splitter: whitespace chunks, then peel characters whose class
// is "detachable" from both ends one at a time.
std::vector<std::string> char_class_split(const std::string& text) {
  auto detach_front = [](char c) { return c == '(' || c == '[' || c == '{' || c == '"'; };
  auto detach_back = [](char c) {
    return c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '%' || c == '"';
  };
  std::vector<std::string> out;
  std::string chunk;
  auto flush = [&] {
    if (chunk.empty()) return;
    std::vector<std::string> tail;
    std::size_t b = 0, e = chunk.size();
    while (b < e && detach_front(chunk[b])) out.push_back(std::string(1, chunk[b++]));
    auto closing = [&](std::size_t i) {
      const char c = chunk[i];
      if (c != ')' && c != ']') return false;
      const char open = c == ')' ? '(' : '[';
      return chunk.find(open, b) >= i;
    };
    while (e > b && (detach_back(chunk[e - 1]) || closing(e - 1) || (e == chunk.size() && chunk[e - 1] == '.'))) {
      tail.insert(tail.begin(), std::string(1, chunk[--e]));
    }
    if (b < e) out.push_back(chunk.substr(b, e - b));
    out.insert(out.end(), tail.begin(), tail.end());
    chunk.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      chunk += c;
    }
  }
  flush();
  return out;
}

TEST(Relation, NamesRoundTrip) {
  for (Relation r : kPropertyRelations) {
    EXPECT_EQ(parse_relation(relation_name(r)), r);
  }
  EXPECT_EQ(relation_name(Relation::kCoulombicEfficiency), "Coulombic_Efficiency");
  EXPECT_EQ(parse_relation("coulombic efficiency"), Relation::kCoulombicEfficiency);
  EXPECT_EQ(parse_relation("Hardness"), std::nullopt);
}

TEST(Tokenize, Tio2SentenceIndices) {
  const auto t = tokenize(kTio2);
  ASSERT_EQ(t.size(), 21u);
  EXPECT_EQ(t[7], "1.7");
  EXPECT_EQ(t[8], "V");
  EXPECT_EQ(t[19], "TiO2");
}

TEST(Tokenize, SingleToken) { EXPECT_EQ(tokenize("A"), std::vector<std::string>{"A"}); }

TEST(Tokenize, FormulaMatchesCharClassOracle) {
  const std::string s = "Na0.35MnO2 is 42.6 Wh kg 1";
  const std::vector<std::string> expected = {"Na0.35MnO2", "is", "42.6", "Wh", "kg", "1"};
  EXPECT_EQ(tokenize(s), expected);
  EXPECT_EQ(char_class_split(s), expected);
}

TEST(Tokenize, PunctuationAgreesWithOracle) {
  for (const std::string s : {"capacity (130 mAh/g), stable", "a \"quoted\" word; then: more!",
                              "efficiency of 91.0% vs 81.6%"}) {
    EXPECT_EQ(tokenize(s), char_class_split(s)) << s;
  }
}

TEST(Tokenize, EmptyTextIsAnError) {
  EXPECT_THROW(tokenize(""), Error);
  EXPECT_THROW(tokenize("   \t"), Error);
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  std::mt19937 gen(5);
  const std::string alphabet = "abcXYZ019.,;:()%-/ ";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int len = 1 + static_cast<int>(gen() % 40);
    for (int i = 0; i < len; ++i) s += alphabet[gen() % alphabet.size()];
    std::vector<std::string> once;
    try {
      once = tokenize(s);
    } catch (const Error&) {
      continue;
    }
    for (const auto& tok : once) {
      for (char c : tok) ASSERT_FALSE(std::isspace(static_cast<unsigned char>(c)));
    }
    std::string joined;
    for (std::size_t i = 0; i < once.size(); ++i) joined += (i ? " " : "") + once[i];
    ASSERT_EQ(tokenize(joined), once) << "input: [" << s << "]";
  }
}

TEST(SplitSentences, KeepsAbbreviations) {
  const auto s = split_sentences("See Fig. 2 for details. The voltage is 3 V. (a) Next one.");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], "See Fig. 2 for details.");
}

TEST(SpanSurface, Tio2Record) {
  const auto s = Sentence::from_tokens(5507, 0, tokenize(kTio2));
  EXPECT_EQ(span_surface(s, 19, 19), "TiO2");
  EXPECT_EQ(span_surface(s, 7, 8), "1.7 V");
  EXPECT_EQ(span_surface(s, 0, 0), s.tokens[0]);
}

TEST(SpanSurface, OutOfBoundsNamesIndex) {
  const auto s = Sentence::from_tokens(0, 0, {"a", "b"});
  try {
    span_surface(s, 1, 5);
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos);
  }
  EXPECT_THROW(span_surface(s, 1, 0), Error);
  EXPECT_THROW(span_surface(s, -1, 0), Error);
}

TEST(Triplets, UniqueKeepsFirst) {
  const auto s = Sentence::from_tokens(0, 0, {"A", "is", "1", "V"});
  auto t1 = make_triplet(s, {0, 0, 2, 3, Relation::kVoltage});
  auto t2 = t1;
  t2.relation_begin = 1;
  const auto u = unique_triplets({t1, t2, make_triplet(s, {0, 0, 2, 2, Relation::kVoltage})});
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u[0].relation_begin, -1);
}

TEST(Vocabulary, SingleSentenceEnumeration) {
  const std::vector<Sentence> c = {Sentence::from_tokens(0, 0, {"a", "b"})};
  const Vocabulary v = build_vocabulary(c, 1);
  EXPECT_EQ(v.size(), 12);
  for (std::string_view t : {"a", "b", "|", ";", "<BOT>", "<EOT>", "<UNK>"}) {
    EXPECT_TRUE(v.contains(t)) << t;
  }
  for (Relation r : kPropertyRelations) EXPECT_TRUE(v.contains(relation_name(r)));
  for (int i = 0; i < v.size(); ++i) EXPECT_EQ(v.id(v.token(i)), i);
}

TEST(Vocabulary, MinCountThreshold) {
  const std::vector<Sentence> c = {Sentence::from_tokens(0, 0, {"x", "y"}),
                                   Sentence::from_tokens(1, 0, {"y"})};
  const Vocabulary v = build_vocabulary(c, 2);
  EXPECT_EQ(v.id("x"), v.unk());
  EXPECT_NE(v.id("y"), v.unk());
  EXPECT_THROW(build_vocabulary(c, 0), Error);
  EXPECT_THROW(build_vocabulary(std::span<const Sentence>{}, 1), Error);
}

TEST(Vocabulary, DeterministicAndRestorable) {
  const std::vector<Sentence> c = {Sentence::from_tokens(0, 0, {"q", "r", "q", "s"})};
  const Vocabulary a = build_vocabulary(c);
  const Vocabulary b = build_vocabulary(c);
  EXPECT_EQ(a.tokens(), b.tokens());
  EXPECT_EQ(a.hash(), b.hash());
  const Vocabulary r = Vocabulary::from_tokens(a.tokens());
  EXPECT_EQ(r.hash(), a.hash());
  EXPECT_EQ(r.relation_id(Relation::kEnergy), a.relation_id(Relation::kEnergy));
}

TEST(CharVocabulary, PadAndUnknown) {
  const std::vector<Sentence> c = {Sentence::from_tokens(0, 0, {"ab"})};
  const auto cv = CharVocabulary::build(c);
  EXPECT_EQ(cv.size(), 4);
  const auto ids = cv.ids("abz");
  ASSERT_EQ(ids.size(), 3u);
  EXPECT_EQ(ids[2], CharVocabulary::kUnknown);
  EXPECT_NE(ids[0], CharVocabulary::kPad);
}

TEST(Hashing, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace matscire
