#include <gtest/gtest.h>

#include "matscire/corpus.hpp"
#include "matscire/corpus_io.hpp"
#include "matscire/random.hpp"
#include "matscire/tokenizer.hpp"
#include "synthetic.hpp"

namespace matscire {
namespace {

Sentence sent(const std::string& text, int id = 0) {
  return Sentence::from_tokens(id, 0, tokenize(text));
}

const char* kCeSentence =
    "However, at the same C-rate, the Cu0.02Ti0.94Nb2.04O7 sample exhibits a larger first-cycle "
    "Coulombic efficiency (91.0%) than that of the TiNb2O7 sample (81.6%) probably due to the "
    "smaller particle size and larger (electronic and ionic) conductivity of "
    "Cu0.02Ti0.94Nb2.04O7 [6, 38].";

CandidateTriplet candidate(const std::map<std::string, std::string>& fields) {
  auto r = parse_battery_record(fields);
  if (!r.record) throw Error("fixture record rejected: " + r.rejection);
  return make_candidate(*r.record);
}

TEST(BatteryRecord, Capacity) {
  const auto r = parse_battery_record(
      {{"Property", "Capacity"}, {"Name", "LiCoO2"}, {"Raw_value", "130"}, {"Raw_unit", "mAh/g"}});
  ASSERT_TRUE(r.record);
  EXPECT_EQ(r.record->property, Relation::kCapacity);
  EXPECT_EQ(r.record->value, "130");
  EXPECT_EQ(r.record->unit, "mAh/g");
}

TEST(BatteryRecord, MinimalAndRejected) {
  EXPECT_TRUE(parse_battery_record({{"Property", "Voltage"}, {"Name", "X"}, {"Raw_value", "1"},
                                    {"Raw_unit", "V"}})
                  .record);
  const auto hard = parse_battery_record(
      {{"Property", "Hardness"}, {"Name", "X"}, {"Raw_value", "1"}, {"Raw_unit", "GPa"}});
  EXPECT_FALSE(hard.record);
  EXPECT_FALSE(hard.rejection.empty());
  EXPECT_FALSE(
      parse_battery_record({{"Property", "Voltage"}, {"Raw_value", "1"}, {"Raw_unit", "V"}}).record);
  EXPECT_FALSE(parse_battery_record({{"Property", "Voltage"}, {"Name", "X"}, {"Raw_value", "1"},
                                     {"Raw_unit", "V"}, {"Correctness", "F"}})
                   .record);
}

TEST(BatteryRecord, CoulombicEfficiencyCarriesPercent) {
  const auto r = parse_battery_record(
      {{"Property", "Coulombic Efficiency"}, {"Name", "X"}, {"Value", "0.98"}, {"Unit", "None"}});
  ASSERT_TRUE(r.record);
  EXPECT_EQ(r.record->unit, "%");
}

TEST(Deduplicate, Trivial) {
  const auto t = candidate({{"Property", "Voltage"}, {"Name", "X"}, {"Raw_value", "1"},
                            {"Raw_unit", "V"}});
  EXPECT_EQ(deduplicate({t, t}).size(), 1u);
  EXPECT_TRUE(deduplicate({}).empty());
}

TEST(Deduplicate, InjectedDuplicatePlan) {
  Rng rng(3);
  std::vector<CandidateTriplet> uniques;
  for (int i = 0; i < 900; ++i) {
    uniques.push_back(candidate({{"Property", "Capacity"},
                                 {"Name", "M" + std::to_string(i)},
                                 {"Raw_value", std::to_string(100 + i % 7)},
                                 {"Raw_unit", "mAh/g"}}));
  }
  std::vector<CandidateTriplet> input = uniques;
  for (int i = 0; i < 100; ++i) {
    auto dup = uniques[rng.below(uniques.size())];
    dup.unit = "mA h g-1";  // same normalised unit
    input.insert(input.begin() + static_cast<long>(rng.below(input.size() + 1)), dup);
  }
  const auto out = deduplicate(input);
  ASSERT_EQ(out.size(), 900u);
  std::set<std::string> names;
  for (const auto& c : out) names.insert(c.entity1_text);
  EXPECT_EQ(names.size(), 900u);
  const auto twice = deduplicate(out);
  ASSERT_EQ(twice.size(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(twice[i].dedup_key(), out[i].dedup_key());
}

TEST(DistantSupervision, LiCoO2Voltage) {
  const auto s = sent(
      "Nevertheless, the pure LiCoO2 showed a higher working voltage (3.96 V) than the coated "
      "samples.");
  const std::vector<CandidateTriplet> c = {candidate(
      {{"Property", "Voltage"}, {"Name", "LiCoO2"}, {"Raw_value", "3.96"}, {"Raw_unit", "V"}})};
  const auto a = distant_supervise(s, c, IndicatorLexicon::defaults());
  ASSERT_TRUE(a);
  ASSERT_EQ(a->triplets.size(), 1u);
  EXPECT_EQ(a->triplets[0].entity1.surface, "LiCoO2");
  EXPECT_EQ(a->triplets[0].entity2.surface, "3.96 V");
  EXPECT_EQ(a->triplets[0].relation, Relation::kVoltage);
}

TEST(DistantSupervision, RequiresIndicator) {
  const auto s = sent("Nevertheless, the pure LiCoO2 showed 3.96 V in the first cycle.");
  const std::vector<CandidateTriplet> c = {candidate(
      {{"Property", "Voltage"}, {"Name", "LiCoO2"}, {"Raw_value", "3.96"}, {"Raw_unit", "V"}})};
  EXPECT_FALSE(distant_supervise(s, c, IndicatorLexicon::defaults()));
}

TEST(DistantSupervision, CoulombicEfficiencyPair) {
  const auto s = sent(kCeSentence);
  const std::vector<CandidateTriplet> c = {
      candidate({{"Property", "Coulombic Efficiency"}, {"Name", "TiNb2O7"}, {"Raw_value", "81.6"},
                 {"Raw_unit", "%"}}),
      candidate({{"Property", "Coulombic Efficiency"}, {"Name", "Cu0.02Ti0.94Nb2.04O7"},
                 {"Raw_value", "91.0"}, {"Raw_unit", "%"}})};
  const auto a = distant_supervise(s, c, IndicatorLexicon::defaults());
  ASSERT_TRUE(a);
  ASSERT_EQ(a->triplets.size(), 2u);
  const auto& t0 = a->triplets[0];
  const auto& t1 = a->triplets[1];
  EXPECT_EQ(PointerRecord::from_triplet(t0),
            (PointerRecord{8, 8, 17, 18, Relation::kCoulombicEfficiency}));
  EXPECT_EQ(PointerRecord::from_triplet(t1),
            (PointerRecord{24, 24, 27, 28, Relation::kCoulombicEfficiency}));
  std::vector<PointerRecord> recs = {PointerRecord::from_triplet(t0),
                                     PointerRecord::from_triplet(t1)};
  EXPECT_EQ(format_pointer_line(recs),
            "8 8 17 18 Coulombic_Efficiency | 24 24 27 28 Coulombic_Efficiency");
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(verify_supervision(s, a->triplets[i], c[1 - i], IndicatorLexicon::defaults()));
  }
}

TEST(DistantSupervision, OverlappingEntity1) {
  const auto s = sent("LiFePO4 shows a voltage of 3.4 V and a capacity of 160 mAh/g .");
  const std::vector<CandidateTriplet> c = {
      candidate({{"Property", "Voltage"}, {"Name", "LiFePO4"}, {"Raw_value", "3.4"},
                 {"Raw_unit", "V"}}),
      candidate({{"Property", "Capacity"}, {"Name", "LiFePO4"}, {"Raw_value", "160"},
                 {"Raw_unit", "mAh/g"}})};
  const auto a = distant_supervise(s, c, IndicatorLexicon::defaults());
  ASSERT_TRUE(a);
  ASSERT_EQ(a->triplets.size(), 2u);
  EXPECT_TRUE(a->triplets[0].entity1.same_position(a->triplets[1].entity1));
}

TEST(DistantSupervision, StrictnessReverified) {
  // Regenerate candidates from a synthetic corpus and re-run supervision.
  const auto data = testing::synthetic_corpus({.num_sentences = 40, .seed = 9});
  const auto lex = IndicatorLexicon::defaults();
  for (const auto& a : data) {
    std::vector<CandidateTriplet> cands;
    for (const auto& t : a.triplets) {
      const auto& toks = a.sentence.tokens;
      std::string unit;
      for (int i = t.entity2.begin + 1; i <= t.entity2.end; ++i) {
        unit += (unit.empty() ? "" : " ") + toks[static_cast<std::size_t>(i)];
      }
      cands.push_back(candidate({{"Property", std::string(relation_name(t.relation))},
                                 {"Name", t.entity1.surface},
                                 {"Raw_value", toks[static_cast<std::size_t>(t.entity2.begin)]},
                                 {"Raw_unit", unit}}));
    }
    const auto out = distant_supervise(a.sentence, cands, lex);
    ASSERT_TRUE(out) << a.sentence.raw_text;
    for (const auto& t : out->triplets) {
      bool verified = false;
      for (const auto& c : cands) verified |= verify_supervision(a.sentence, t, c, lex);
      EXPECT_TRUE(verified) << a.sentence.raw_text;
      EXPECT_EQ(span_surface(a.sentence, t.entity1), t.entity1.surface);
      EXPECT_EQ(span_surface(a.sentence, t.entity2), t.entity2.surface);
    }
  }
}

TEST(IndicatorLexicon, NonContiguousGivesMinusOne) {
  IndicatorLexicon lex;
  lex.add(Relation::kEnergy, "energy density");
  const auto contiguous = lex.find(sent("high energy density here"), Relation::kEnergy);
  ASSERT_TRUE(contiguous);
  EXPECT_EQ(contiguous->begin, 1);
  EXPECT_EQ(contiguous->end, 2);
  const auto split = lex.find(sent("energy and power density"), Relation::kEnergy);
  ASSERT_TRUE(split);
  EXPECT_EQ(split->begin, -1);
  EXPECT_FALSE(lex.find(sent("density only"), Relation::kEnergy));
}

TEST(CandidateIndex, FindsMultiTokenNames) {
  std::vector<CandidateTriplet> c = {
      candidate({{"Property", "Voltage"}, {"Name", "Li ion"}, {"Raw_value", "3"}, {"Raw_unit", "V"}}),
      candidate({{"Property", "Voltage"}, {"Name", "NaCl"}, {"Raw_value", "3"}, {"Raw_unit", "V"}})};
  const CandidateIndex index(c);
  const auto hits = index.lookup(sent("the Li ion voltage is 3 V"));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].entity1_text, "Li ion");
}

AnnotatorDecisions decisions(const std::vector<bool>& v) {
  AnnotatorDecisions d;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d[static_cast<int>(i / 2)][Triplet::Key{static_cast<int>(i), 0, 0, 0, 0}] = v[i];
  }
  return d;
}

TEST(AnnotationAgreement, Identical) {
  const auto a = decisions({true, false, true, true});
  EXPECT_DOUBLE_EQ(annotation_agreement(a, a), 1.0);
}

TEST(AnnotationAgreement, ChanceLevel) {
  EXPECT_NEAR(annotation_agreement(decisions({true, true, false, false}),
                                   decisions({true, false, true, false})),
              0.0, 1e-12);
}

// 2x2 table: yes/yes 3, no/no 3, yes/no 1, no/yes 1; po = 0.75, pe = 0.5.
TEST(AnnotationAgreement, HandComputedTable) {
  const auto a = decisions({true, true, true, false, false, false, true, false});
  const auto b = decisions({true, true, true, false, false, false, false, true});
  EXPECT_NEAR(annotation_agreement(a, b), 0.5, 1e-9);
}

TEST(AnnotationAgreement, IdMismatch) {
  auto a = decisions({true, false});
  auto b = a;
  b[7] = b[0];
  EXPECT_THROW(annotation_agreement(a, b), Error);
}

}  // namespace
}  // namespace matscire
