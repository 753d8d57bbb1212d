#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "matscire/splits.hpp"
#include "matscire/types.hpp"

namespace matscire {

struct Counts {
  std::size_t correct = 0;    // |tr ∩ p|
  std::size_t gold = 0;       // |tr|
  std::size_t predicted = 0;  // |p|

  Counts& operator+=(const Counts& o) {
    correct += o.correct;
    gold += o.gold;
    predicted += o.predicted;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

struct MatchCounts {
  std::array<Counts, kNumPropertyRelations> per_relation{};

  Counts total() const;
  MatchCounts& operator+=(const MatchCounts& o);
  bool operator==(const MatchCounts&) const = default;
};

// Exact match on (entity1 span, relation, entity2 span); each gold triplet
// absorbs at most one prediction.
MatchCounts match(std::span<const Triplet> gold, std::span<const Triplet> pred);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give 0.
Prf precision_recall_f1(const Counts& c);

struct Aggregate {
  Prf weighted;  // support-weighted mean
  Prf macro;     // unweighted mean
};

// Both means run over the relations with positive support. Throws when the
// total support is zero or the spans differ in length.
Aggregate aggregate(std::span<const Prf> per_relation, std::span<const double> supports);

double mean(std::span<const double> values);
// Sample standard deviation (N - 1 denominator); throws when N < 2.
double std_dev(std::span<const double> values);

using Predictor = std::function<std::vector<Triplet>(const Sentence&)>;

struct RunMetrics {
  MatchCounts counts;
  std::array<Prf, kNumPropertyRelations> per_relation{};
  Prf weighted, macro, micro;
  std::size_t sentences = 0;
};

RunMetrics metrics_from_counts(const MatchCounts& counts);
RunMetrics evaluate(std::span<const AnnotatedSentence> gold, const Predictor& predict);

struct PrfStats {
  Prf mean;
  std::optional<Prf> sd;  // present when there are at least two runs
};

struct EvalReport {
  std::vector<RunMetrics> runs;
  std::array<PrfStats, kNumPropertyRelations> per_relation{};
  PrfStats weighted, macro, micro;
  // Test-set sentence ids per run, when the report comes from folds.
  std::vector<std::vector<int>> fold_test_ids;

  int n() const { return static_cast<int>(runs.size()); }
};

EvalReport summarize(std::vector<RunMetrics> runs);

// Builds a predictor for one split (e.g. by training a model on split.train).
using RunFactory = std::function<Predictor(const DatasetSplit&)>;

// Trains and evaluates once per fold of `num_folds` non-overlapping test
// blocks and summarises the runs.
EvalReport five_run_protocol(std::span<const AnnotatedSentence> dataset, const RunFactory& factory,
                             std::uint64_t seed, int num_folds = 5);

// One JSON object per (run, relation, metric), then one per aggregate
// statistic.
void write_report_jsonl(const EvalReport& report, const std::filesystem::path& path);
// Relation rows with Pr/Re/F1 columns ("mean ± sd" when N >= 2) and the
// weighted and macro rows.
std::string render_table(const EvalReport& report);

}  // namespace matscire
