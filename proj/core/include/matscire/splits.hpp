#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "matscire/types.hpp"

namespace matscire {

struct SplitFractions {
  double train = 0.7;
  double dev = 0.1;
  double test = 0.2;
};

// Index partition of a dataset. Indices refer to the input order.
struct SplitIndices {
  std::vector<std::size_t> train, dev, test;
};

struct DatasetSplit {
  std::vector<AnnotatedSentence> train, dev, test;
  std::uint64_t seed = 0;
  SplitFractions fractions;
  int fold = -1;  // -1 for a plain fractional split
  int num_folds = 0;
};

inline constexpr std::size_t kMinSplitSize = 10;

// Shuffles 0..n-1 under `seed` and cuts it into round(train*n) and
// round(dev*n) items, the rest going to test. Throws "dataset too small to
// split" when n < 10 and when the fractions do not sum to 1 within 1e-9.
SplitIndices split_indices(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

// Fold `fold` of `num_folds` non-overlapping test blocks over one shuffle
// under `seed`. The remainder is divided into dev (round(dev_share * rest))
// and train.
SplitIndices fold_indices(std::size_t n, int fold, int num_folds, std::uint64_t seed,
                          double dev_share = 0.125);

DatasetSplit split_dataset(std::span<const AnnotatedSentence> records,
                           const SplitFractions& fractions, std::uint64_t seed);
DatasetSplit split_fold(std::span<const AnnotatedSentence> records, int fold, int num_folds,
                        std::uint64_t seed);

// Nested prefixes of one shuffle of `train`: the subset for a smaller fraction
// is always contained in the subset for a larger one. Each subset keeps at
// least one item. Fractions must lie in (0, 1].
std::vector<std::vector<AnnotatedSentence>> nested_fraction_subsets(
    std::span<const AnnotatedSentence> train, std::span<const double> fractions,
    std::uint64_t seed);

// Visits sentences in a seeded order and keeps triplets until every relation
// has exactly k. Kept sentences carry only their selected triplets. Throws
// when k < 1 or some relation has fewer than k triplets in `train`.
std::vector<AnnotatedSentence> sample_k_shot(std::span<const AnnotatedSentence> train, int k,
                                             std::uint64_t seed);

std::array<std::size_t, kNumPropertyRelations> relation_counts(
    std::span<const AnnotatedSentence> records);
std::size_t triplet_count(std::span<const AnnotatedSentence> records);

}  // namespace matscire
