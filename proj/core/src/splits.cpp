#include "matscire/splits.hpp"

#include <cmath>
#include <numeric>

#include "matscire/random.hpp"

namespace matscire {
namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  return order;
}

template <typename It>
std::vector<AnnotatedSentence> gather(std::span<const AnnotatedSentence> records, It first,
                                      It last) {
  std::vector<AnnotatedSentence> out;
  for (; first != last; ++first) out.push_back(records[*first]);
  return out;
}

}  // namespace

SplitIndices split_indices(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  if (n < kMinSplitSize) throw Error("dataset too small to split");
  if (f.train < 0 || f.dev < 0 || f.test < 0 ||
      std::abs(f.train + f.dev + f.test - 1.0) > 1e-9) {
    throw Error("split fractions must be nonnegative and sum to 1");
  }
  const auto order = shuffled(n, seed);
  const auto n_train = static_cast<std::size_t>(std::llround(f.train * static_cast<double>(n)));
  const auto n_dev = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(f.dev * static_cast<double>(n))));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.dev.assign(order.begin() + n_train, order.begin() + n_train + n_dev);
  s.test.assign(order.begin() + n_train + n_dev, order.end());
  return s;
}

SplitIndices fold_indices(std::size_t n, int fold, int num_folds, std::uint64_t seed,
                          double dev_share) {
  if (num_folds < 2) throw Error("need at least 2 folds");
  if (fold < 0 || fold >= num_folds) {
    throw Error("fold " + std::to_string(fold) + " outside [0, " + std::to_string(num_folds) + ")");
  }
  if (n < kMinSplitSize || n < static_cast<std::size_t>(num_folds)) {
    throw Error("dataset too small to split");
  }
  const auto order = shuffled(n, seed);
  const auto k = static_cast<std::size_t>(num_folds);
  const std::size_t lo = static_cast<std::size_t>(fold) * n / k;
  const std::size_t hi = (static_cast<std::size_t>(fold) + 1) * n / k;
  SplitIndices s;
  s.test.assign(order.begin() + lo, order.begin() + hi);
  std::vector<std::size_t> rest(order.begin(), order.begin() + lo);
  rest.insert(rest.end(), order.begin() + hi, order.end());
  const auto n_dev = std::min(
      rest.size() - 1, static_cast<std::size_t>(std::llround(dev_share * static_cast<double>(rest.size()))));
  s.dev.assign(rest.end() - n_dev, rest.end());
  s.train.assign(rest.begin(), rest.end() - n_dev);
  return s;
}

DatasetSplit split_dataset(std::span<const AnnotatedSentence> records,
                           const SplitFractions& fractions, std::uint64_t seed) {
  const auto idx = split_indices(records.size(), fractions, seed);
  DatasetSplit s;
  s.train = gather(records, idx.train.begin(), idx.train.end());
  s.dev = gather(records, idx.dev.begin(), idx.dev.end());
  s.test = gather(records, idx.test.begin(), idx.test.end());
  s.seed = seed;
  s.fractions = fractions;
  return s;
}

DatasetSplit split_fold(std::span<const AnnotatedSentence> records, int fold, int num_folds,
                        std::uint64_t seed) {
  const auto idx = fold_indices(records.size(), fold, num_folds, seed);
  DatasetSplit s;
  s.train = gather(records, idx.train.begin(), idx.train.end());
  s.dev = gather(records, idx.dev.begin(), idx.dev.end());
  s.test = gather(records, idx.test.begin(), idx.test.end());
  s.seed = seed;
  const double n = static_cast<double>(records.size());
  s.fractions = {static_cast<double>(s.train.size()) / n, static_cast<double>(s.dev.size()) / n,
                 static_cast<double>(s.test.size()) / n};
  s.fold = fold;
  s.num_folds = num_folds;
  return s;
}

std::vector<std::vector<AnnotatedSentence>> nested_fraction_subsets(
    std::span<const AnnotatedSentence> train, std::span<const double> fractions,
    std::uint64_t seed) {
  if (train.empty()) throw Error("empty training set");
  const auto order = shuffled(train.size(), seed);
  std::vector<std::vector<AnnotatedSentence>> out;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error("fraction " + std::to_string(f) + " outside (0, 1]");
    auto m = static_cast<std::size_t>(std::llround(f * static_cast<double>(train.size())));
    m = std::clamp<std::size_t>(m, 1, train.size());
    out.push_back(gather(train, order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m)));
  }
  return out;
}

std::array<std::size_t, kNumPropertyRelations> relation_counts(
    std::span<const AnnotatedSentence> records) {
  std::array<std::size_t, kNumPropertyRelations> c{};
  for (const auto& a : records) {
    for (const auto& t : a.triplets) ++c[static_cast<std::size_t>(relation_index(t.relation))];
  }
  return c;
}

std::size_t triplet_count(std::span<const AnnotatedSentence> records) {
  std::size_t n = 0;
  for (const auto& a : records) n += a.triplets.size();
  return n;
}

std::vector<AnnotatedSentence> sample_k_shot(std::span<const AnnotatedSentence> train, int k,
                                             std::uint64_t seed) {
  if (k < 1) throw Error("k must be at least 1, got " + std::to_string(k));
  const auto support = relation_counts(train);
  for (Relation r : kPropertyRelations) {
    const auto have = support[static_cast<std::size_t>(relation_index(r))];
    if (have < static_cast<std::size_t>(k)) {
      throw Error("insufficient support for relation " + std::string(relation_name(r)) + ": " +
                  std::to_string(have) + " triplets, need " + std::to_string(k));
    }
  }
  std::array<int, kNumPropertyRelations> taken{};
  std::vector<AnnotatedSentence> out;
  for (std::size_t i : shuffled(train.size(), seed)) {
    AnnotatedSentence kept{train[i].sentence, {}};
    for (const auto& t : train[i].triplets) {
      int& c = taken[static_cast<std::size_t>(relation_index(t.relation))];
      if (c < k) {
        ++c;
        kept.triplets.push_back(t);
      }
    }
    if (!kept.triplets.empty()) out.push_back(std::move(kept));
  }
  return out;
}

}  // namespace matscire
