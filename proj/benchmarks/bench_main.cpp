#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "matscire/evaluator.hpp"
#include "matscire/model.hpp"
#include "matscire/random.hpp"
#include "matscire/tokenizer.hpp"
#include "matscire/trainer.hpp"

namespace {

using namespace matscire;

const char* kText =
    "However, at the same C-rate, the Cu0.02Ti0.94Nb2.04O7 sample exhibits a larger first-cycle "
    "Coulombic efficiency (91.0%) than that of the TiNb2O7 sample (81.6%) probably due to the "
    "smaller particle size and larger (electronic and ionic) conductivity of Cu0.02Ti0.94Nb2.04O7 [6, 38].";

std::vector<AnnotatedSentence> corpus(int n, int len) {
  Rng rng(1);
  const std::vector<std::string> words = {"LiCoO2", "shows", "a", "voltage", "of", "3.9", "V", "and",
                                          "capacity", "140", "mAh", "g-1", "."};
  std::vector<AnnotatedSentence> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> toks;
    for (int k = 0; k < len; ++k) toks.push_back(words[rng.below(words.size())]);
    AnnotatedSentence a{Sentence::from_tokens(i, 0, toks), {}};
    a.triplets.push_back(make_triplet(a.sentence, {0, 0, 2, 3, Relation::kVoltage}));
    a.triplets.push_back(make_triplet(a.sentence, {0, 0, len - 3, len - 2, Relation::kCapacity}));
    out.push_back(std::move(a));
  }
  return out;
}

ModelConfig small_model(DecoderKind kind) {
  ModelConfig c;
  c.kind = kind;
  c.encoder.word_dim = 50;
  c.encoder.hidden_dim = 100;
  c.decoder.hidden_dim = 100;
  c.decoder.pointer_hidden = 50;
  c.decoder.relation_dim = 50;
  return c;
}

void BM_Tokenize(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(kText));
}
BENCHMARK(BM_Tokenize);

void BM_SelectSpan(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  Eigen::VectorXd b(n), e(n);
  for (int i = 0; i < n; ++i) b(i) = rng.uniform(), e(i) = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(select_span(b, e));
}
BENCHMARK(BM_SelectSpan)->Arg(16)->Arg(64)->Arg(256);

void BM_Match(benchmark::State& state) {
  const auto data = corpus(200, 20);
  std::vector<Triplet> gold;
  for (const auto& a : data) gold.insert(gold.end(), a.triplets.begin(), a.triplets.end());
  for (auto _ : state) benchmark::DoNotOptimize(match(gold, gold));
}
BENCHMARK(BM_Match);

void BM_EncodeSentence(benchmark::State& state) {
  const auto data = corpus(8, static_cast<int>(state.range(0)));
  const Model m = Model::for_corpus(small_model(DecoderKind::kPointer), data, 3);
  for (auto _ : state) benchmark::DoNotOptimize(m.encoder().encode(data[0].sentence));
}
BENCHMARK(BM_EncodeSentence)->Arg(20)->Arg(60);

void BM_Predict(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? DecoderKind::kPointer : DecoderKind::kWord;
  const auto data = corpus(8, 30);
  const Model m = Model::for_corpus(small_model(kind), data, 3);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(data[0].sentence));
}
BENCHMARK(BM_Predict)->Arg(0)->Arg(1);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = corpus(32, 25);
  TrainConfig cfg;
  cfg.num_epochs = 1;
  cfg.dropout = 0.0;
  cfg.batch_size = 8;
  Model m = Model::for_corpus(small_model(DecoderKind::kPointer), data, 4);
  for (auto _ : state) benchmark::DoNotOptimize(train(m, data, {}, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
