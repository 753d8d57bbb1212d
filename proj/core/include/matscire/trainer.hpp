#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "matscire/evaluator.hpp"
#include "matscire/model.hpp"
#include "matscire/splits.hpp"

namespace matscire {

struct TrainConfig {
  double learning_rate = 0.001;
  std::string optimizer = "adam";
  double dropout = 0.5;
  int hidden_dim = 300;
  int num_epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 13;
  bool teacher_forcing = true;
  int patience = 10;        // epochs without dev improvement before stopping; 0 disables
  double clip_norm = 5.0;   // 0 disables

  std::vector<std::string> problems() const;
  void validate() const;
};

// Copies hidden_dim and dropout into the model configuration.
void apply_train_config(ModelConfig& model, const TrainConfig& train);

// Gold pointer records sorted by (entity1 begin, entity2 begin, relation
// name, entity1 end, entity2 end), then the EOT step.
std::vector<TargetStep> build_targets(const AnnotatedSentence& annotated);

// -log of the gold probabilities: four position heads and the relation for a
// triplet step, the relation alone for the EOT step. Throws when a gold index
// is out of range.
double step_loss(const StepOutput& out, const TargetStep& gold);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean per sentence
  double dev_f1 = 0.0;      // macro F1 on the dev set; NaN without one
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
  bool early_stopped = false;
};

// Adam with per-batch mean loss, gradient clipping, teacher forcing and
// best-dev parameter retention. Throws when the loss becomes non-finite.
TrainResult train(Model& model, std::span<const AnnotatedSentence> train_set,
                  std::span<const AnnotatedSentence> dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

Predictor predictor(const Model& model);

struct FractionRun {
  double fraction = 0.0;
  std::size_t train_sentences = 0;
  std::size_t train_triplets = 0;
  TrainResult training;
  RunMetrics test;
};

// Trains one fresh model per fraction on nested subsets of split.train and
// evaluates each on split.test.
std::vector<FractionRun> run_fraction_sweep(const DatasetSplit& split,
                                            std::span<const double> fractions,
                                            const ModelConfig& model_config,
                                            const TrainConfig& config);

struct KShotRun {
  int k = 0;
  std::size_t train_sentences = 0;
  std::size_t train_triplets = 0;
  TrainResult training;
  RunMetrics test;
};

KShotRun run_kshot(const DatasetSplit& split, int k, const ModelConfig& model_config,
                   const TrainConfig& config);

// A RunFactory that trains a fresh model on each split.
RunFactory training_factory(const ModelConfig& model_config, const TrainConfig& config);

}  // namespace matscire
