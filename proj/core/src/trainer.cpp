#include "matscire/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace matscire {

std::vector<std::string> TrainConfig::problems() const {
  std::vector<std::string> out;
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    out.push_back("learning_rate must be a nonnegative number, got " + std::to_string(learning_rate));
  }
  if (optimizer != "adam") out.push_back("optimizer must be adam, got '" + optimizer + "'");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    out.push_back("dropout must lie in [0, 1), got " + std::to_string(dropout));
  }
  if (hidden_dim < 2) out.push_back("hidden_dim must be at least 2, got " + std::to_string(hidden_dim));
  if (num_epochs < 1) out.push_back("num_epochs must be positive, got " + std::to_string(num_epochs));
  if (batch_size < 1) out.push_back("batch_size must be positive, got " + std::to_string(batch_size));
  if (patience < 0) out.push_back("patience must be nonnegative, got " + std::to_string(patience));
  if (!(clip_norm >= 0.0)) out.push_back("clip_norm must be nonnegative");
  return out;
}

void TrainConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid training config:";
  for (const auto& s : p) msg += "\n  " + s;
  throw Error(msg);
}

void apply_train_config(ModelConfig& model, const TrainConfig& train) {
  model.encoder.hidden_dim = train.hidden_dim;
  model.encoder.dropout = train.dropout;
  model.decoder.hidden_dim = train.hidden_dim;
  model.decoder.pointer_hidden = std::max(1, train.hidden_dim / 2);
}

std::vector<TargetStep> build_targets(const AnnotatedSentence& annotated) {
  std::vector<PointerRecord> recs;
  for (const auto& t : annotated.triplets) {
    check_span(annotated.sentence, t.entity1.begin, t.entity1.end);
    check_span(annotated.sentence, t.entity2.begin, t.entity2.end);
    if (t.relation == Relation::kEot) throw Error("EOT cannot be a triplet relation");
    recs.push_back(PointerRecord::from_triplet(t));
  }
  std::sort(recs.begin(), recs.end(), [](const PointerRecord& a, const PointerRecord& b) {
    const auto ka = std::tuple(a.b1, a.b2, relation_name(a.relation), a.e1, a.e2);
    const auto kb = std::tuple(b.b1, b.b2, relation_name(b.relation), b.e1, b.e2);
    return ka < kb;
  });
  recs.erase(std::unique(recs.begin(), recs.end()), recs.end());
  std::vector<TargetStep> out;
  for (const auto& r : recs) out.push_back(TargetStep::from(r));
  out.push_back(TargetStep::end());
  return out;
}

double step_loss(const StepOutput& out, const TargetStep& gold) {
  auto nll = [](const Eigen::VectorXd& p, int i, const char* what) {
    if (i < 0 || i >= p.size()) {
      throw Error(std::string("gold ") + what + " index " + std::to_string(i) +
                  " outside [0, " + std::to_string(p.size()) + ")");
    }
    return -std::log(p(i));
  };
  double loss = nll(out.relation_probs, relation_index(gold.relation), "relation");
  if (gold.eot()) return loss;
  loss += nll(out.begin1, gold.b1, "begin1");
  loss += nll(out.end1, gold.e1, "end1");
  loss += nll(out.begin2, gold.b2, "begin2");
  loss += nll(out.end2, gold.e2, "end2");
  return loss;
}

Predictor predictor(const Model& model) {
  return [&model](const Sentence& s) { return model.predict(s); };
}

TrainResult train(Model& model, std::span<const AnnotatedSentence> train_set,
                  std::span<const AnnotatedSentence> dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw Error("empty training set");
  auto& params = model.params();
  for (auto& p : params.all()) {
    p.m.setZero();
    p.v.setZero();
  }
  Rng rng(config.seed);
  nn::Adam adam(config.learning_rate);
  const bool use_dropout = model.config().encoder.dropout > 0.0;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_dev_f1 = -1.0;
  std::vector<nn::Matrix> best = params.snapshot();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.num_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(e - b);
      params.zero_grad();
      for (std::size_t k = b; k < e; ++k) {
        nn::Graph g;
        nn::Var l = model.loss(g, train_set[order[k]], use_dropout ? &rng : nullptr,
                               config.teacher_forcing);
        const double v = l.value()(0, 0);
        if (!std::isfinite(v)) {
          throw Error("training diverged at epoch " + std::to_string(epoch) + ": loss is " +
                      std::to_string(v) + " on sentence " +
                      std::to_string(train_set[order[k]].sentence.id));
        }
        total += v;
        g.backward(nn::scale(l, inv));
      }
      if (!params.grads_finite()) {
        throw Error("training diverged at epoch " + std::to_string(epoch) +
                    ": non-finite gradients");
      }
      if (config.clip_norm > 0) params.clip_grad_norm(config.clip_norm);
      adam.step(params);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = total / static_cast<double>(train_set.size());
    log.dev_f1 = std::numeric_limits<double>::quiet_NaN();
    if (!dev_set.empty()) {
      log.dev_f1 = evaluate(dev_set, predictor(model)).macro.f1;
      if (log.dev_f1 > result.best_dev_f1 || result.best_dev_f1 <= 0.0) {
        if (log.dev_f1 > result.best_dev_f1) since_best = 0;
        result.best_dev_f1 = log.dev_f1;
        result.best_epoch = epoch;
        best = params.snapshot();
      } else {
        ++since_best;
      }
    } else {
      result.best_epoch = epoch;
    }
    log.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
    if (config.patience > 0 && result.best_dev_f1 > 0.0 && since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  if (!dev_set.empty()) {
    params.restore(best);
  } else {
    result.best_dev_f1 = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

std::vector<FractionRun> run_fraction_sweep(const DatasetSplit& split,
                                            std::span<const double> fractions,
                                            const ModelConfig& model_config,
                                            const TrainConfig& config) {
  const auto subsets = nested_fraction_subsets(split.train, fractions, config.seed);
  std::vector<FractionRun> out;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    FractionRun run;
    run.fraction = fractions[i];
    run.train_sentences = subsets[i].size();
    run.train_triplets = triplet_count(subsets[i]);
    Model model = Model::for_corpus(model_config, subsets[i], config.seed);
    run.training = train(model, subsets[i], split.dev, config);
    run.test = evaluate(split.test, predictor(model));
    out.push_back(std::move(run));
  }
  return out;
}

KShotRun run_kshot(const DatasetSplit& split, int k, const ModelConfig& model_config,
                   const TrainConfig& config) {
  const auto sample = sample_k_shot(split.train, k, config.seed);
  KShotRun run;
  run.k = k;
  run.train_sentences = sample.size();
  run.train_triplets = triplet_count(sample);
  Model model = Model::for_corpus(model_config, sample, config.seed);
  run.training = train(model, sample, split.dev, config);
  run.test = evaluate(split.test, predictor(model));
  return run;
}

RunFactory training_factory(const ModelConfig& model_config, const TrainConfig& config) {
  return [model_config, config](const DatasetSplit& split) -> Predictor {
    auto model = std::make_shared<Model>(Model::for_corpus(model_config, split.train, config.seed));
    train(*model, split.train, split.dev, config);
    return [model](const Sentence& s) { return model->predict(s); };
  };
}

}  // namespace matscire
