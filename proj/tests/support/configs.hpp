#pragma once

#include "matscire/trainer.hpp"

namespace matscire::testing {

// Dimensions small enough for single-CPU training inside a test.
inline ModelConfig tiny_model(DecoderKind kind, int hidden = 32) {
  ModelConfig c;
  c.kind = kind;
  c.encoder.word_dim = 32;
  c.encoder.char_dim = 8;
  c.encoder.char_feature_dim = 16;
  c.encoder.hidden_dim = hidden;
  c.encoder.dropout = 0.0;
  c.decoder.hidden_dim = hidden;
  c.decoder.pointer_hidden = hidden / 2;
  c.decoder.relation_dim = 16;
  return c;
}

inline TrainConfig overfit_config(int epochs) {
  TrainConfig t;
  t.learning_rate = 0.01;
  t.dropout = 0.0;
  t.hidden_dim = 32;
  t.num_epochs = epochs;
  t.batch_size = 4;
  t.patience = 0;
  t.seed = 7;
  return t;
}

}  // namespace matscire::testing
