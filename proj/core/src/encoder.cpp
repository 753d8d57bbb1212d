#include "matscire/encoder.hpp"

#include <fstream>
#include <sstream>

namespace matscire {

std::vector<std::string> EncoderConfig::problems() const {
  std::vector<std::string> out;
  auto positive = [&](const char* name, int v) {
    if (v <= 0) out.push_back(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive("word_dim", word_dim);
  positive("char_dim", char_dim);
  positive("char_feature_dim", char_feature_dim);
  if (char_window <= 0 || char_window % 2 == 0) {
    out.push_back("char_window must be a positive odd number, got " + std::to_string(char_window));
  }
  if (hidden_dim < 2) out.push_back("hidden_dim must be at least 2, got " + std::to_string(hidden_dim));
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    out.push_back("dropout must lie in [0, 1), got " + std::to_string(dropout));
  }
  if (!builtin() && !ProviderRegistry::instance().contains(provider)) {
    out.push_back("unknown encoder provider '" + provider + "'");
  }
  return out;
}

void EncoderConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid encoder config:";
  for (const auto& s : p) msg += "\n  " + s;
  throw Error(msg);
}

SentenceEncoding external_provider_encode(ContextualProvider& provider,
                                          std::span<const std::string> tokens) {
  if (tokens.empty()) throw Error("provider '" + provider.name() + "': empty sentence");
  ContextualProvider::Output out;
  try {
    out = provider.encode(tokens);
  } catch (const std::exception& e) {
    throw Error("provider '" + provider.name() + "' failed: " + e.what());
  }
  const int n = static_cast<int>(tokens.size());
  if (static_cast<std::size_t>(out.vectors.rows()) != out.token_index.size()) {
    throw Error("provider '" + provider.name() + "': " + std::to_string(out.vectors.rows()) +
                " vectors but " + std::to_string(out.token_index.size()) + " alignment entries");
  }
  SentenceEncoding enc;
  enc.vectors = Eigen::MatrixXd::Zero(n, out.vectors.cols());
  enc.mask.assign(static_cast<std::size_t>(n), true);
  enc.length = n;
  int expect = 0;
  for (std::size_t k = 0; k < out.token_index.size(); ++k) {
    const int t = out.token_index[k];
    if (t == expect) {
      enc.vectors.row(t) = out.vectors.row(static_cast<Eigen::Index>(k));
      ++expect;
    } else if (t != expect - 1) {
      throw Error("provider '" + provider.name() + "': alignment jumps to token " +
                  std::to_string(t) + " at subword " + std::to_string(k));
    }
  }
  if (expect != n) {
    throw Error("provider '" + provider.name() + "': alignment covers " + std::to_string(expect) +
                " of " + std::to_string(n) + " tokens");
  }
  return enc;
}

ProviderRegistry& ProviderRegistry::instance() {
  static ProviderRegistry registry;
  return registry;
}

void ProviderRegistry::add(const std::string& name, Factory factory) {
  if (name == "builtin") throw Error("'builtin' is reserved");
  factories_[name] = std::move(factory);
}

std::shared_ptr<ContextualProvider> ProviderRegistry::create(const std::string& name) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) throw Error("unknown encoder provider '" + name + "'");
  auto p = it->second();
  if (!p) throw Error("provider '" + name + "' factory returned nothing");
  return p;
}

std::vector<std::string> ProviderRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

Encoder::Encoder(const EncoderConfig& config, const Vocabulary& vocab, const CharVocabulary& chars,
                 nn::ParameterSet& params, Rng& rng)
    : config_(config), vocab_(&vocab), chars_(&chars) {
  config_.validate();
  if (!config_.builtin()) {
    provider_ = ProviderRegistry::instance().create(config_.provider);
    return;
  }
  word_emb_ = &params.add("encoder.word_emb", config_.word_dim, vocab.size());
  nn::init_uniform(*word_emb_, 0.1, rng);
  char_emb_ = &params.add("encoder.char_emb", config_.char_dim, chars.size());
  nn::init_uniform(*char_emb_, 0.1, rng);
  char_conv_ = nn::Linear(params, "encoder.char_conv", config_.char_dim * config_.char_window,
                          config_.char_feature_dim, rng);
  bilstm_ = nn::BiLstm(params, "encoder.bilstm", embedding_dim(), config_.hidden_dim / 2, rng);
}

int Encoder::output_dim() const {
  return provider_ ? provider_->dim() : 2 * (config_.hidden_dim / 2);
}

std::vector<int> Encoder::word_ids(const Sentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.tokens.size());
  for (const auto& t : s.tokens) ids.push_back(vocab_->id(t));
  return ids;
}

nn::Var Encoder::char_features(nn::Graph& g, const std::string& token) const {
  auto ids = chars_->ids(token);
  if (ids.empty()) ids.push_back(CharVocabulary::kPad);
  nn::Var c = nn::lookup(g, *char_emb_, ids);
  nn::Var conv = nn::tanh(char_conv_(g, nn::unfold_cols(c, config_.char_window)));
  return nn::max_cols(conv);
}

nn::Var Encoder::embed(nn::Graph& g, const Sentence& s, Rng* rng) const {
  if (s.tokens.empty()) throw Error("cannot embed an empty sentence");
  if (provider_) throw Error("external provider encoders have no token embeddings");
  const auto ids = word_ids(s);
  nn::Var words = nn::lookup(g, *word_emb_, ids);
  std::vector<nn::Var> feats;
  feats.reserve(s.tokens.size());
  for (const auto& t : s.tokens) feats.push_back(char_features(g, t));
  nn::Var x = nn::vcat({words, nn::hcat(feats)});
  if (rng) x = nn::dropout(x, config_.dropout, *rng);
  return x;
}

nn::Var Encoder::encode(nn::Graph& g, nn::Var embeddings, Rng* rng) const {
  nn::Var h = bilstm_(g, embeddings);
  if (rng) h = nn::dropout(h, config_.dropout, *rng);
  return h;
}

nn::Var Encoder::forward(nn::Graph& g, const Sentence& s, Rng* rng) const {
  if (provider_) {
    auto enc = external_provider_encode(*provider_, s.tokens);
    return g.constant(enc.vectors.transpose());
  }
  return encode(g, embed(g, s, rng), rng);
}

Eigen::MatrixXd Encoder::embed_tokens(const Sentence& s) const {
  nn::Graph g(false);
  return embed(g, s).value().transpose();
}

SentenceEncoding Encoder::encode(const Sentence& s) const {
  if (provider_) return external_provider_encode(*provider_, s.tokens);
  nn::Graph g(false);
  SentenceEncoding enc;
  enc.vectors = forward(g, s).value().transpose();
  enc.length = s.size();
  enc.mask.assign(s.tokens.size(), true);
  return enc;
}

std::vector<SentenceEncoding> Encoder::encode_batch(std::span<const Sentence> sentences) const {
  std::vector<SentenceEncoding> out;
  int longest = 0;
  for (const auto& s : sentences) {
    out.push_back(encode(s));
    longest = std::max(longest, s.size());
  }
  for (auto& e : out) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(longest, e.dim());
    padded.topRows(e.length) = e.vectors;
    e.vectors = std::move(padded);
    e.mask.resize(static_cast<std::size_t>(longest), false);
  }
  return out;
}

std::size_t Encoder::load_word_vectors(const std::filesystem::path& path) {
  if (!word_emb_) throw Error("external provider encoders have no word embeddings");
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors " + path.string());
  std::string line;
  std::size_t found = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    // A "count dim" header line is tolerated.
    if (lineno == 1 && v.size() == 1) continue;
    if (static_cast<int>(v.size()) != config_.word_dim) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                  std::to_string(config_.word_dim) + " values, got " + std::to_string(v.size()));
    }
    if (!vocab_->contains(token)) continue;
    const int id = vocab_->id(token);
    for (int k = 0; k < config_.word_dim; ++k) word_emb_->value(k, id) = v[static_cast<std::size_t>(k)];
    ++found;
  }
  return found;
}

}  // namespace matscire
