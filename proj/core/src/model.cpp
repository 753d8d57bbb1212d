#include "matscire/model.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "matscire/corpus_io.hpp"
#include "matscire/trainer.hpp"

namespace matscire {
namespace {

using json = nlohmann::json;

constexpr char kMagic[8] = {'M', 'S', 'R', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

json config_json(const ModelConfig& c) {
  json j;
  j["decoder_kind"] = std::string(decoder_kind_name(c.kind));
  j["encoder"] = {{"word_dim", c.encoder.word_dim},
                  {"char_dim", c.encoder.char_dim},
                  {"char_feature_dim", c.encoder.char_feature_dim},
                  {"char_window", c.encoder.char_window},
                  {"hidden_dim", c.encoder.hidden_dim},
                  {"dropout", c.encoder.dropout},
                  {"provider", c.encoder.provider}};
  j["decoder"] = {{"hidden_dim", c.decoder.hidden_dim},
                  {"pointer_hidden", c.decoder.pointer_hidden},
                  {"relation_dim", c.decoder.relation_dim},
                  {"max_steps", c.decoder.max_steps},
                  {"max_span_length", c.decoder.max_span_length},
                  {"max_decode_length", c.decoder.max_decode_length}};
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.kind = parse_decoder_kind(j.at("decoder_kind").get<std::string>());
  const json& e = j.at("encoder");
  c.encoder.word_dim = e.at("word_dim").get<int>();
  c.encoder.char_dim = e.at("char_dim").get<int>();
  c.encoder.char_feature_dim = e.at("char_feature_dim").get<int>();
  c.encoder.char_window = e.at("char_window").get<int>();
  c.encoder.hidden_dim = e.at("hidden_dim").get<int>();
  c.encoder.dropout = e.at("dropout").get<double>();
  c.encoder.provider = e.at("provider").get<std::string>();
  const json& d = j.at("decoder");
  c.decoder.hidden_dim = d.at("hidden_dim").get<int>();
  c.decoder.pointer_hidden = d.at("pointer_hidden").get<int>();
  c.decoder.relation_dim = d.at("relation_dim").get<int>();
  c.decoder.max_steps = d.at("max_steps").get<int>();
  c.decoder.max_span_length = d.at("max_span_length").get<int>();
  c.decoder.max_decode_length = d.at("max_decode_length").get<int>();
  return c;
}

struct RawCheckpoint {
  json header;
  std::vector<double> data;
};

RawCheckpoint read_raw(const std::filesystem::path& path, bool with_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t header_len = 0;
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(path.string() + " is not a checkpoint (bad magic)");
  }
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
  if (!in) throw Error(path.string() + ": truncated checkpoint header");
  if (version != kVersion) {
    throw Error(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (header_len > (1u << 30)) throw Error(path.string() + ": implausible header length");
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw Error(path.string() + ": truncated checkpoint header");
  RawCheckpoint raw;
  try {
    raw.header = json::parse(header);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad checkpoint header: " + e.what());
  }
  if (with_data) {
    std::size_t total = 0;
    for (const auto& p : raw.header.at("params")) {
      total += p.at("rows").get<std::size_t>() * p.at("cols").get<std::size_t>();
    }
    raw.data.resize(total);
    in.read(reinterpret_cast<char*>(raw.data.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw Error(path.string() + ": truncated parameter data");
    if (in.peek() != std::char_traits<char>::eof()) {
      throw Error(path.string() + ": trailing bytes after parameter data");
    }
  }
  return raw;
}

}  // namespace

std::string_view decoder_kind_name(DecoderKind k) {
  return k == DecoderKind::kPointer ? "pointer" : "word";
}

DecoderKind parse_decoder_kind(std::string_view name) {
  if (name == "pointer" || name == "pnm") return DecoderKind::kPointer;
  if (name == "word" || name == "wdm") return DecoderKind::kWord;
  throw Error("unknown decoder kind '" + std::string(name) + "' (expected pointer or word)");
}

std::vector<std::string> ModelConfig::problems() const {
  auto p = encoder.problems();
  for (auto& s : decoder.problems()) p.push_back(std::move(s));
  return p;
}

std::string ModelConfig::to_json() const { return config_json(*this).dump(); }

ModelConfig ModelConfig::from_json(std::string_view text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(std::string("bad model config: ") + e.what());
  }
}

struct Model::Impl {
  ModelConfig config;
  Vocabulary vocab;
  CharVocabulary chars;
  nn::ParameterSet params;
  std::unique_ptr<Encoder> encoder;
  std::unique_ptr<PointerDecoder> pointer;
  std::unique_ptr<WordDecoder> word;
};

Model::Model(const ModelConfig& config, Vocabulary vocab, CharVocabulary chars, std::uint64_t seed)
    : impl_(std::make_unique<Impl>()) {
  const auto problems = config.problems();
  if (!problems.empty()) {
    std::string msg = "invalid model config:";
    for (const auto& s : problems) msg += "\n  " + s;
    throw Error(msg);
  }
  impl_->config = config;
  impl_->vocab = std::move(vocab);
  impl_->chars = std::move(chars);
  Rng rng(seed);
  impl_->encoder =
      std::make_unique<Encoder>(config.encoder, impl_->vocab, impl_->chars, impl_->params, rng);
  const int de = impl_->encoder->output_dim();
  if (config.kind == DecoderKind::kPointer) {
    impl_->pointer = std::make_unique<PointerDecoder>(config.decoder, de, impl_->params, rng);
  } else {
    impl_->word = std::make_unique<WordDecoder>(config.decoder, de, config.encoder.word_dim,
                                                impl_->vocab, impl_->params, rng);
  }
}

Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

Model Model::for_corpus(const ModelConfig& config, std::span<const AnnotatedSentence> train,
                        std::uint64_t seed) {
  std::vector<Sentence> sentences;
  sentences.reserve(train.size());
  for (const auto& a : train) sentences.push_back(a.sentence);
  return Model(config, build_vocabulary(sentences), CharVocabulary::build(sentences), seed);
}

const ModelConfig& Model::config() const { return impl_->config; }
const Vocabulary& Model::vocabulary() const { return impl_->vocab; }
const CharVocabulary& Model::chars() const { return impl_->chars; }
nn::ParameterSet& Model::params() { return impl_->params; }
const nn::ParameterSet& Model::params() const { return impl_->params; }
const Encoder& Model::encoder() const { return *impl_->encoder; }
Encoder& Model::encoder() { return *impl_->encoder; }
const PointerDecoder* Model::pointer_decoder() const { return impl_->pointer.get(); }
const WordDecoder* Model::word_decoder() const { return impl_->word.get(); }

nn::Var Model::loss(nn::Graph& g, const AnnotatedSentence& example, Rng* rng,
                    bool teacher_forcing) const {
  nn::Var v = impl_->encoder->forward(g, example.sentence, rng);
  const int n = example.sentence.size();
  if (impl_->pointer) {
    auto ctx = impl_->pointer->context(g, v, n);
    const auto targets = build_targets(example);
    return impl_->pointer->loss(g, ctx, targets, teacher_forcing);
  }
  auto ctx = impl_->word->context(g, v, n, example.sentence);
  return impl_->word->loss(g, ctx, wdm_target_ids(impl_->vocab, example));
}

std::vector<Triplet> Model::predict(const Sentence& s) const {
  const SentenceEncoding enc = impl_->encoder->encode(s);
  if (impl_->pointer) return impl_->pointer->decode(s, enc);
  return impl_->word->decode(s, enc).triplets;
}

std::filesystem::path vocabulary_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".vocab";
  return p;
}

void Model::save(const std::filesystem::path& path) const {
  json header;
  header["format"] = "matscire-checkpoint";
  header["config"] = config_json(impl_->config);
  header["vocab_hash"] = impl_->vocab.hash();
  header["vocab_size"] = impl_->vocab.size();
  std::vector<std::uint32_t> cps;
  for (char32_t c : impl_->chars.code_points()) cps.push_back(static_cast<std::uint32_t>(c));
  header["chars"] = cps;
  json params = json::array();
  for (const auto& p : impl_->params.all()) {
    params.push_back({{"name", p.name}, {"rows", p.value.rows()}, {"cols", p.value.cols()}});
  }
  header["params"] = std::move(params);
  const std::string h = header.dump();

  std::string vocab_text;
  for (const auto& t : impl_->vocab.tokens()) vocab_text += t + "\n";
  write_text_file(vocabulary_path(path), vocab_text);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::uint64_t len = h.size();
  out.write(kMagic, 8);
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& p : impl_->params.all()) {
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * static_cast<Eigen::Index>(sizeof(double))));
  }
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  const auto raw = read_raw(path, false);
  CheckpointInfo info;
  try {
    info.version = static_cast<int>(kVersion);
    info.config = config_from(raw.header.at("config"));
    info.kind = info.config.kind;
    info.vocab_hash = raw.header.at("vocab_hash").get<std::string>();
    info.num_parameters = raw.header.at("params").size();
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad checkpoint header: " + e.what());
  }
  return info;
}

Model Model::load(const std::filesystem::path& path, const Vocabulary* expected) {
  const auto raw = read_raw(path, true);
  try {
    const ModelConfig config = config_from(raw.header.at("config"));
    const std::string hash = raw.header.at("vocab_hash").get<std::string>();
    const auto vpath = vocabulary_path(path);
    if (!std::filesystem::exists(vpath)) {
      throw Error("vocabulary file " + vpath.string() + " is missing");
    }
    Vocabulary vocab = Vocabulary::from_tokens(read_lines(vpath));
    if (vocab.hash() != hash) {
      throw Error("vocabulary hash mismatch: " + vpath.string() + " hashes to " + vocab.hash() +
                  " but the checkpoint was trained with " + hash +
                  "; rebuild the vocabulary or retrain the model");
    }
    if (expected && expected->hash() != hash) {
      throw Error("vocabulary hash mismatch: the checkpoint was trained with " + hash +
                  " but the supplied vocabulary hashes to " + expected->hash() +
                  "; rebuild the vocabulary or retrain the model");
    }
    std::vector<char32_t> cps;
    for (auto c : raw.header.at("chars")) cps.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
    Model m(config, std::move(vocab), CharVocabulary::from_code_points(cps), 0);
    const auto& plist = raw.header.at("params");
    if (plist.size() != m.params().all().size()) {
      throw Error("checkpoint has " + std::to_string(plist.size()) + " parameters, model expects " +
                  std::to_string(m.params().all().size()));
    }
    std::size_t off = 0;
    for (const auto& pj : plist) {
      const auto name = pj.at("name").get<std::string>();
      auto& p = m.params().get(name);
      const auto rows = pj.at("rows").get<Eigen::Index>(), cols = pj.at("cols").get<Eigen::Index>();
      if (rows != p.value.rows() || cols != p.value.cols()) {
        throw Error("parameter " + name + " has shape " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " in the checkpoint");
      }
      std::memcpy(p.value.data(), raw.data.data() + off,
                  static_cast<std::size_t>(rows * cols) * sizeof(double));
      off += static_cast<std::size_t>(rows * cols);
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad checkpoint header: " + e.what());
  }
}

}  // namespace matscire
