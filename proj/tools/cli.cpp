#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "matscire/corpus.hpp"
#include "matscire/corpus_io.hpp"
#include "matscire/evaluator.hpp"
#include "matscire/hashing.hpp"
#include "matscire/model.hpp"
#include "matscire/splits.hpp"
#include "matscire/tokenizer.hpp"
#include "matscire/trainer.hpp"

namespace matscire::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Bad flags or missing inputs; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kOutputRootEnv = "MATSCIRE_OUTPUT_ROOT";

fs::path output_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) return fs::path(root) / path;
  }
  return path;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["version"] = "0.1.0";
    j_["config"] = json::object();
    j_["inputs"] = json::object();
    j_["outputs"] = json::array();
    j_["timestamps"] = {{"started_at", timestamp()}};
  }
  json& operator[](const char* key) { return j_[key]; }
  void config(const std::string& key, json value) { j_["config"][key] = std::move(value); }
  void input(const fs::path& p) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      json d = json::object();
      for (const auto& f : files) d[f.filename().string()] = sha256_file(f);
      j_["inputs"][p.string()] = std::move(d);
    } else {
      j_["inputs"][p.string()] = sha256_file(p);
    }
  }
  void output(const fs::path& p) { j_["outputs"].push_back(p.string()); }
  void write(const fs::path& path) {
    j_["timestamps"]["finished_at"] = timestamp();
    j_["timestamps"]["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text_file(path, j_.dump(2) + "\n");
  }

 private:
  json j_;
  std::chrono::steady_clock::time_point start_;
};

json relation_counts_json(std::span<const AnnotatedSentence> data) {
  const auto c = relation_counts(data);
  json j = json::object();
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    j[std::string(relation_name(kPropertyRelations[i]))] = c[i];
  }
  return j;
}

std::vector<AnnotatedSentence> read_corpus(const std::string& in) {
  fs::path p(in);
  if (fs::is_directory(p)) p /= "corpus.jsonl";
  require_file(p, "corpus");
  return read_structured(p);
}

// ---- model / training flags ----

struct ModelOptions {
  std::string decoder = "pointer";
  int word_dim = 100;
  int char_dim = 25;
  int char_features = 50;
  int pointer_hidden = -1;
  int relation_dim = 100;
  int max_steps = 10;
  TrainConfig train;
};

void add_model_options(CLI::App* app, ModelOptions& o) {
  app->add_option("--decoder", o.decoder, "Decoder: pointer or word")->capture_default_str();
  app->add_option("--lr", o.train.learning_rate, "Learning rate")->capture_default_str();
  app->add_option("--dropout", o.train.dropout, "Dropout rate")->capture_default_str();
  app->add_option("--hidden", o.train.hidden_dim, "Hidden size")->capture_default_str();
  app->add_option("--epochs", o.train.num_epochs, "Training epochs")->capture_default_str();
  app->add_option("--batch", o.train.batch_size, "Batch size")->capture_default_str();
  app->add_option("--patience", o.train.patience, "Early-stopping patience (0 = off)")
      ->capture_default_str();
  app->add_option("--clip", o.train.clip_norm, "Gradient norm clip (0 = off)")->capture_default_str();
  app->add_option("--word-dim", o.word_dim, "Word embedding size")->capture_default_str();
  app->add_option("--char-dim", o.char_dim, "Character embedding size")->capture_default_str();
  app->add_option("--char-features", o.char_features, "Character CNN filters")->capture_default_str();
  app->add_option("--pointer-hidden", o.pointer_hidden, "Pointer BiLSTM size (default hidden/2)");
  app->add_option("--relation-dim", o.relation_dim, "Relation embedding size")->capture_default_str();
  app->add_option("--max-steps", o.max_steps, "Maximum decoding steps")->capture_default_str();
  app->add_flag("!--no-teacher-forcing", o.train.teacher_forcing, "Feed predicted tuples in training");
}

// Every configuration problem at once.
ModelConfig model_config(const ModelOptions& o, std::vector<std::string>& problems) {
  ModelConfig mc;
  try {
    mc.kind = parse_decoder_kind(o.decoder);
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  mc.encoder.word_dim = o.word_dim;
  mc.encoder.char_dim = o.char_dim;
  mc.encoder.char_feature_dim = o.char_features;
  mc.decoder.relation_dim = o.relation_dim;
  mc.decoder.max_steps = o.max_steps;
  apply_train_config(mc, o.train);
  if (o.pointer_hidden >= 0) mc.decoder.pointer_hidden = o.pointer_hidden;
  for (auto& p : o.train.problems()) problems.push_back(p);
  for (auto& p : mc.problems()) {
    if (std::find(problems.begin(), problems.end(), p) == problems.end()) problems.push_back(p);
  }
  return mc;
}

json train_config_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"optimizer", t.optimizer},
          {"dropout", t.dropout},             {"hidden_dim", t.hidden_dim},
          {"num_epochs", t.num_epochs},       {"batch_size", t.batch_size},
          {"seed", t.seed},                   {"teacher_forcing", t.teacher_forcing},
          {"patience", t.patience},           {"clip_norm", t.clip_norm}};
}

void echo_config(std::ostream& out, const TrainConfig& t, const ModelConfig& mc) {
  out << "config: learning_rate=" << t.learning_rate << " optimizer=" << t.optimizer
      << " dropout=" << t.dropout << " hidden_dim=" << t.hidden_dim
      << " num_epochs=" << t.num_epochs << " batch_size=" << t.batch_size << " seed=" << t.seed
      << " decoder=" << decoder_kind_name(mc.kind) << "\n";
}

void throw_problems(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw UsageError(msg);
}

// ---- build-corpus ----

struct BuildOptions {
  std::string records, articles, out, indicators;
  int window = 8;
};

int cmd_build_corpus(const BuildOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.records, "records file");
  if (!fs::is_directory(o.articles)) throw UsageError("articles directory not found: " + o.articles);
  if (o.window < 1) throw UsageError("--window must be positive");
  if (!o.indicators.empty()) require_file(o.indicators, "indicator lexicon");
  Manifest m("build-corpus");
  m.config("window", o.window);
  m.config("indicators", o.indicators.empty() ? json("default") : json(o.indicators));
  m.input(o.records);
  m.input(o.articles);
  if (!o.indicators.empty()) m.input(o.indicators);

  RecordIngestStats st;
  const auto records = read_battery_records(o.records, &st);
  std::vector<CandidateTriplet> cands;
  for (const auto& r : records) cands.push_back(make_candidate(r));
  cands = deduplicate(std::move(cands));
  const CandidateIndex index(cands);
  const IndicatorLexicon lex =
      o.indicators.empty() ? IndicatorLexicon::defaults() : IndicatorLexicon::load(o.indicators);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.articles)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) err << "warning: no article files in " << o.articles << "\n";

  std::vector<AnnotatedSentence> corpus;
  int next_id = 0;
  std::size_t scanned = 0;
  for (std::size_t d = 0; d < files.size(); ++d) {
    const Article art = read_article(files[d]);
    const auto sentences = article_sentences(art, static_cast<int>(d), next_id);
    next_id += static_cast<int>(sentences.size());
    scanned += sentences.size();
    for (const auto& s : sentences) {
      const auto c = index.lookup(s);
      if (c.empty()) continue;
      if (auto a = distant_supervise(s, c, lex, {o.window})) corpus.push_back(std::move(*a));
    }
  }

  const fs::path dir = output_path(o.out);
  const fs::path structured = dir / "corpus.jsonl";
  write_structured(corpus, structured);
  const auto sp = write_sent_pointer(corpus, dir / "corpus");
  json stats = {{"articles", files.size()},
                {"sentences_scanned", scanned},
                {"matched_sentences", corpus.size()},
                {"triplets", triplet_count(corpus)},
                {"relations", relation_counts_json(corpus)},
                {"records",
                 {{"lines", st.lines},
                  {"malformed", st.malformed},
                  {"accepted", st.accepted},
                  {"rejected", st.rejected}}},
                {"candidates", cands.size()}};
  write_text_file(dir / "stats.json", stats.dump(2) + "\n");
  m["stats"] = stats;
  for (const auto& p : {structured, sp.sent, sp.pointer, dir / "stats.json"}) m.output(p);
  m.write(dir / "manifest.json");

  if (st.malformed) err << "warning: skipped " << st.malformed << " malformed record line(s)\n";
  for (const auto& [why, n] : st.rejected) err << "note: rejected " << n << " record(s): " << why << "\n";
  out << "articles: " << files.size() << "\n"
      << "sentences scanned: " << scanned << "\n"
      << "matched sentences: " << corpus.size() << "\n"
      << "triplets: " << triplet_count(corpus) << "\n";
  const auto rc = relation_counts(corpus);
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    out << "  " << relation_name(kPropertyRelations[i]) << ": " << rc[i] << "\n";
  }
  return kOk;
}

// ---- split ----

struct SplitOptions {
  std::string in, out;
  std::uint64_t seed = 13;
  int folds = 0;
  double train = 0.7, dev = 0.1, test = 0.2;
};

json ids_json(std::span<const AnnotatedSentence> data) {
  json a = json::array();
  for (const auto& x : data) a.push_back(x.sentence.id);
  return a;
}

int cmd_split(const SplitOptions& o, std::ostream& out) {
  const auto data = read_corpus(o.in);
  Manifest m("split");
  m.config("seed", o.seed);
  m.input(fs::is_directory(o.in) ? fs::path(o.in) / "corpus.jsonl" : fs::path(o.in));
  const fs::path dir = output_path(o.out);
  auto write_split = [&](const DatasetSplit& s, const fs::path& d) {
    for (auto [name, part] : {std::pair{"train", &s.train}, std::pair{"dev", &s.dev},
                              std::pair{"test", &s.test}}) {
      const fs::path p = d / (std::string(name) + ".jsonl");
      write_structured(*part, p);
      m.output(p);
    }
  };
  if (o.folds > 0) {
    m.config("folds", o.folds);
    json folds = json::array();
    for (int f = 0; f < o.folds; ++f) {
      const auto s = split_fold(data, f, o.folds, o.seed);
      write_split(s, dir / ("fold" + std::to_string(f)));
      folds.push_back({{"fold", f},
                       {"train", s.train.size()},
                       {"dev", s.dev.size()},
                       {"test", s.test.size()},
                       {"test_ids", ids_json(s.test)}});
      out << "fold " << f << ": train " << s.train.size() << " dev " << s.dev.size() << " test "
          << s.test.size() << "\n";
    }
    m["folds"] = std::move(folds);
  } else {
    const SplitFractions fr{o.train, o.dev, o.test};
    m.config("fractions", {o.train, o.dev, o.test});
    const auto s = split_dataset(data, fr, o.seed);
    write_split(s, dir);
    m["sizes"] = {{"train", s.train.size()}, {"dev", s.dev.size()}, {"test", s.test.size()}};
    out << "train " << s.train.size() << " dev " << s.dev.size() << " test " << s.test.size()
        << "\n";
  }
  m.write(dir / "manifest.json");
  return kOk;
}

// ---- kshot ----

struct KShotOptions {
  std::string in, out;
  int k = 5;
  std::uint64_t seed = 13;
};

int cmd_kshot(const KShotOptions& o, std::ostream& out) {
  const auto data = read_corpus(o.in);
  if (o.k < 1) throw UsageError("--k must be at least 1");
  Manifest m("kshot");
  m.config("k", o.k);
  m.config("seed", o.seed);
  m.input(o.in);
  const auto sample = sample_k_shot(data, o.k, o.seed);
  const fs::path p = output_path(o.out);
  write_structured(sample, p);
  m.output(p);
  m["sentences"] = sample.size();
  m["triplets"] = triplet_count(sample);
  m["relations"] = relation_counts_json(sample);
  auto mp = p;
  mp += ".manifest.json";
  m.write(mp);
  out << "selected " << triplet_count(sample) << " triplets in " << sample.size() << " sentences\n";
  return kOk;
}

// ---- train ----

struct TrainOptions {
  std::string train, dev, split, out;
  double fraction = 1.0;
  bool dry_run = false;
  ModelOptions model;
};

int cmd_train(TrainOptions o, std::ostream& out) {
  std::vector<std::string> problems;
  const ModelConfig mc = model_config(o.model, problems);
  if (!(o.fraction > 0.0 && o.fraction <= 1.0)) {
    problems.push_back("--fraction must lie in (0, 1], got " + std::to_string(o.fraction));
  }
  if (!o.split.empty()) {
    if (o.train.empty()) o.train = (fs::path(o.split) / "train.jsonl").string();
    if (o.dev.empty() && fs::exists(fs::path(o.split) / "dev.jsonl")) {
      o.dev = (fs::path(o.split) / "dev.jsonl").string();
    }
  }
  if (o.train.empty()) {
    problems.push_back("a training set is required (--train or --split)");
  } else if (!fs::is_regular_file(o.train)) {
    problems.push_back("training set not found: " + o.train);
  }
  if (!o.dev.empty() && !fs::is_regular_file(o.dev)) problems.push_back("dev set not found: " + o.dev);
  throw_problems(problems);

  echo_config(out, o.model.train, mc);
  auto full = read_structured(o.train);
  const std::vector<double> fr = {o.fraction};
  auto subset = nested_fraction_subsets(full, fr, o.model.train.seed).front();
  const auto dev = o.dev.empty() ? std::vector<AnnotatedSentence>{} : read_structured(o.dev);
  out << "train sentences: " << subset.size() << " of " << full.size() << "\n";

  Manifest m("train");
  m.config("train", train_config_json(o.model.train));
  m.config("model", json::parse(mc.to_json()));
  m.config("fraction", o.fraction);
  m["seed"] = o.model.train.seed;
  m.input(o.train);
  if (!o.dev.empty()) m.input(o.dev);
  m["train_size"] = subset.size();
  m["full_train_size"] = full.size();
  const fs::path ckpt = output_path(o.out);
  auto mpath = ckpt;
  mpath += ".manifest.json";

  Model model = Model::for_corpus(mc, subset, o.model.train.seed);
  m["vocab_size"] = model.vocabulary().size();
  m["vocab_hash"] = model.vocabulary().hash();
  if (o.dry_run) {
    m["dry_run"] = true;
    m.write(mpath);
    return kOk;
  }
  json epochs = json::array();
  std::string log;
  const auto result = train(model, subset, dev, o.model.train, [&](const EpochLog& l) {
    out << "epoch " << l.epoch << " loss " << l.train_loss;
    if (!std::isnan(l.dev_f1)) out << " dev_f1 " << l.dev_f1;
    out << "\n";
    epochs.push_back({{"epoch", l.epoch},
                      {"train_loss", l.train_loss},
                      {"dev_f1", std::isnan(l.dev_f1) ? json(nullptr) : json(l.dev_f1)}});
    json line = epochs.back();
    line["seconds"] = l.seconds;
    log += line.dump() + "\n";
  });
  model.save(ckpt);
  auto log_path = ckpt;
  log_path += ".log.jsonl";
  write_text_file(log_path, log);
  m.output(ckpt);
  m.output(vocabulary_path(ckpt));
  m.output(log_path);
  m["epochs"] = std::move(epochs);
  m["best_epoch"] = result.best_epoch;
  m["early_stopped"] = result.early_stopped;
  m.write(mpath);
  out << "checkpoint: " << ckpt.string() << "\n";
  return kOk;
}

// ---- evaluate ----

struct EvalOptions {
  std::string checkpoint, test, predictions, data, out, vocab;
  int folds = 0;
  std::uint64_t seed = 13;
  ModelOptions model;
};

int finish_report(const EvalReport& rep, Manifest& m, const fs::path& dir, std::ostream& out) {
  write_report_jsonl(rep, dir / "report.jsonl");
  const std::string table = render_table(rep);
  write_text_file(dir / "table.txt", table);
  m.output(dir / "report.jsonl");
  m.output(dir / "table.txt");
  m["runs"] = rep.n();
  m["macro_f1"] = rep.macro.mean.f1;
  m["weighted_f1"] = rep.weighted.mean.f1;
  m.write(dir / "manifest.json");
  out << table;
  return kOk;
}

int cmd_evaluate(const EvalOptions& o, std::ostream& out) {
  const fs::path dir = output_path(o.out);
  if (o.folds > 0) {
    if (o.data.empty()) throw UsageError("--folds needs --data");
    std::vector<std::string> problems;
    ModelConfig mc = model_config(o.model, problems);
    if (!o.checkpoint.empty()) {
      require_file(o.checkpoint, "checkpoint");
      mc = read_checkpoint_info(o.checkpoint).config;
    }
    throw_problems(problems);
    const auto data = read_corpus(o.data);
    Manifest m("evaluate");
    m.config("folds", o.folds);
    m.config("train", train_config_json(o.model.train));
    m.config("model", json::parse(mc.to_json()));
    m["seed"] = o.seed;
    m.input(fs::is_directory(o.data) ? fs::path(o.data) / "corpus.jsonl" : fs::path(o.data));
    const auto rep = five_run_protocol(data, training_factory(mc, o.model.train), o.seed, o.folds);
    json folds = json::array();
    for (std::size_t f = 0; f < rep.fold_test_ids.size(); ++f) {
      folds.push_back({{"fold", f}, {"test_ids", rep.fold_test_ids[f]}});
    }
    m["folds"] = std::move(folds);
    return finish_report(rep, m, dir, out);
  }

  if (o.test.empty()) throw UsageError("--test is required");
  require_file(o.test, "test set");
  const auto test = read_structured(o.test);
  Manifest m("evaluate");
  m.input(o.test);
  Predictor predict;
  std::optional<Model> model;
  std::map<int, std::vector<Triplet>> by_id;
  if (!o.predictions.empty()) {
    require_file(o.predictions, "predictions file");
    m.input(o.predictions);
    for (auto& a : read_structured(o.predictions)) by_id[a.sentence.id] = std::move(a.triplets);
    predict = [&by_id](const Sentence& s) {
      auto it = by_id.find(s.id);
      return it == by_id.end() ? std::vector<Triplet>{} : it->second;
    };
  } else {
    if (o.checkpoint.empty()) throw UsageError("--checkpoint or --predictions is required");
    require_file(o.checkpoint, "checkpoint");
    m.input(o.checkpoint);
    std::optional<Vocabulary> expected;
    if (!o.vocab.empty()) {
      require_file(o.vocab, "vocabulary");
      expected = Vocabulary::from_tokens(read_lines(o.vocab));
    }
    model.emplace(Model::load(o.checkpoint, expected ? &*expected : nullptr));
    predict = predictor(*model);
  }
  const auto rep = summarize({evaluate(test, predict)});
  return finish_report(rep, m, dir, out);
}

// ---- extract ----

struct ExtractOptions {
  std::string checkpoint, article, out;
};

int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  require_file(o.checkpoint, "checkpoint");
  require_file(o.article, "article");
  Manifest m("extract");
  m.input(o.checkpoint);
  m.input(o.article);
  const Model model = Model::load(o.checkpoint);
  std::vector<Sentence> sentences;
  if (fs::path(o.article).extension() == ".txt") {
    std::ifstream in(o.article);
    std::stringstream ss;
    ss << in.rdbuf();
    Article a;
    a.id = fs::path(o.article).stem().string();
    a.section_texts.push_back(ss.str());
    sentences = article_sentences(a, 0, 0);
  } else {
    sentences = article_sentences(read_article(o.article), 0, 0);
  }
  std::vector<AnnotatedSentence> found;
  std::string listing;
  for (const auto& s : sentences) {
    auto trip = model.predict(s);
    if (trip.empty()) continue;
    for (const auto& t : trip) {
      listing += t.entity1.surface + " | " + std::string(relation_name(t.relation)) + " | " +
                 t.entity2.surface + "\n";
    }
    found.push_back({s, std::move(trip)});
  }
  const fs::path dir = output_path(o.out);
  write_text_file(dir / "extracted.txt", listing);
  write_structured(found, dir / "extracted.jsonl");
  m.output(dir / "extracted.txt");
  m.output(dir / "extracted.jsonl");
  m["sentences"] = sentences.size();
  m["sentences_with_triplets"] = found.size();
  m["triplets"] = triplet_count(found);
  m.write(dir / "manifest.json");
  out << listing;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Materials-science triplet extraction: corpus building, training, evaluation"};
  app.set_config("--config", "", "Key-value config file ([section] per subcommand)");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  BuildOptions bo;
  auto* build = app.add_subcommand("build-corpus", "Distantly supervise sentences from records");
  build->add_option("--records", bo.records, "Battery records (JSON array or JSON lines)")->required();
  build->add_option("--articles", bo.articles, "Directory of parsed-article JSON files")->required();
  build->add_option("--out", bo.out, "Output directory")->required();
  build->add_option("--indicators", bo.indicators, "Relation indicator lexicon");
  build->add_option("--window", bo.window, "Maximum entity2 window")->capture_default_str();

  SplitOptions so;
  auto* split = app.add_subcommand("split", "Train/dev/test split or non-overlapping folds");
  split->add_option("--in", so.in, "Corpus file or build-corpus directory")->required();
  split->add_option("--out", so.out, "Output directory")->required();
  split->add_option("--seed", so.seed, "Shuffle seed")->capture_default_str();
  split->add_option("--folds", so.folds, "Write this many non-overlapping test folds");
  split->add_option("--train-frac", so.train)->capture_default_str();
  split->add_option("--dev-frac", so.dev)->capture_default_str();
  split->add_option("--test-frac", so.test)->capture_default_str();

  KShotOptions ko;
  auto* kshot = app.add_subcommand("kshot", "Sample exactly k triplets per relation");
  kshot->add_option("--in", ko.in, "Training corpus")->required();
  kshot->add_option("--out", ko.out, "Output corpus file")->required();
  kshot->add_option("--k", ko.k, "Triplets per relation")->required();
  kshot->add_option("--seed", ko.seed, "Sampling seed")->capture_default_str();

  TrainOptions to;
  auto* trn = app.add_subcommand("train", "Train a pointer-network or word-decoding model");
  trn->add_option("--train", to.train, "Training corpus");
  trn->add_option("--dev", to.dev, "Development corpus");
  trn->add_option("--split", to.split, "Directory holding train.jsonl and dev.jsonl");
  trn->add_option("--out", to.out, "Checkpoint path")->required();
  trn->add_option("--fraction", to.fraction, "Train on this fraction of the training set")
      ->capture_default_str();
  trn->add_option("--seed", to.model.train.seed, "Seed")->capture_default_str();
  trn->add_flag("--dry-run", to.dry_run, "Validate and echo the configuration only");
  add_model_options(trn, to.model);

  EvalOptions eo;
  auto* ev = app.add_subcommand("evaluate", "Exact-match evaluation");
  ev->add_option("--checkpoint", eo.checkpoint, "Model checkpoint");
  ev->add_option("--test", eo.test, "Test corpus");
  ev->add_option("--predictions", eo.predictions, "Score a prediction corpus instead of a model");
  ev->add_option("--vocab", eo.vocab, "Vocabulary the checkpoint must match");
  ev->add_option("--folds", eo.folds, "Run the k-fold protocol (trains one model per fold)");
  ev->add_option("--data", eo.data, "Corpus for --folds");
  ev->add_option("--seed", eo.seed, "Fold seed")->capture_default_str();
  ev->add_option("--out", eo.out, "Report directory")->required();
  add_model_options(ev, eo.model);

  ExtractOptions xo;
  auto* ex = app.add_subcommand("extract", "Extract triplets from a parsed article");
  ex->add_option("--checkpoint", xo.checkpoint, "Model checkpoint")->required();
  ex->add_option("--article", xo.article, "Parsed-article JSON (or plain .txt)")->required();
  ex->add_option("--out", xo.out, "Output directory")->required();

  std::vector<std::string> argv_store = {"matscire"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  eo.model.train.seed = eo.seed;

  try {
    if (build->parsed()) return cmd_build_corpus(bo, out, err);
    if (split->parsed()) return cmd_split(so, out);
    if (kshot->parsed()) return cmd_kshot(ko, out);
    if (trn->parsed()) return cmd_train(to, out);
    if (ev->parsed()) return cmd_evaluate(eo, out);
    if (ex->parsed()) return cmd_extract(xo, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kProcessingError;
  }
  return kUsageError;
}

}  // namespace matscire::cli
