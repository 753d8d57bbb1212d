#include "matscire/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "matscire/corpus_io.hpp"

namespace matscire {

Counts MatchCounts::total() const {
  Counts t;
  for (const auto& c : per_relation) t += c;
  return t;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  for (std::size_t i = 0; i < per_relation.size(); ++i) per_relation[i] += o.per_relation[i];
  return *this;
}

namespace {

std::size_t rel_slot(Relation r) {
  if (r == Relation::kEot) throw Error("EOT cannot appear in an evaluated triplet");
  return static_cast<std::size_t>(relation_index(r));
}

}  // namespace

MatchCounts match(std::span<const Triplet> gold, std::span<const Triplet> pred) {
  MatchCounts out;
  std::map<Triplet::Key, int> unused;
  for (const auto& t : gold) {
    ++out.per_relation[rel_slot(t.relation)].gold;
    ++unused[t.key()];
  }
  for (const auto& t : pred) {
    auto& c = out.per_relation[rel_slot(t.relation)];
    ++c.predicted;
    auto it = unused.find(t.key());
    if (it != unused.end() && it->second > 0) {
      --it->second;
      ++c.correct;
    }
  }
  return out;
}

Prf precision_recall_f1(const Counts& c) {
  Prf m;
  if (c.predicted) m.precision = static_cast<double>(c.correct) / static_cast<double>(c.predicted);
  if (c.gold) m.recall = static_cast<double>(c.correct) / static_cast<double>(c.gold);
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Aggregate aggregate(std::span<const Prf> per_relation, std::span<const double> supports) {
  if (per_relation.size() != supports.size()) {
    throw Error("aggregate: " + std::to_string(per_relation.size()) + " metrics but " +
                std::to_string(supports.size()) + " supports");
  }
  double total = 0.0;
  int present = 0;
  for (double s : supports) {
    if (s < 0) throw Error("aggregate: negative support");
    if (s > 0) {
      total += s;
      ++present;
    }
  }
  if (total <= 0.0) throw Error("aggregate: zero total support");
  Aggregate a;
  for (std::size_t i = 0; i < supports.size(); ++i) {
    if (supports[i] <= 0) continue;
    const double w = supports[i] / total;
    a.weighted.precision += w * per_relation[i].precision;
    a.weighted.recall += w * per_relation[i].recall;
    a.weighted.f1 += w * per_relation[i].f1;
    a.macro.precision += per_relation[i].precision;
    a.macro.recall += per_relation[i].recall;
    a.macro.f1 += per_relation[i].f1;
  }
  a.macro.precision /= present;
  a.macro.recall /= present;
  a.macro.f1 /= present;
  return a;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty sequence");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double std_dev(std::span<const double> values) {
  if (values.size() < 2) throw Error("standard deviation needs at least 2 values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

RunMetrics metrics_from_counts(const MatchCounts& counts) {
  RunMetrics r;
  r.counts = counts;
  std::array<double, kNumPropertyRelations> support{};
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    r.per_relation[i] = precision_recall_f1(counts.per_relation[i]);
    support[i] = static_cast<double>(counts.per_relation[i].gold);
  }
  r.micro = precision_recall_f1(counts.total());
  if (counts.total().gold > 0) {
    const auto agg = aggregate(r.per_relation, support);
    r.weighted = agg.weighted;
    r.macro = agg.macro;
  }
  return r;
}

RunMetrics evaluate(std::span<const AnnotatedSentence> gold, const Predictor& predict) {
  MatchCounts total;
  for (const auto& a : gold) {
    const auto pred = predict(a.sentence);
    total += match(a.triplets, pred);
  }
  RunMetrics r = metrics_from_counts(total);
  r.sentences = gold.size();
  return r;
}

namespace {

PrfStats stats(const std::vector<Prf>& xs) {
  PrfStats s;
  std::vector<double> p, r, f;
  for (const auto& x : xs) {
    p.push_back(x.precision);
    r.push_back(x.recall);
    f.push_back(x.f1);
  }
  s.mean = {mean(p), mean(r), mean(f)};
  if (xs.size() >= 2) s.sd = Prf{std_dev(p), std_dev(r), std_dev(f)};
  return s;
}

}  // namespace

EvalReport summarize(std::vector<RunMetrics> runs) {
  if (runs.empty()) throw Error("no runs to summarise");
  EvalReport rep;
  rep.runs = std::move(runs);
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    std::vector<Prf> xs;
    for (const auto& r : rep.runs) xs.push_back(r.per_relation[i]);
    rep.per_relation[i] = stats(xs);
  }
  std::vector<Prf> w, m, mi;
  for (const auto& r : rep.runs) {
    w.push_back(r.weighted);
    m.push_back(r.macro);
    mi.push_back(r.micro);
  }
  rep.weighted = stats(w);
  rep.macro = stats(m);
  rep.micro = stats(mi);
  return rep;
}

EvalReport five_run_protocol(std::span<const AnnotatedSentence> dataset, const RunFactory& factory,
                             std::uint64_t seed, int num_folds) {
  std::vector<RunMetrics> runs;
  std::vector<std::vector<int>> ids;
  for (int f = 0; f < num_folds; ++f) {
    const DatasetSplit split = split_fold(dataset, f, num_folds, seed);
    const Predictor predict = factory(split);
    runs.push_back(evaluate(split.test, predict));
    std::vector<int> fold_ids;
    for (const auto& a : split.test) fold_ids.push_back(a.sentence.id);
    ids.push_back(std::move(fold_ids));
  }
  EvalReport rep = summarize(std::move(runs));
  rep.fold_test_ids = std::move(ids);
  return rep;
}

void write_report_jsonl(const EvalReport& report, const std::filesystem::path& path) {
  using nlohmann::ordered_json;
  std::string out;
  auto emit = [&](ordered_json j) { out += j.dump() + "\n"; };
  auto metric_lines = [&](ordered_json base, const Prf& p) {
    for (auto [name, v] : {std::pair{"precision", p.precision}, std::pair{"recall", p.recall},
                           std::pair{"f1", p.f1}}) {
      ordered_json j = base;
      j["metric"] = name;
      j["value"] = v;
      emit(j);
    }
  };
  for (std::size_t r = 0; r < report.runs.size(); ++r) {
    const auto& run = report.runs[r];
    for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
      const auto& c = run.counts.per_relation[i];
      metric_lines({{"run", r},
                    {"relation", relation_name(kPropertyRelations[i])},
                    {"correct", c.correct},
                    {"gold", c.gold},
                    {"predicted", c.predicted}},
                   run.per_relation[i]);
    }
    metric_lines({{"run", r}, {"relation", "weighted"}}, run.weighted);
    metric_lines({{"run", r}, {"relation", "macro"}}, run.macro);
    metric_lines({{"run", r}, {"relation", "micro"}}, run.micro);
  }
  auto agg_lines = [&](const std::string& rel, const PrfStats& s) {
    for (auto [name, m, sd] :
         {std::tuple{"precision", s.mean.precision, s.sd ? s.sd->precision : 0.0},
          std::tuple{"recall", s.mean.recall, s.sd ? s.sd->recall : 0.0},
          std::tuple{"f1", s.mean.f1, s.sd ? s.sd->f1 : 0.0}}) {
      ordered_json j{{"aggregate", true}, {"runs", report.n()}, {"relation", rel}, {"metric", name},
                     {"mean", m}};
      if (s.sd) {
        j["sd"] = sd;
      } else {
        j["sd"] = nullptr;
      }
      emit(j);
    }
  };
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    agg_lines(std::string(relation_name(kPropertyRelations[i])), report.per_relation[i]);
  }
  agg_lines("weighted", report.weighted);
  agg_lines("macro", report.macro);
  agg_lines("micro", report.micro);
  write_text_file(path, out);
}

std::string render_table(const EvalReport& report) {
  auto cell = [&](double m, const std::optional<Prf>& sd, double Prf::*field) {
    char buf[48];
    if (sd) {
      std::snprintf(buf, sizeof buf, "%.3f ± %.3f", m, (*sd).*field);
    } else {
      std::snprintf(buf, sizeof buf, "%.3f", m);
    }
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t w) {
    // '±' is two bytes but one column.
    std::size_t cols = 0;
    for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
    if (cols < w) s.append(w - cols, ' ');
    return s;
  };
  const std::size_t w0 = 22, w = 16;
  std::ostringstream os;
  os << pad("Relation", w0) << pad("Pr", w) << pad("Re", w) << "F1\n";
  auto row = [&](const std::string& name, const PrfStats& s) {
    os << pad(name, w0) << pad(cell(s.mean.precision, s.sd, &Prf::precision), w)
       << pad(cell(s.mean.recall, s.sd, &Prf::recall), w) << cell(s.mean.f1, s.sd, &Prf::f1)
       << "\n";
  };
  for (std::size_t i = 0; i < kNumPropertyRelations; ++i) {
    row(std::string(relation_name(kPropertyRelations[i])), report.per_relation[i]);
  }
  row("Weighted average", report.weighted);
  row("Macro average", report.macro);
  os << "(N = " << report.n() << ")\n";
  return os.str();
}

}  // namespace matscire
