#include "matscire/corpus_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "matscire/tokenizer.hpp"

namespace matscire {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::vector<std::string> split_spaces(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string json_string_or_scalar(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

int get_int(const json& obj, const char* key, std::optional<int> fallback = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw Error(std::string("missing field '") + key + "'");
  }
  if (!it->is_number_integer()) throw Error(std::string("field '") + key + "' is not an integer");
  return it->get<int>();
}

std::string get_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  auto out = open_out(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  finish(out, path);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string to_structured_line(const AnnotatedSentence& annotated) {
  const Sentence& s = annotated.sentence;
  ordered_json rec;
  rec["id"] = s.id;
  rec["docId"] = s.doc_id;
  rec["sentText"] = join_tokens(s.tokens, 0, s.tokens.size());
  ordered_json mentions = ordered_json::array();
  for (const auto& t : annotated.triplets) {
    ordered_json m;
    m["arg1Text"] = span_surface(s, t.entity1);
    m["arg1StartIndex"] = t.entity1.begin;
    m["arg1EndIndex"] = t.entity1.end;
    m["relText"] = std::string(relation_name(t.relation));
    m["relStartIndex"] = t.relation_begin;
    m["relEndIndex"] = t.relation_end;
    m["arg2Text"] = span_surface(s, t.entity2);
    m["arg2OriginalText"] = t.entity2_original.value_or(span_surface(s, t.entity2));
    m["arg2StartIndex"] = t.entity2.begin;
    m["arg2EndIndex"] = t.entity2.end;
    mentions.push_back(std::move(m));
  }
  rec["relationMentions"] = std::move(mentions);
  rec["numTriples"] = annotated.triplets.size();
  return rec.dump(-1, ' ', false, json::error_handler_t::replace);
}

AnnotatedSentence parse_structured_line(std::string_view line) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed structured record: ") + e.what());
  }
  if (!rec.is_object()) throw Error("structured record is not a JSON object");
  AnnotatedSentence out;
  out.sentence = Sentence::from_tokens(get_int(rec, "id"), get_int(rec, "docId", 0),
                                       split_spaces(get_string(rec, "sentText")));
  const Sentence& s = out.sentence;
  if (s.tokens.empty()) throw Error("structured record has empty sentText");

  auto it = rec.find("relationMentions");
  if (it == rec.end() || !it->is_array()) throw Error("missing relationMentions array");
  for (const auto& m : *it) {
    Triplet t;
    const int b1 = get_int(m, "arg1StartIndex");
    const int e1 = get_int(m, "arg1EndIndex");
    const int b2 = get_int(m, "arg2StartIndex");
    const int e2 = get_int(m, "arg2EndIndex");
    t.entity1 = make_span(s, b1, e1);
    t.entity2 = make_span(s, b2, e2);
    if (m.contains("arg1Text") && m["arg1Text"].is_string() &&
        m["arg1Text"].get<std::string>() != t.entity1.surface) {
      throw Error("arg1Text '" + m["arg1Text"].get<std::string>() + "' does not match tokens " +
                  std::to_string(b1) + ".." + std::to_string(e1));
    }
    if (m.contains("arg2Text") && m["arg2Text"].is_string() &&
        m["arg2Text"].get<std::string>() != t.entity2.surface) {
      throw Error("arg2Text '" + m["arg2Text"].get<std::string>() + "' does not match tokens " +
                  std::to_string(b2) + ".." + std::to_string(e2));
    }
    auto rel = parse_relation(get_string(m, "relText"));
    if (!rel || *rel == Relation::kEot) {
      throw Error("unknown relation '" + get_string(m, "relText") + "'");
    }
    t.relation = *rel;
    t.relation_begin = get_int(m, "relStartIndex", -1);
    t.relation_end = get_int(m, "relEndIndex", -1);
    if (auto o = m.find("arg2OriginalText"); o != m.end() && !o->is_null()) {
      t.entity2_original = json_string_or_scalar(*o);
    }
    out.triplets.push_back(std::move(t));
  }
  const int declared = get_int(rec, "numTriples", static_cast<int>(out.triplets.size()));
  if (declared != static_cast<int>(out.triplets.size())) {
    throw Error("numTriples is " + std::to_string(declared) + " but relationMentions has " +
                std::to_string(out.triplets.size()) + " entries");
  }
  return out;
}

void write_structured(std::span<const AnnotatedSentence> annotated,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& a : annotated) out << to_structured_line(a) << '\n';
  finish(out, path);
}

std::vector<AnnotatedSentence> read_structured(const std::filesystem::path& path) {
  std::vector<AnnotatedSentence> out;
  int lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse_structured_line(line));
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_pointer_line(std::span<const PointerRecord> records) {
  std::string line;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (i) line += " | ";
    line += std::to_string(r.b1) + ' ' + std::to_string(r.e1) + ' ' + std::to_string(r.b2) + ' ' +
            std::to_string(r.e2) + ' ' + std::string(relation_name(r.relation));
  }
  return line;
}

std::vector<PointerRecord> parse_pointer_line(std::string_view line) {
  std::vector<PointerRecord> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t bar = line.find('|', start);
    std::string_view part =
        line.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    std::string cleaned(part);
    for (char& c : cleaned) {
      if (c == '<' || c == '>') c = ' ';
    }
    auto fields = split_spaces(cleaned);
    if (!fields.empty()) {
      if (fields.size() != 5) {
        throw Error("pointer record '" + std::string(part) + "' does not have 5 fields");
      }
      PointerRecord r;
      try {
        r.b1 = std::stoi(fields[0]);
        r.e1 = std::stoi(fields[1]);
        r.b2 = std::stoi(fields[2]);
        r.e2 = std::stoi(fields[3]);
      } catch (const std::exception&) {
        throw Error("pointer record '" + std::string(part) + "' has non-integer indices");
      }
      auto rel = parse_relation(fields[4]);
      if (!rel || *rel == Relation::kEot) throw Error("unknown relation '" + fields[4] + "'");
      r.relation = *rel;
      if (r.b1 > r.e1 || r.b2 > r.e2 || r.b1 < 0 || r.b2 < 0) {
        throw Error("pointer record '" + std::string(part) + "' has begin > end");
      }
      out.push_back(r);
    } else if (bar != std::string_view::npos) {
      throw Error("empty pointer record in '" + std::string(line) + "'");
    }
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

SentPointerPaths sent_pointer_paths(const std::filesystem::path& basepath) {
  SentPointerPaths p;
  p.sent = basepath;
  p.sent += ".sent";
  p.pointer = basepath;
  p.pointer += ".pointer";
  return p;
}

SentPointerPaths write_sent_pointer(std::span<const AnnotatedSentence> annotated,
                                    const std::filesystem::path& basepath) {
  const auto paths = sent_pointer_paths(basepath);
  auto sent = open_out(paths.sent);
  auto pointer = open_out(paths.pointer);
  for (const auto& a : annotated) {
    std::vector<PointerRecord> recs;
    for (const auto& t : a.triplets) {
      check_span(a.sentence, t.entity1.begin, t.entity1.end);
      check_span(a.sentence, t.entity2.begin, t.entity2.end);
      recs.push_back(PointerRecord::from_triplet(t));
    }
    sent << join_tokens(a.sentence.tokens, 0, a.sentence.tokens.size()) << '\n';
    pointer << format_pointer_line(recs) << '\n';
  }
  finish(sent, paths.sent);
  finish(pointer, paths.pointer);
  return paths;
}

std::vector<AnnotatedSentence> read_sent_pointer(const std::filesystem::path& basepath) {
  const auto paths = sent_pointer_paths(basepath);
  const auto sents = read_lines(paths.sent);
  const auto pointers = read_lines(paths.pointer);
  if (sents.size() != pointers.size()) {
    throw Error(paths.sent.string() + " has " + std::to_string(sents.size()) + " lines but " +
                paths.pointer.string() + " has " + std::to_string(pointers.size()));
  }
  std::vector<AnnotatedSentence> out;
  for (std::size_t k = 0; k < sents.size(); ++k) {
    AnnotatedSentence a;
    a.sentence = Sentence::from_tokens(static_cast<int>(k), 0, split_spaces(sents[k]));
    if (a.sentence.tokens.empty()) {
      throw Error(paths.sent.string() + ":" + std::to_string(k + 1) + ": empty sentence");
    }
    try {
      for (const auto& r : parse_pointer_line(pointers[k])) {
        a.triplets.push_back(make_triplet(a.sentence, r));
      }
    } catch (const Error& e) {
      throw Error(paths.pointer.string() + ":" + std::to_string(k + 1) + ": " + e.what());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<BatteryRecord> read_battery_records(const std::filesystem::path& path,
                                                RecordIngestStats* stats) {
  RecordIngestStats local;
  RecordIngestStats& st = stats ? *stats : local;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open records file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<json> objects;
  const auto first = content.find_first_not_of(" \t\r\n");
  bool parsed_array = false;
  if (first != std::string::npos && content[first] == '[') {
    try {
      json arr = json::parse(content);
      for (auto& o : arr) objects.push_back(std::move(o));
      st.lines += arr.size();
      parsed_array = true;
    } catch (const json::exception&) {
    }
  }
  if (!parsed_array) {
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ++st.lines;
      try {
        objects.push_back(json::parse(line));
      } catch (const json::exception&) {
        ++st.malformed;
      }
    }
  }

  std::vector<BatteryRecord> out;
  for (const auto& o : objects) {
    if (!o.is_object()) {
      ++st.malformed;
      continue;
    }
    std::map<std::string, std::string> fields;
    for (auto it = o.begin(); it != o.end(); ++it) fields[it.key()] = json_string_or_scalar(*it);
    auto r = parse_battery_record(fields);
    if (r.record) {
      ++st.accepted;
      out.push_back(std::move(*r.record));
    } else {
      ++st.rejected[r.rejection];
    }
  }
  return out;
}

Article read_article(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open article " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("cannot parse article " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error("article " + path.string() + " is not a JSON object");
  const json& meta = doc.contains("metadata") && doc["metadata"].is_object() ? doc["metadata"] : doc;
  Article a;
  a.id = doc.contains("id") ? json_string_or_scalar(doc["id"]) : path.stem().string();
  if (meta.contains("title")) a.title = json_string_or_scalar(meta["title"]);
  if (meta.contains("abstractText")) a.abstract_text = json_string_or_scalar(meta["abstractText"]);
  if (meta.contains("sections")) {
    if (!meta["sections"].is_array()) {
      throw Error("article " + path.string() + ": 'sections' is not an array");
    }
    for (const auto& sec : meta["sections"]) {
      if (sec.is_object() && sec.contains("text")) {
        a.section_texts.push_back(json_string_or_scalar(sec["text"]));
      }
    }
  }
  return a;
}

std::vector<Sentence> article_sentences(const Article& article, int doc_id, int first_id) {
  std::vector<Sentence> out;
  int next = first_id;
  auto add_text = [&](const std::string& text) {
    for (const auto& s : split_sentences(text)) {
      std::vector<std::string> tokens;
      try {
        tokens = tokenize(s);
      } catch (const Error&) {
        continue;
      }
      out.push_back(Sentence::from_tokens(next++, doc_id, std::move(tokens)));
    }
  };
  add_text(article.title);
  add_text(article.abstract_text);
  for (const auto& t : article.section_texts) add_text(t);
  return out;
}

}  // namespace matscire
