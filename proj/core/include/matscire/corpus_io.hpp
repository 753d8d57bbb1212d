#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "matscire/corpus.hpp"
#include "matscire/types.hpp"

namespace matscire {

// ---- Structured records -------------------------------------------------
//
// One JSON object per line:
//   {"id", "docId", "sentText", "relationMentions": [{"arg1Text",
//    "arg1StartIndex", "arg1EndIndex", "relText", "relStartIndex",
//    "relEndIndex", "arg2Text", "arg2OriginalText", "arg2StartIndex",
//    "arg2EndIndex"}, ...], "numTriples"}
// Indices are 0-based inclusive token positions in the space-separated
// sentText.

std::string to_structured_line(const AnnotatedSentence& annotated);

// Throws Error on malformed JSON, index/surface inconsistencies or a
// numTriples mismatch.
AnnotatedSentence parse_structured_line(std::string_view line);

void write_structured(std::span<const AnnotatedSentence> annotated,
                      const std::filesystem::path& path);
std::vector<AnnotatedSentence> read_structured(const std::filesystem::path& path);

// ---- .sent / .pointer pairs ----------------------------------------------
//
// Line k of the .sent file holds the space-joined tokens of sentence k; line
// k of the .pointer file holds "b1 e1 b2 e2 Relation" records joined by
// " | ".

std::string format_pointer_line(std::span<const PointerRecord> records);
std::vector<PointerRecord> parse_pointer_line(std::string_view line);

struct SentPointerPaths {
  std::filesystem::path sent;
  std::filesystem::path pointer;
};

SentPointerPaths sent_pointer_paths(const std::filesystem::path& basepath);

SentPointerPaths write_sent_pointer(std::span<const AnnotatedSentence> annotated,
                                    const std::filesystem::path& basepath);
std::vector<AnnotatedSentence> read_sent_pointer(const std::filesystem::path& basepath);

// ---- Battery database records ---------------------------------------------

struct RecordIngestStats {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::map<std::string, std::size_t> rejected;  // reason -> count
  std::size_t accepted = 0;
};

// Reads a JSON array of objects or one JSON object per line. Malformed lines
// and rejected records are counted, not fatal.
std::vector<BatteryRecord> read_battery_records(const std::filesystem::path& path,
                                                RecordIngestStats* stats = nullptr);

// ---- Parsed articles ------------------------------------------------------

// Plain-text fields of a parsed scholarly article (title, abstractText and
// sections[].text as produced by the PDF parser).
struct Article {
  std::string id;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> section_texts;
};

Article read_article(const std::filesystem::path& path);

// Sentences of the title, abstract and sections, tokenized, with sequential
// ids starting at `first_id`.
std::vector<Sentence> article_sentences(const Article& article, int doc_id, int first_id);

// Writes `content` to `path`, surfacing the path and cause on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace matscire
