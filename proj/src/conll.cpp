#include "eertag/conll.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "eertag/error.hpp"

namespace eertag {

void ColumnFormatConfig::validate() const {
  if (token_column < 0) fail(ErrorCode::invalid_argument, "token_column must be >= 0");
  if (tag_column >= 0 && tag_column == token_column)
    fail(ErrorCode::invalid_argument, "token and tag columns must differ");
  if (mode == CorpusMode::both && observed_column < 0)
    fail(ErrorCode::invalid_argument, "mode 'both' needs an observed_column");
  if (observed_column >= 0 && observed_column == token_column)
    fail(ErrorCode::invalid_argument, "token and observed columns must differ");
}

namespace {

std::vector<std::string> split_fields(const std::string& line, bool tab_separated) {
  std::vector<std::string> fields;
  if (tab_separated) {
    std::size_t start = 0;
    for (;;) {
      std::size_t pos = line.find('\t', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
  } else {
    std::istringstream in(line);
    std::string field;
    while (in >> field) fields.push_back(field);
  }
  return fields;
}

struct RawSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;      // gold-or-observed column
  std::vector<std::string> observed;  // only for CorpusMode::both
  long first_line = 0;
};

const std::string& field_at(const std::vector<std::string>& fields, int column,
                            long line_no) {
  int idx = column < 0 ? static_cast<int>(fields.size()) - 1 : column;
  if (idx < 0 || idx >= static_cast<int>(fields.size())) {
    fail(ErrorCode::parse_error,
         "line " + std::to_string(line_no) + ": expected at least " +
             std::to_string(idx + 1) + " fields, found " +
             std::to_string(fields.size()));
  }
  return fields[static_cast<std::size_t>(idx)];
}

int parse_biluo_tag(const std::string& text, const TagSet& tagset, long line_no) {
  int tag = tagset.index_of(text);
  if (tag < 0) {
    fail(ErrorCode::parse_error,
         "line " + std::to_string(line_no) + ": unknown tag '" + text + "'");
  }
  return tag;
}

// "B-PER" -> (begin, class). Accepts O; anything else must be B-c or I-c
// with a known class.
std::pair<char, int> parse_bio_tag(const std::string& text, const TagSet& tagset,
                                   long line_no) {
  if (text == "O") return {'O', -1};
  if (text.size() < 3 || (text[0] != 'B' && text[0] != 'I') || text[1] != '-') {
    fail(ErrorCode::parse_error,
         "line " + std::to_string(line_no) + ": unknown tag '" + text + "'");
  }
  std::string cls = text.substr(2);
  for (int c = 0; c < tagset.num_classes(); ++c) {
    if (tagset.class_name(c) == cls) return {text[0], c};
  }
  fail(ErrorCode::parse_error,
       "line " + std::to_string(line_no) + ": unknown entity class '" + cls + "'");
}

std::vector<int> bio_strings_to_biluo(const std::vector<std::string>& bio,
                                      const TagSet& tagset, long first_line) {
  // 1) parse with the orphan-I repair, 2) spans, 3) BILUO.
  std::vector<Span> spans;
  int open_class = -1;
  int open_start = 0;
  auto close = [&](int end) {
    spans.push_back({open_start, end, open_class});
    open_class = -1;
  };
  for (int i = 0; i < static_cast<int>(bio.size()); ++i) {
    auto [role, cls] = parse_bio_tag(bio[i], tagset, first_line + i);
    if (role == 'O') {
      if (open_class >= 0) close(i);
    } else if (role == 'B' || (role == 'I' && open_class != cls)) {
      // A fresh B, or an orphan I (wrong class or no open span): starts a span.
      if (open_class >= 0) close(i);
      open_class = cls;
      open_start = i + 1;
    }
    // I continuing the open class extends the span; nothing to do.
  }
  if (open_class >= 0) close(static_cast<int>(bio.size()));
  return spans_to_tags(spans, static_cast<int>(bio.size()), tagset);
}

std::vector<int> gold_column_to_tags(const RawSentence& raw, const TagSet& tagset,
                                     TagScheme scheme) {
  if (scheme == TagScheme::bio) {
    return bio_strings_to_biluo(raw.tags, tagset, raw.first_line);
  }
  std::vector<int> tags;
  tags.reserve(raw.tags.size());
  for (std::size_t i = 0; i < raw.tags.size(); ++i)
    tags.push_back(parse_biluo_tag(raw.tags[i], tagset, raw.first_line + static_cast<long>(i)));
  try {
    tags_to_spans(tags, tagset);
  } catch (const Error& e) {
    fail(ErrorCode::parse_error,
         "near line " + std::to_string(raw.first_line) + ": " + e.what());
  }
  return tags;
}

AnnotatedSentence finish_sentence(const RawSentence& raw, const TagSet& tagset,
                                  const ColumnFormatConfig& config) {
  AnnotatedSentence s;
  s.sentence.tokens = raw.tokens;
  const int n = static_cast<int>(raw.tokens.size());

  auto observe_column = [&](const std::vector<std::string>& column) {
    for (int i = 0; i < n; ++i) {
      if (column[i] == kLatentTag) continue;
      s.observed.observe(i + 1, parse_biluo_tag(column[i], tagset,
                                                raw.first_line + i));
    }
  };

  switch (config.mode) {
    case CorpusMode::gold:
    case CorpusMode::raw: {
      std::vector<int> gold = gold_column_to_tags(raw, tagset, config.scheme);
      for (int i = 0; i < n; ++i) {
        if (config.mode == CorpusMode::raw || gold[i] != tagset.o_index())
          s.observed.observe(i + 1, gold[i]);
      }
      s.gold_tags = std::move(gold);
      break;
    }
    case CorpusMode::partial:
      observe_column(raw.tags);
      break;
    case CorpusMode::both: {
      std::vector<int> gold = gold_column_to_tags(raw, tagset, config.scheme);
      s.gold_tags = std::move(gold);
      observe_column(raw.observed);
      break;
    }
  }
  return s;
}

}  // namespace

Dataset read_corpus(const std::string& path, const ColumnFormatConfig& config,
                    const TagSet& tagset) {
  config.validate();
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path);

  Dataset dataset{tagset, {}};
  Document current_doc;
  RawSentence raw;
  bool saw_docstart = false;
  long line_no = 0;
  int doc_counter = 0;

  auto flush_sentence = [&]() {
    if (raw.tokens.empty()) return;
    current_doc.sentences.push_back(finish_sentence(raw, tagset, config));
    raw = RawSentence{};
  };
  auto flush_document = [&]() {
    flush_sentence();
    if (!current_doc.sentences.empty()) {
      char id[32];
      std::snprintf(id, sizeof(id), "doc-%04d", doc_counter++);
      current_doc.id = id;
      dataset.documents.push_back(std::move(current_doc));
      current_doc = Document{};
    }
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (config.tab_separated &&
                         line.find_first_not_of('\t') == std::string::npos)) {
      flush_sentence();
      if (config.doc_per_block && !saw_docstart) flush_document();
      continue;
    }
    std::vector<std::string> fields = split_fields(line, config.tab_separated);
    const std::string& token = field_at(fields, config.token_column, line_no);
    if (token == config.docstart_marker) {
      saw_docstart = true;
      flush_document();
      continue;
    }
    if (raw.tokens.empty()) raw.first_line = line_no;
    raw.tokens.push_back(token);
    raw.tags.push_back(field_at(fields, config.tag_column, line_no));
    if (config.mode == CorpusMode::both)
      raw.observed.push_back(field_at(fields, config.observed_column, line_no));
  }
  flush_document();
  return dataset;
}

void write_corpus(const Dataset& dataset, const std::string& path,
                  const ColumnFormatConfig& config) {
  config.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_failure, "cannot open " + path + " for writing");
  const char sep = config.tab_separated ? '\t' : ' ';
  const TagSet& tagset = dataset.tagset;

  for (const auto& doc : dataset.documents) {
    out << config.docstart_marker << sep << "O\n\n";
    for (const auto& s : doc.sentences) {
      for (int i = 0; i < s.length(); ++i) {
        out << s.sentence.tokens[i];
        auto observed_string = [&]() -> std::string {
          auto it = s.observed.observations.find(i + 1);
          return it == s.observed.observations.end() ? kLatentTag
                                                     : tagset.name(it->second);
        };
        switch (config.mode) {
          case CorpusMode::gold:
          case CorpusMode::raw:
            if (!s.gold_tags)
              fail(ErrorCode::missing_gold,
                   "cannot write gold column: sentence has no gold tags");
            out << sep << tagset.name((*s.gold_tags)[i]);
            break;
          case CorpusMode::partial:
            out << sep << observed_string();
            break;
          case CorpusMode::both:
            if (!s.gold_tags)
              fail(ErrorCode::missing_gold,
                   "cannot write gold column: sentence has no gold tags");
            out << sep << tagset.name((*s.gold_tags)[i]) << sep
                << observed_string();
            break;
        }
        out << '\n';
      }
      out << '\n';
    }
  }
  if (!out) fail(ErrorCode::io_failure, "write failed for " + path);
}

std::vector<std::string> scan_classes(const std::string& path,
                                      const ColumnFormatConfig& config) {
  config.validate();
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path);
  std::set<std::string> classes;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line, config.tab_separated);
    if (fields.empty()) continue;
    const std::string& token = field_at(fields, config.token_column, line_no);
    if (token == config.docstart_marker) continue;
    const std::string& tag = field_at(fields, config.tag_column, line_no);
    if (tag == "O" || tag == kLatentTag) continue;
    std::size_t dash = tag.find('-');
    if (dash == std::string::npos || dash + 1 >= tag.size()) {
      fail(ErrorCode::parse_error,
           "line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
    }
    classes.insert(tag.substr(dash + 1));
  }
  return {classes.begin(), classes.end()};
}

std::vector<int> bio_to_biluo(const std::vector<std::string>& bio_tags,
                              const TagSet& tagset) {
  return bio_strings_to_biluo(bio_tags, tagset, 1);
}

}  // namespace eertag
