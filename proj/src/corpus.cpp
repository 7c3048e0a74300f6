#include "eertag/corpus.hpp"

#include <algorithm>

#include "eertag/error.hpp"

namespace eertag {

namespace {

const char kRoleLetters[] = {'B', 'I', 'L', 'U'};

}  // namespace

TagSet::TagSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
  names_.reserve(4 * classes_.size() + 1);
  names_.push_back("O");
  for (const auto& cls : classes_) {
    if (cls.empty()) fail(ErrorCode::invalid_argument, "empty entity class name");
    for (char letter : kRoleLetters) {
      names_.push_back(std::string(1, letter) + "-" + cls);
    }
  }
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    if (!by_name_.emplace(names_[i], i).second) {
      fail(ErrorCode::invalid_argument, "duplicate entity class: " + names_[i]);
    }
  }
}

TagRole TagSet::role(int tag) const {
  if (tag == 0) return TagRole::o;
  switch ((tag - 1) % 4) {
    case 0: return TagRole::begin;
    case 1: return TagRole::inside;
    case 2: return TagRole::last;
    default: return TagRole::unit;
  }
}

int TagSet::entity_class(int tag) const {
  return tag == 0 ? -1 : (tag - 1) / 4;
}

int TagSet::tag_index(TagRole role, int cls) const {
  if (role == TagRole::o) return 0;
  int offset = 0;
  switch (role) {
    case TagRole::begin: offset = 0; break;
    case TagRole::inside: offset = 1; break;
    case TagRole::last: offset = 2; break;
    case TagRole::unit: offset = 3; break;
    default: break;
  }
  return 1 + 4 * cls + offset;
}

int TagSet::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

void ObservedTags::observe(int position, int tag) {
  if (position < 1) fail(ErrorCode::invalid_argument, "observation position must be >= 1");
  auto [it, inserted] = observations.emplace(position, tag);
  if (!inserted && it->second != tag) {
    fail(ErrorCode::invalid_argument,
         "conflicting observations at position " + std::to_string(position));
  }
}

long Dataset::token_count() const {
  long n = 0;
  for (const auto& doc : documents)
    for (const auto& s : doc.sentences) n += s.length();
  return n;
}

long Dataset::sentence_count() const {
  long n = 0;
  for (const auto& doc : documents) n += static_cast<long>(doc.sentences.size());
  return n;
}

bool Dataset::same_content(const Dataset& other) const {
  if (!(tagset == other.tagset)) return false;
  if (documents.size() != other.documents.size()) return false;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    if (documents[d].sentences != other.documents[d].sentences) return false;
  }
  return true;
}

std::vector<int> spans_to_tags(const std::vector<Span>& spans, int n,
                               const TagSet& tagset) {
  std::vector<Span> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Span& s = sorted[i];
    if (s.start < 1 || s.end < s.start || s.end > n) {
      fail(ErrorCode::invalid_argument,
           "span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
               "] out of range for length " + std::to_string(n));
    }
    if (s.entity_class < 0 || s.entity_class >= tagset.num_classes()) {
      fail(ErrorCode::invalid_argument, "span class out of range");
    }
    if (i > 0 && sorted[i - 1].end >= s.start) {
      fail(ErrorCode::invalid_argument,
           "overlapping spans [" + std::to_string(sorted[i - 1].start) + "," +
               std::to_string(sorted[i - 1].end) + "] and [" +
               std::to_string(s.start) + "," + std::to_string(s.end) + "]");
    }
  }
  std::vector<int> tags(n, tagset.o_index());
  for (const Span& s : sorted) {
    if (s.length() == 1) {
      tags[s.start - 1] = tagset.tag_index(TagRole::unit, s.entity_class);
    } else {
      tags[s.start - 1] = tagset.tag_index(TagRole::begin, s.entity_class);
      for (int p = s.start + 1; p < s.end; ++p)
        tags[p - 1] = tagset.tag_index(TagRole::inside, s.entity_class);
      tags[s.end - 1] = tagset.tag_index(TagRole::last, s.entity_class);
    }
  }
  return tags;
}

std::vector<Span> tags_to_spans(const std::vector<int>& tags,
                                const TagSet& tagset) {
  std::vector<Span> spans;
  int open_class = -1;  // class of a currently open B/I run, -1 if none
  int open_start = 0;
  auto bad = [](int position) {
    fail(ErrorCode::ungrammatical,
         "ungrammatical tag sequence at position " + std::to_string(position));
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    int tag = tags[i];
    if (tag < 0 || tag >= tagset.size()) bad(i + 1);
    TagRole role = tagset.role(tag);
    int cls = tagset.entity_class(tag);
    bool inside_span = open_class >= 0;
    switch (role) {
      case TagRole::o:
        if (inside_span) bad(i + 1);
        break;
      case TagRole::begin:
        if (inside_span) bad(i + 1);
        open_class = cls;
        open_start = i + 1;
        break;
      case TagRole::inside:
        if (!inside_span || cls != open_class) bad(i + 1);
        break;
      case TagRole::last:
        if (!inside_span || cls != open_class) bad(i + 1);
        spans.push_back({open_start, i + 1, cls});
        open_class = -1;
        break;
      case TagRole::unit:
        if (inside_span) bad(i + 1);
        spans.push_back({i + 1, i + 1, cls});
        break;
    }
  }
  if (open_class >= 0) bad(static_cast<int>(tags.size()));
  return spans;
}

std::vector<Span> lenient_tags_to_spans(const std::vector<int>& tags,
                                        const TagSet& tagset) {
  std::vector<Span> spans;
  int open_class = -1;
  int open_start = 0;
  auto close_at = [&](int end_1based) {
    spans.push_back({open_start, end_1based, open_class});
    open_class = -1;
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    TagRole role = tagset.role(tags[i]);
    int cls = tagset.entity_class(tags[i]);
    switch (role) {
      case TagRole::o:
        if (open_class >= 0) close_at(i);
        break;
      case TagRole::begin:
      case TagRole::unit:
        if (open_class >= 0) close_at(i);
        if (role == TagRole::unit) {
          spans.push_back({i + 1, i + 1, cls});
        } else {
          open_class = cls;
          open_start = i + 1;
        }
        break;
      case TagRole::inside:
      case TagRole::last:
        if (open_class >= 0 && cls != open_class) close_at(i);
        if (open_class < 0) {
          open_class = cls;  // orphan I/L opens a span
          open_start = i + 1;
        }
        if (role == TagRole::last) close_at(i + 1);
        break;
    }
  }
  if (open_class >= 0) close_at(static_cast<int>(tags.size()));
  return spans;
}

double entity_token_ratio(const Dataset& dataset) {
  long total = 0;
  long entity = 0;
  for (const auto& doc : dataset.documents) {
    for (const auto& s : doc.sentences) {
      if (!s.gold_tags) {
        fail(ErrorCode::missing_gold,
             "entity_token_ratio requires gold tags on every sentence (document " +
                 doc.id + ")");
      }
      for (int tag : *s.gold_tags) {
        ++total;
        if (tag != dataset.tagset.o_index()) ++entity;
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(entity) / static_cast<double>(total);
}

std::vector<Span> gold_spans(const AnnotatedSentence& s, const TagSet& tagset) {
  if (!s.gold_tags) fail(ErrorCode::missing_gold, "sentence has no gold tags");
  return tags_to_spans(*s.gold_tags, tagset);
}

long count_gold_spans(const Dataset& dataset) {
  long n = 0;
  for (const auto& doc : dataset.documents)
    for (const auto& s : doc.sentences)
      n += static_cast<long>(gold_spans(s, dataset.tagset).size());
  return n;
}

}  // namespace eertag
