#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace eertag {

enum class TagRole { o, begin, inside, last, unit };

// BILUO tag inventory over an ordered list of entity classes.
//
// Tag indices are fixed: 0 is O, then for each class (declared order) the
// four roles in B, I, L, U order. |tags| = 4 * |classes| + 1.
class TagSet {
 public:
  TagSet() : TagSet(std::vector<std::string>{}) {}
  explicit TagSet(std::vector<std::string> classes);

  int size() const { return static_cast<int>(names_.size()); }
  int o_index() const { return 0; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::string& class_name(int cls) const { return classes_.at(cls); }

  TagRole role(int tag) const;
  // Class of a B/I/L/U tag; -1 for O.
  int entity_class(int tag) const;
  int tag_index(TagRole role, int cls) const;

  const std::string& name(int tag) const { return names_.at(tag); }
  // Index for a tag string like "B-PER" or "O"; -1 if unknown.
  int index_of(const std::string& name) const;

  friend bool operator==(const TagSet& a, const TagSet& b) {
    return a.classes_ == b.classes_;
  }

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> names_;
  std::map<std::string, int> by_name_;
};

struct Sentence {
  std::vector<std::string> tokens;

  int length() const { return static_cast<int>(tokens.size()); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Typed entity span, 1-based inclusive positions.
struct Span {
  int start = 0;
  int end = 0;
  int entity_class = 0;

  int length() const { return end - start + 1; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Partial annotation: observed (position, tag) pairs, at most one per
// position. Positions are 1-based. Everything not listed here is latent,
// which is not the same as an observed O.
struct ObservedTags {
  std::map<int, int> observations;  // position -> tag index

  bool empty() const { return observations.empty(); }
  std::size_t size() const { return observations.size(); }
  void observe(int position, int tag);
  friend bool operator==(const ObservedTags&, const ObservedTags&) = default;
};

struct AnnotatedSentence {
  Sentence sentence;
  ObservedTags observed;
  // Full reference tagging, carried for evaluation and simulation only.
  std::optional<std::vector<int>> gold_tags;

  int length() const { return sentence.length(); }
  friend bool operator==(const AnnotatedSentence&, const AnnotatedSentence&) =
      default;
};

struct Document {
  std::string id;
  std::vector<AnnotatedSentence> sentences;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Dataset {
  TagSet tagset;
  std::vector<Document> documents;

  long token_count() const;
  long sentence_count() const;
  // Token/tag/observation equality, ignoring document ids.
  bool same_content(const Dataset& other) const;
};

// Encodes non-overlapping spans as a BILUO sequence of length n. Positions
// outside every span become O. Rejects overlapping or out-of-range spans.
std::vector<int> spans_to_tags(const std::vector<Span>& spans, int n,
                               const TagSet& tagset);

// Strict inverse of spans_to_tags. Throws ErrorCode::ungrammatical naming
// the first invalid position (1-based) for sequences the BILUO grammar
// rejects.
std::vector<Span> tags_to_spans(const std::vector<int>& tags,
                                const TagSet& tagset);

// Total repair variant: ungrammatical runs are reinterpreted as the nearest
// valid span (orphan I/L open a span, unterminated B/I close at the last
// matching-class tag). Used when ingesting noisy tag sequences.
std::vector<Span> lenient_tags_to_spans(const std::vector<int>& tags,
                                        const TagSet& tagset);

// Fraction of gold positions carrying a non-O tag (the corpus rho*).
// Requires gold_tags on every sentence.
double entity_token_ratio(const Dataset& dataset);

// All gold spans of a document/dataset, via tags_to_spans.
std::vector<Span> gold_spans(const AnnotatedSentence& s, const TagSet& tagset);
long count_gold_spans(const Dataset& dataset);

}  // namespace eertag
