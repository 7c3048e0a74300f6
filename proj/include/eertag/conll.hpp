#pragma once

#include <string>
#include <vector>

#include "eertag/corpus.hpp"

namespace eertag {

// Tag string written at latent (unobserved) positions of partial corpora.
// Distinct from "O": a written "O" is an observed non-entity.
inline const std::string kLatentTag = "-";

enum class TagScheme { bio, biluo };

// What the tag column(s) of a file mean.
//   gold:    tag column is a full reference tagging; observations are taken
//            from the non-O gold tags.
//   raw:     like gold, but every position (including O) becomes observed.
//   partial: tag column is observed-or-latent ("-"); no gold.
//   both:    tag column is gold, observed_column is observed-or-latent.
enum class CorpusMode { gold, raw, partial, both };

struct ColumnFormatConfig {
  int token_column = 0;
  int tag_column = -1;       // -1: last field on each line
  int observed_column = -1;  // required for CorpusMode::both
  bool tab_separated = false;  // default: split on whitespace runs
  std::string docstart_marker = "-DOCSTART-";
  // Without docstart markers: false keeps every sentence in one document,
  // true makes each contiguous block (sentence) its own document.
  bool doc_per_block = false;
  TagScheme scheme = TagScheme::bio;  // gold column on read
  CorpusMode mode = CorpusMode::gold;

  void validate() const;
};

Dataset read_corpus(const std::string& path, const ColumnFormatConfig& config,
                    const TagSet& tagset);

void write_corpus(const Dataset& dataset, const std::string& path,
                  const ColumnFormatConfig& config);

// Entity class names appearing in the tag column, sorted alphabetically.
std::vector<std::string> scan_classes(const std::string& path,
                                      const ColumnFormatConfig& config);

// BIO tag strings to BILUO indices. Total: an I-c without a matching head is
// promoted to B-c before conversion.
std::vector<int> bio_to_biluo(const std::vector<std::string>& bio_tags,
                              const TagSet& tagset);

}  // namespace eertag
