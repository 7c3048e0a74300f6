#include "eertag/preprocess.hpp"

#include "eertag/error.hpp"

namespace eertag {

PreprocessVariant parse_variant(const std::string& name) {
  if (name == "all") return PreprocessVariant::all;
  if (name == "short") return PreprocessVariant::short_docs;
  if (name == "shortest") return PreprocessVariant::shortest;
  fail(ErrorCode::invalid_argument,
       "unknown preprocess variant '" + name + "' (expected all|short|shortest)");
}

std::string variant_name(PreprocessVariant variant) {
  switch (variant) {
    case PreprocessVariant::all: return "all";
    case PreprocessVariant::short_docs: return "short";
    case PreprocessVariant::shortest: return "shortest";
  }
  return "?";
}

Dataset apply_variant(const Dataset& dataset, PreprocessVariant variant,
                      bool* became_empty) {
  if (became_empty) *became_empty = false;
  if (variant == PreprocessVariant::all) return dataset;

  Dataset out{dataset.tagset, {}};
  for (const Document& doc : dataset.documents) {
    int last_observed = -1;  // sentence index of the last observation
    for (int s = 0; s < static_cast<int>(doc.sentences.size()); ++s) {
      if (!doc.sentences[s].observed.empty()) last_observed = s;
    }
    if (last_observed < 0) continue;  // unannotated documents drop either way
    Document kept;
    kept.id = doc.id;
    if (variant == PreprocessVariant::short_docs) {
      kept.sentences = doc.sentences;
    } else {
      kept.sentences.assign(doc.sentences.begin(),
                            doc.sentences.begin() + last_observed + 1);
    }
    out.documents.push_back(std::move(kept));
  }
  if (became_empty && out.documents.empty()) *became_empty = true;
  return out;
}

}  // namespace eertag
