#pragma once

#include <string>

#include "eertag/corpus.hpp"

namespace eertag {

// Dataset reductions for low-recall training: `all` keeps everything,
// `short_docs` drops documents with no observations, `shortest` additionally
// drops every sentence after the last observed one in each kept document.
enum class PreprocessVariant { all, short_docs, shortest };

PreprocessVariant parse_variant(const std::string& name);
std::string variant_name(PreprocessVariant variant);

// Applies the reduction. Sets *became_empty when the result has no
// documents left.
Dataset apply_variant(const Dataset& dataset, PreprocessVariant variant,
                      bool* became_empty = nullptr);

}  // namespace eertag
