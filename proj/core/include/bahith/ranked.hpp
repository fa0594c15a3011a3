#pragma once

#include <string>
#include <vector>

namespace bahith {

enum class Stage { Sparse, Dense, Rerank };

const char* to_string(Stage stage);

// A chunk reference with its stage-specific relevance score. Within one
// result list scores are non-increasing and chunk ids distinct.
struct RankedPassage {
    std::string chunk_id;
    double score = 0.0;
    Stage stage = Stage::Sparse;
};

// True when scores are non-increasing and ids distinct (the result-list
// invariant).
bool well_formed(const std::vector<RankedPassage>& list);

}  // namespace bahith
