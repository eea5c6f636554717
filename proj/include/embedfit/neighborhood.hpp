#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "embedfit/embedding.hpp"

namespace embedfit {

// Candidate names for one target class. The coarse list names broader
// semantic groups the class should stay close to; the fine list names visually
// confusable classes.
struct CandidateSpec {
  std::string class_name;
  std::vector<std::string> coarse;
  std::vector<std::string> fine;
};

struct NeighborhoodSpec {
  EmbeddingSet coarse;
  EmbeddingSet fine;
  EmbeddingSet union_set;  // coarse entries first, then fine
};

struct ScoredCandidate {
  std::string name;
  double score = 0.0;
};

// Mean cosine similarity of each candidate to the exemplar image embeddings.
std::vector<ScoredCandidate> score_candidates(const EmbeddingSet& candidates,
                                              const EmbeddingSet& exemplar_images);

// Keeps the keep_k candidates with the highest mean exemplar similarity, in
// descending score order; ties keep input order.
EmbeddingSet filter_fine_negatives(const EmbeddingSet& candidates, const EmbeddingSet& exemplar_images,
                                   std::size_t keep_k);

NeighborhoodSpec build_neighborhood(const CandidateSpec& spec, const EmbeddingSet& text_lookup,
                                    const EmbeddingSet& exemplar_images, std::size_t keep_k);

}  // namespace embedfit
