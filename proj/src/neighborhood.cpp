#include "embedfit/neighborhood.hpp"

#include <algorithm>
#include <numeric>

#include "embedfit/error.hpp"

namespace embedfit {
namespace {

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

std::vector<ScoredCandidate> score_candidates(const EmbeddingSet& candidates,
                                              const EmbeddingSet& exemplar_images) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no fine candidates to score");
  if (exemplar_images.empty()) throw Error(ErrorCode::EmptyExemplars, "no exemplar images");
  require_same_dim(candidates.dim(), exemplar_images.dim(), "candidate vs exemplar dim");
  std::vector<ScoredCandidate> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    double s = 0.0;
    for (const auto& x : exemplar_images) s += cosine_sim(c.vector, x.vector);
    scores.push_back({c.name, s / static_cast<double>(exemplar_images.size())});
  }
  return scores;
}

EmbeddingSet filter_fine_negatives(const EmbeddingSet& candidates, const EmbeddingSet& exemplar_images,
                                   std::size_t keep_k) {
  if (keep_k < 1) throw Error(ErrorCode::OutOfRange, "keep_k must be at least 1");
  const auto scores = score_candidates(candidates, exemplar_images);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score > scores[b].score; });
  EmbeddingSet kept(candidates.dim());
  for (std::size_t i = 0; i < std::min(keep_k, order.size()); ++i) kept.add(candidates[order[i]]);
  return kept;
}

NeighborhoodSpec build_neighborhood(const CandidateSpec& spec, const EmbeddingSet& text_lookup,
                                    const EmbeddingSet& exemplar_images, std::size_t keep_k) {
  if (spec.coarse.empty()) throw Error(ErrorCode::InsufficientCandidates, "coarse candidate list is empty");
  if (spec.fine.empty()) throw Error(ErrorCode::InsufficientCandidates, "fine candidate list is empty");
  for (const auto* list : {&spec.coarse, &spec.fine}) {
    if (std::find(list->begin(), list->end(), spec.class_name) != list->end()) {
      throw Error(ErrorCode::InvalidConfig,
                  "class '" + spec.class_name + "' cannot be its own neighbor");
    }
  }

  std::vector<std::string> missing;
  EmbeddingSet coarse(text_lookup.dim());
  for (const auto& name : spec.coarse) {
    if (const auto* e = text_lookup.find(name)) coarse.add(*e);
    else missing.push_back(name);
  }
  if (!missing.empty()) throw Error(ErrorCode::UnresolvedName, "coarse names not in vocabulary: " + join(missing));

  EmbeddingSet fine_candidates(text_lookup.dim());
  for (const auto& name : spec.fine) {
    if (const auto* e = text_lookup.find(name)) {
      if (coarse.find(name)) {
        throw Error(ErrorCode::InvalidConfig, "'" + name + "' listed as both coarse and fine");
      }
      fine_candidates.add(*e);
    } else {
      missing.push_back(name);
    }
  }
  if (fine_candidates.size() < keep_k) {
    throw Error(ErrorCode::InsufficientCandidates,
                "only " + std::to_string(fine_candidates.size()) + " fine candidates resolved, keep_k is " +
                    std::to_string(keep_k) + (missing.empty() ? "" : "; unresolved: " + join(missing)));
  }

  NeighborhoodSpec out;
  out.fine = filter_fine_negatives(fine_candidates, exemplar_images, keep_k);
  out.union_set = EmbeddingSet(text_lookup.dim());
  for (const auto& e : coarse) out.union_set.add(e);
  for (const auto& e : out.fine) out.union_set.add(e);
  out.coarse = std::move(coarse);
  return out;
}

}  // namespace embedfit
