#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "embedfit/embedding.hpp"
#include "embedfit/optimizer.hpp"

namespace embedfit {

// Image embeddings with their ground-truth class names, index aligned.
struct LabeledImageSet {
  EmbeddingSet images;
  std::vector<std::string> labels;

  std::size_t size() const { return images.size(); }
};

struct ClassAccuracy {
  std::string name;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;  // percent; 0 for classes without images
};

struct EvalResult {
  std::vector<std::string> class_names;
  std::vector<std::size_t> predictions;  // index into class_names, per image
  std::vector<ClassAccuracy> per_class;
  // confusion[truth][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;  // percent
};

// Argmax cosine similarity over class embeddings; ties go to the class listed
// first.
EvalResult classify(const LabeledImageSet& images, const EmbeddingSet& class_embs);

// Entry t evaluates the images of tasks 0..t against the first t + 1 registry
// entries.
std::vector<EvalResult> classify_cumulative(const ClassRegistry& registry,
                                            const std::vector<LabeledImageSet>& tasks);

struct RankedItem {
  std::string name;
  double similarity = 0.0;
  std::size_t index = 0;
};

// Descending similarity, ties by input order.
std::vector<RankedItem> rank_by_similarity(std::span<const double> query, const EmbeddingSet& set);

double precision_at_k(const Embedding& query, const LabeledImageSet& gallery, std::size_t k,
                      const std::string& positive_class);

// One normalized mean embedding per label, labels in order of first appearance.
EmbeddingSet mean_image_baseline(const LabeledImageSet& exemplars);

std::vector<RankedItem> nearest_neighbors(const Embedding& z, const EmbeddingSet& vocab, std::size_t n);
RankedItem max_vocab_sim(const Embedding& z, const EmbeddingSet& vocab);

// Mean cosine between each image and its ground-truth class embedding.
double mean_image_text_cosine(const LabeledImageSet& images, const EmbeddingSet& class_embs);

// Coordinates on the set's own top two principal components; the second
// coordinate is 0 when the set has rank 1.
std::vector<std::array<double, 2>> project_2d(const EmbeddingSet& set);

}  // namespace embedfit
