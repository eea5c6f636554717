#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embedfit {

using Vec = std::vector<double>;

inline constexpr double kNormEpsilon = 1e-12;

struct Embedding {
  std::string name;
  Vec vector;

  std::size_t dim() const { return vector.size(); }
};

// Ordered collection of equally sized, uniquely named embeddings. Order is
// significant: every tie-break in the library falls back to it.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim) : dim_(dim) {}
  EmbeddingSet(std::size_t dim, std::vector<Embedding> entries);

  // Throws DimensionMismatch, DuplicateName or NonFinite.
  void add(Embedding e);
  void add(std::string name, Vec vector) { add(Embedding{std::move(name), std::move(vector)}); }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const Embedding& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Embedding>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::optional<std::size_t> index_of(const std::string& name) const;
  const Embedding* find(const std::string& name) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Embedding> entries_;
};

// Row-major |rows| x |cols| matrix of cosine similarities.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

Vec l2_normalize(std::span<const double> v);

// a.b / (|a||b|), clamped to [-1, 1].
double cosine_sim(std::span<const double> a, std::span<const double> b);

Embedding mean_embedding(const EmbeddingSet& set, bool normalize_result,
                         std::string name = "mean");

SimilarityMatrix pairwise_sims(const EmbeddingSet& a, const EmbeddingSet& b);

void require_same_dim(std::size_t a, std::size_t b, const char* what);
void require_finite(std::span<const double> v, const std::string& what);

}  // namespace embedfit
