#include "embedfit/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "embedfit/error.hpp"

namespace embedfit {

EmbeddingSet::EmbeddingSet(std::size_t dim, std::vector<Embedding> entries) : dim_(dim) {
  entries_.reserve(entries.size());
  for (auto& e : entries) add(std::move(e));
}

void EmbeddingSet::add(Embedding e) {
  if (e.vector.size() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding '" + e.name + "' has dim " + std::to_string(e.vector.size()) +
                    ", set expects " + std::to_string(dim_));
  }
  if (index_of(e.name)) throw Error(ErrorCode::DuplicateName, "duplicate name '" + e.name + "'");
  require_finite(e.vector, "embedding '" + e.name + "'");
  entries_.push_back(std::move(e));
}

std::optional<std::size_t> EmbeddingSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

const Embedding* EmbeddingSet::find(const std::string& name) const {
  auto idx = index_of(name);
  return idx ? &entries_[*idx] : nullptr;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

void require_finite(std::span<const double> v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, what + " has a non-finite component");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vec l2_normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > kNormEpsilon)) throw Error(ErrorCode::ZeroVector, "cannot normalize a zero vector");
  Vec out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "cosine_sim");
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > kNormEpsilon) || !(nb > kNormEpsilon)) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Embedding mean_embedding(const EmbeddingSet& set, bool normalize_result, std::string name) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "mean of an empty set");
  Vec mean(set.dim(), 0.0);
  for (const auto& e : set) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += e.vector[i];
  }
  for (double& x : mean) x /= static_cast<double>(set.size());
  if (normalize_result) mean = l2_normalize(mean);
  return {std::move(name), std::move(mean)};
}

SimilarityMatrix pairwise_sims(const EmbeddingSet& a, const EmbeddingSet& b) {
  require_same_dim(a.dim(), b.dim(), "pairwise_sims");
  SimilarityMatrix m{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m.values[i * m.cols + j] = cosine_sim(a[i].vector, b[j].vector);
    }
  }
  return m;
}

}  // namespace embedfit
