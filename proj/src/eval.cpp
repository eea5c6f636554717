#include "embedfit/eval.hpp"

#include <algorithm>
#include <numeric>

#include "embedfit/error.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit {

EvalResult classify(const LabeledImageSet& images, const EmbeddingSet& class_embs) {
  if (class_embs.empty()) throw Error(ErrorCode::EmptySet, "no class embeddings");
  if (images.labels.size() != images.images.size()) {
    throw Error(ErrorCode::InsufficientLabels, "expected one label per image");
  }
  if (!images.images.empty()) require_same_dim(images.images.dim(), class_embs.dim(), "images vs classes");

  EvalResult r;
  const std::size_t n_classes = class_embs.size();
  for (const auto& c : class_embs) r.class_names.push_back(c.name);
  r.per_class.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) r.per_class[c].name = r.class_names[c];
  r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));

  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto truth = class_embs.index_of(images.labels[i]);
    if (!truth) {
      throw Error(ErrorCode::UnknownLabel, "image '" + images.images[i].name + "' has label '" + images.labels[i] +
                                               "' with no class embedding");
    }
    std::size_t best = 0;
    double best_sim = cosine_sim(images.images[i].vector, class_embs[0].vector);
    for (std::size_t c = 1; c < n_classes; ++c) {
      const double s = cosine_sim(images.images[i].vector, class_embs[c].vector);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    r.predictions.push_back(best);
    ++r.confusion[*truth][best];
    ++r.per_class[*truth].total;
    if (best == *truth) {
      ++r.per_class[*truth].correct;
      ++r.correct;
    }
    ++r.total;
  }
  for (auto& pc : r.per_class) {
    pc.accuracy = pc.total ? 100.0 * static_cast<double>(pc.correct) / static_cast<double>(pc.total) : 0.0;
  }
  r.accuracy = r.total ? 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

std::vector<EvalResult> classify_cumulative(const ClassRegistry& registry,
                                            const std::vector<LabeledImageSet>& tasks) {
  if (tasks.size() > registry.size()) {
    throw Error(ErrorCode::OutOfRange, "more tasks than registered classes");
  }
  std::vector<EvalResult> out;
  LabeledImageSet seen;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (t == 0) seen.images = EmbeddingSet(tasks[0].images.dim());
    for (std::size_t i = 0; i < tasks[t].size(); ++i) {
      seen.images.add(tasks[t].images[i]);
      seen.labels.push_back(tasks[t].labels[i]);
    }
    out.push_back(classify(seen, registry.as_set(t + 1)));
  }
  return out;
}

std::vector<RankedItem> rank_by_similarity(std::span<const double> query, const EmbeddingSet& set) {
  require_same_dim(query.size(), set.dim(), "ranking query");
  std::vector<RankedItem> items;
  items.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) items.push_back({set[i].name, cosine_sim(query, set[i].vector), i});
  std::stable_sort(items.begin(), items.end(),
                   [](const RankedItem& a, const RankedItem& b) { return a.similarity > b.similarity; });
  return items;
}

double precision_at_k(const Embedding& query, const LabeledImageSet& gallery, std::size_t k,
                      const std::string& positive_class) {
  if (k < 1) throw Error(ErrorCode::OutOfRange, "k must be at least 1");
  if (gallery.size() < k) {
    throw Error(ErrorCode::GalleryTooSmall,
                "gallery has " + std::to_string(gallery.size()) + " items, k is " + std::to_string(k));
  }
  const auto ranked = rank_by_similarity(query.vector, gallery.images);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += gallery.labels[ranked[i].index] == positive_class;
  return static_cast<double>(hits) / static_cast<double>(k);
}

EmbeddingSet mean_image_baseline(const LabeledImageSet& exemplars) {
  if (exemplars.images.empty()) throw Error(ErrorCode::EmptySet, "no exemplars");
  std::vector<std::string> order;
  for (const auto& l : exemplars.labels) {
    if (std::find(order.begin(), order.end(), l) == order.end()) order.push_back(l);
  }
  EmbeddingSet out(exemplars.images.dim());
  for (const auto& label : order) {
    EmbeddingSet members(exemplars.images.dim());
    for (std::size_t i = 0; i < exemplars.size(); ++i) {
      if (exemplars.labels[i] == label) members.add(exemplars.images[i]);
    }
    out.add(mean_embedding(members, true, label));
  }
  return out;
}

std::vector<RankedItem> nearest_neighbors(const Embedding& z, const EmbeddingSet& vocab, std::size_t n) {
  if (vocab.empty()) throw Error(ErrorCode::EmptySet, "empty vocabulary");
  if (n > vocab.size()) throw Error(ErrorCode::OutOfRange, "n exceeds vocabulary size");
  auto ranked = rank_by_similarity(z.vector, vocab);
  ranked.resize(n);
  return ranked;
}

RankedItem max_vocab_sim(const Embedding& z, const EmbeddingSet& vocab) {
  return nearest_neighbors(z, vocab, 1).front();
}

double mean_image_text_cosine(const LabeledImageSet& images, const EmbeddingSet& class_embs) {
  if (images.images.empty()) throw Error(ErrorCode::EmptySet, "no images");
  double s = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto* c = class_embs.find(images.labels[i]);
    if (!c) throw Error(ErrorCode::UnknownLabel, "no class embedding for '" + images.labels[i] + "'");
    s += cosine_sim(images.images[i].vector, c->vector);
  }
  return s / static_cast<double>(images.size());
}

std::vector<std::array<double, 2>> project_2d(const EmbeddingSet& set) {
  if (set.size() < 3) throw Error(ErrorCode::TooFewPoints, "2-D projection needs at least 3 points");
  const SubspaceBasis basis = fit_pca(set, true);
  SubspacePart top{basis.dim, {basis.components.begin(),
                               basis.components.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(2, basis.rank()))}};
  std::vector<std::array<double, 2>> out;
  for (const auto& e : set) {
    const Vec c = project(top, e.vector, basis.center);
    out.push_back({c[0], c.size() > 1 ? c[1] : 0.0});
  }
  return out;
}

}  // namespace embedfit
