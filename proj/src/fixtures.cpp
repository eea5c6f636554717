#include "embedfit/fixtures.hpp"

#include <functional>
#include <initializer_list>
#include <utility>

#include "embedfit/encoder.hpp"
#include "embedfit/objective.hpp"
#include "embedfit/rng.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit::fixtures {
namespace {

Vec axis(std::size_t dim, std::size_t i) {
  Vec v(dim, 0.0);
  v[i] = 1.0;
  return v;
}

// sum of coefficient * vector
Vec combine(std::size_t dim, std::initializer_list<std::pair<double, Vec>> terms) {
  Vec out(dim, 0.0);
  for (const auto& [c, v] : terms) {
    for (std::size_t i = 0; i < dim; ++i) out[i] += c * v[i];
  }
  return out;
}

Vec scaled(Vec v, double s) {
  for (double& x : v) x *= s;
  return v;
}

void add_noise(Vec& v, Rng& rng, double sigma, std::size_t from) {
  for (std::size_t i = from; i < v.size(); ++i) v[i] += sigma * rng.normal();
}

Vec random_vec(Rng& rng, std::size_t dim) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return v;
}

EmbeddingSet random_set(Rng& rng, std::size_t dim, std::size_t count, const std::string& prefix) {
  EmbeddingSet set(dim);
  for (std::size_t i = 0; i < count; ++i) set.add({prefix + std::to_string(i), random_vec(rng, dim)});
  return set;
}

}  // namespace

CollapseFixture collapse() {
  constexpr std::size_t d = 32;
  // Geometry, in units of the text scale s. Axes: 0 image-only offset, 1 shared
  // text offset, 2 and 3 the class axes of target_a and target_b, 4-6 coarse
  // spread, 7-14 negative spread, 16-17 class-specific base detail, 18-22 unrelated
  // vocabulary, 24+ exemplar noise.
  constexpr double s = 0.34;
  constexpr double coarse_spread = 0.13;
  constexpr double coarse_offset = 0.43;
  constexpr double neg_offset = 1.05;
  constexpr double neg_spread = 0.23;
  constexpr double base_offset = 0.29;
  constexpr double image_offset = 0.19;
  constexpr double exemplar_offset = 2.75;
  constexpr double held_out_shift = 0.4;
  constexpr double noise = 0.02;

  const Vec v = axis(d, 0), g = axis(d, 1), w = axis(d, 2), r = axis(d, 3);
  CollapseFixture f;
  f.vocab = EmbeddingSet(d);

  std::vector<std::string> coarse_names;
  for (std::size_t i = 0; i < 4; ++i) {
    const double extra = i >= 3 ? coarse_spread : 0.0;
    Vec p = combine(d, {{1.0, g},
                        {-coarse_offset, w},
                        {-coarse_offset, r},
                        {coarse_spread, axis(d, 4 + i % 3)},
                        {extra, axis(d, 4 + (i + 1) % 3)}});
    coarse_names.push_back("coarse_" + std::to_string(i));
    f.vocab.add({coarse_names.back(), scaled(std::move(p), s)});
  }
  const Vec base_a = scaled(combine(d, {{1.0, g},
                                        {base_offset * neg_offset, w},
                                        {0.3 * neg_spread, axis(d, 7)},
                                        {0.1, axis(d, 16)}}),
                            s);
  const Vec base_b = scaled(combine(d, {{1.0, g},
                                        {base_offset * neg_offset, r},
                                        {0.3 * neg_spread, axis(d, 11)},
                                        {0.1, axis(d, 17)}}),
                            s);
  f.vocab.add({"target_a", base_a});
  f.vocab.add({"target_b", base_b});
  std::vector<std::string> neg_a, neg_b;
  for (std::size_t i = 0; i < 4; ++i) {
    neg_a.push_back("neg_a_" + std::to_string(i));
    f.vocab.add({neg_a.back(), scaled(combine(d, {{1.0, g}, {neg_offset, w}, {neg_spread, axis(d, 7 + i)}}), s)});
  }
  for (std::size_t i = 0; i < 4; ++i) {
    neg_b.push_back("neg_b_" + std::to_string(i));
    f.vocab.add({neg_b.back(), scaled(combine(d, {{1.0, g}, {neg_offset, r}, {neg_spread, axis(d, 11 + i)}}), s)});
  }
  for (std::size_t i = 0; i < 4; ++i) {
    f.vocab.add({"other_" + std::to_string(i), scaled(combine(d, {{1.0, axis(d, 18)}, {0.5, axis(d, 19 + i)}}), s)});
  }

  Rng rng(11);
  const double x_text = s * exemplar_offset * neg_offset;
  const Vec x = combine(d, {{image_offset, v}, {s, g}, {x_text, w}, {x_text, r}});
  EmbeddingSet exemplars(d);
  for (std::size_t i = 0; i < 4; ++i) {
    Vec e = x;
    add_noise(e, rng, noise, 24);
    exemplars.add({"shot_" + std::to_string(i), std::move(e)});
  }

  f.held_out.images = EmbeddingSet(d);
  for (std::size_t i = 0; i < 10; ++i) {
    for (int c = 0; c < 2; ++c) {
      const double sign = c == 0 ? 1.0 : -1.0;
      Vec e = combine(d, {{1.0, x}, {s * held_out_shift * sign, r}, {-s * held_out_shift * sign, w}});
      add_noise(e, rng, noise, 24);
      const std::string label = c == 0 ? "target_a" : "target_b";
      f.held_out.images.add({label + "_img_" + std::to_string(i), std::move(e)});
      f.held_out.labels.push_back(label);
    }
  }

  f.classes.push_back({{"target_a", base_a}, {"target_a", coarse_names, neg_a}, exemplars});
  f.classes.push_back({{"target_b", base_b}, {"target_b", coarse_names, neg_b}, exemplars});

  f.config.k = 2;
  f.config.keep_k = 2;
  f.config.weights = {1.0, 1.0};
  return f;
}

HierarchicalFixture hierarchical() {
  constexpr std::size_t d = 32;
  constexpr std::size_t categories = 5, per_category = 15;
  constexpr double coarse_step = 3.0;
  constexpr double category_jitter = 0.1;
  constexpr double fine_jitter = 0.4;
  Rng rng(7);
  HierarchicalFixture f{EmbeddingSet(d), {}};
  for (std::size_t c = 0; c < categories; ++c) {
    Vec center(d, 0.0);
    center[0] = coarse_step * (static_cast<double>(c) - 2.0);
    for (std::size_t i = 1; i < d; ++i) center[i] = category_jitter * rng.normal();
    for (std::size_t j = 0; j < per_category; ++j) {
      Vec e = center;
      for (double& x : e) x += fine_jitter * rng.normal();
      f.set.add({"cat" + std::to_string(c) + "_class" + std::to_string(j), std::move(e)});
      f.labels.push_back("cat" + std::to_string(c));
    }
  }
  return f;
}

ContinualFixture continual() {
  constexpr std::size_t d = 24;
  constexpr std::size_t classes = 5, shots = 4, images = 6;
  Rng rng(5);
  ContinualFixture f;
  f.vocab = EmbeddingSet(d);
  const Vec g = axis(d, 5);

  // class directions; class_4 leans on class_3
  std::vector<Vec> dirs;
  for (std::size_t c = 0; c < 4; ++c) dirs.push_back(axis(d, c));
  dirs.push_back(combine(d, {{0.8, axis(d, 3)}, {0.6, axis(d, 4)}}));

  std::vector<std::string> coarse;
  for (std::size_t j = 0; j < 3; ++j) {
    coarse.push_back("family_" + std::to_string(j));
    f.vocab.add({coarse.back(), combine(d, {{1.0, g}, {0.3, axis(d, 6 + j)}})});
  }

  for (std::size_t c = 0; c < classes; ++c) {
    const std::string name = "class_" + std::to_string(c);
    Vec base = combine(d, {{0.5, g}, {0.8, dirs[c]}, {0.2, axis(d, 12 + c)}, {0.15, axis(d, 17 + c % 3)}});
    f.vocab.add({name, base});
    std::vector<std::string> fine;
    for (std::size_t j = 0; j < 3; ++j) {
      fine.push_back(name + "_neg_" + std::to_string(j));
      f.vocab.add({fine.back(), combine(d, {{0.6, g}, {0.5, dirs[c]}, {0.4, axis(d, 17 + j)}, {0.1 * double(c), axis(d, 20)}})});
    }
    EmbeddingSet shots_set(d);
    for (std::size_t i = 0; i < shots; ++i) {
      Vec e = combine(d, {{1.0, dirs[c]}, {0.3, g}});
      add_noise(e, rng, 0.05, 0);
      shots_set.add({name + "_shot_" + std::to_string(i), std::move(e)});
    }
    f.classes.push_back({{name, base}, {name, coarse, fine}, std::move(shots_set)});
  }

  for (std::size_t c = 0; c < classes; ++c) {
    const std::string name = "class_" + std::to_string(c);
    LabeledImageSet task{EmbeddingSet(d), {}};
    for (std::size_t i = 0; i < images; ++i) {
      Vec e = combine(d, {{1.0, dirs[c]}, {0.3, g}});
      // class_3 images wander toward class_4's direction
      if (c == 3) e = combine(d, {{1.0, e}, {-0.2 + 0.18 * double(i), axis(d, 4)}});
      add_noise(e, rng, 0.05, 0);
      task.images.add({name + "_img_" + std::to_string(i), std::move(e)});
      task.labels.push_back(name);
    }
    f.task_images.push_back(std::move(task));
  }
  f.config.keep_k = 3;
  return f;
}

ClassifyFixture three_class() {
  constexpr std::size_t d = 8;
  Rng rng(3);
  ClassifyFixture f{EmbeddingSet(d), {EmbeddingSet(d), {}}};
  const char* names[] = {"red", "green", "blue"};
  for (std::size_t c = 0; c < 3; ++c) f.classes.add({names[c], combine(d, {{1.0, axis(d, c)}, {0.2, axis(d, 3)}})});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 10; ++i) {
      Vec e = f.classes[c].vector;
      for (double& x : e) x += 0.45 * rng.normal();
      f.images.images.add({std::string(names[c]) + "_" + std::to_string(i), std::move(e)});
      f.images.labels.push_back(names[c]);
    }
  }
  return f;
}

std::vector<GradcheckResult> gradcheck_suite(std::uint64_t seed, std::size_t instances) {
  GradcheckResult img{"img_align", instances, 0.0, 1e-5};
  GradcheckResult coarse{"coarse", instances, 0.0, 1e-5};
  GradcheckResult fine{"fine", instances, 0.0, 1e-5};
  GradcheckResult total{"total", instances, 0.0, 1e-5};
  GradcheckResult vjp{"toy_vjp", instances, 0.0, 1e-4};

  for (std::size_t n = 0; n < instances; ++n) {
    Rng rng(seed * 1000003ULL + n);

    {
      constexpr std::size_t d = 32;
      const EmbeddingSet ex = random_set(rng, d, 1 + rng.index(5), "x");
      const Vec z = random_vec(rng, d);
      img.worst = std::max(img.worst, gradcheck([&](std::span<const double> p) { return loss_img_align(p, ex); }, z));
    }

    {
      constexpr std::size_t d = 8;
      NeighborhoodSpec hood{random_set(rng, d, 3, "p"), random_set(rng, d, 4, "n"), EmbeddingSet(d)};
      for (const auto& e : hood.coarse) hood.union_set.add(e);
      for (const auto& e : hood.fine) hood.union_set.add(e);
      SubspaceBasis basis = fit_pca(hood.union_set);
      basis.k = 2;
      const auto [cpart, fpart] = split(basis, basis.k);
      const EmbeddingSet ex = random_set(rng, d, 4, "x");
      const Vec z = random_vec(rng, d);
      const Vec& c = basis.center;
      coarse.worst = std::max(
          coarse.worst, gradcheck([&](std::span<const double> p) { return loss_coarse(p, hood.coarse, cpart, c); }, z));
      fine.worst = std::max(
          fine.worst, gradcheck([&](std::span<const double> p) { return loss_fine(p, hood.fine, fpart, c); }, z));
      const LossWeights weights{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
      const Objective objective(ex, hood, basis, weights);
      total.worst = std::max(total.worst, gradcheck(
                                              [&](std::span<const double> p) {
                                                TotalLoss t = objective.evaluate(p);
                                                return LossValue{t.breakdown.total, std::move(t.gradient)};
                                              },
                                              z));
    }

    {
      const ToyTextEncoder enc = init_frozen(rng.next());
      const PromptTemplate tmpl = PromptTemplate::default_template();
      const Vec token = random_vec(rng, enc.shape().token_dim);
      const Vec upstream = random_vec(rng, enc.shape().output_dim);
      auto fn = [&](std::span<const double> e) {
        const Vec out = enc.encode(tmpl, e);
        return LossValue{dot(out, upstream), enc.encode_vjp(tmpl, e, upstream)};
      };
      vjp.worst = std::max(vjp.worst, gradcheck(fn, token));
    }
  }
  return {img, coarse, fine, total, vjp};
}

}  // namespace embedfit::fixtures
