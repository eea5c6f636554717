#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embedfit/embedding.hpp"
#include "embedfit/eval.hpp"
#include "embedfit/neighborhood.hpp"
#include "embedfit/optimizer.hpp"

// Deterministic synthetic data sets used by the acceptance suite, the tests and
// the fixture writer. Nothing here draws from a time-dependent source.
namespace embedfit::fixtures {

struct ClassFixture {
  Embedding z0;
  CandidateSpec spec;
  EmbeddingSet exemplars;
};

// Two target classes whose exemplars point the same way. Each has its own
// confusable negatives and both share the coarse neighborhood, which sits on the
// far side of the negatives.
struct CollapseFixture {
  EmbeddingSet vocab;
  std::vector<ClassFixture> classes;
  LabeledImageSet held_out;
  FitConfig config;
};
CollapseFixture collapse();

// 5 categories x 15 classes. Category offsets run along one dominant axis and
// are much larger than the per-class jitter.
struct HierarchicalFixture {
  EmbeddingSet set;
  std::vector<std::string> labels;
};
HierarchicalFixture hierarchical();

// Five classes fitted one at a time. The last class is close to class_3, so
// adding it takes some class_3 images away.
struct ContinualFixture {
  EmbeddingSet vocab;
  std::vector<ClassFixture> classes;
  std::vector<LabeledImageSet> task_images;
  FitConfig config;
};
ContinualFixture continual();

// 3 classes x 10 images with known nearest class.
struct ClassifyFixture {
  EmbeddingSet classes;
  LabeledImageSet images;
};
ClassifyFixture three_class();

struct GradcheckResult {
  std::string name;
  std::size_t instances = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed() const { return worst <= tolerance; }
};

// Central-difference checks of every analytic gradient over seeded random
// instances: img-align, coarse, fine, total and the toy encoder VJP.
std::vector<GradcheckResult> gradcheck_suite(std::uint64_t seed, std::size_t instances = 100);

// Writes every fixture as EMB1/CSV/JSON files under `dir`, ready for the CLI:
//   collapse/     vocab, shared exemplars, base texts, held-out images, run configs
//   hierarchical/ set + category labels
//   continual/    per-class exemplars, base texts, task images, sequence config
//   classify/     3-class embeddings, images, labels
// Run configs write their results under <subdir>/out/.
void write_fixture_files(const std::filesystem::path& dir);

}  // namespace embedfit::fixtures
