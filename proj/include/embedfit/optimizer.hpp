#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embedfit/embedding.hpp"
#include "embedfit/encoder.hpp"
#include "embedfit/neighborhood.hpp"
#include "embedfit/objective.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct FitConfig {
  double eta = 1e-4;
  std::size_t warmup_steps = 1000;
  std::size_t total_steps = 5000;
  LossWeights weights;
  std::size_t k = 1;
  std::size_t keep_k = 5;
  std::uint64_t seed = 0;
  EncoderMode mode = EncoderMode::Identity;
  bool renormalize_each_step = false;
  bool center_projections = true;
  AdamParams adam;
  std::size_t log_interval = 50;
  // Toy mode only.
  ToyEncoderShape toy_shape;
  std::optional<std::size_t> toy_init_token;

  void validate() const;
};

// Canonical text form of every field, used for provenance hashes.
std::string describe(const FitConfig& config);

// eta * min(1, (t + 1) / warmup_steps): linear warm-up, then constant.
double lr_at(const FitConfig& config, std::size_t t);

struct AdamState {
  Vec m;
  Vec v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
};

// Bias-corrected Adam. Advances state in place and returns the update to add
// to the parameters.
Vec adam_step(AdamState& state, std::span<const double> gradient, double lr, const AdamParams& params);

struct LoggedStep {
  std::size_t step = 0;
  LossBreakdown loss;
};

struct FitReport {
  std::string class_name;
  FitConfig config;
  std::vector<LoggedStep> trajectory;
  Embedding initial;          // z_c at step 0
  Embedding final_embedding;  // z_c after the last step
  std::optional<Vec> final_token;  // e_c, toy mode only
  std::size_t steps_run = 0;
  std::vector<std::string> coarse_names;
  std::vector<std::string> fine_names;
  std::size_t basis_rank = 0;
  std::uint64_t basis_checksum = 0;
  std::uint64_t encoder_checksum_before = 0;
  std::uint64_t encoder_checksum_after = 0;
};

std::uint64_t basis_checksum(const SubspaceBasis& basis);

// Neighborhood, PCA and split for one class, resolved before optimization.
struct FitSetup {
  NeighborhoodSpec neighborhood;
  SubspaceBasis basis;
};
FitSetup prepare_fit(const EmbeddingSet& exemplars, const CandidateSpec& spec, const EmbeddingSet& text_lookup,
                     const FitConfig& config);

TextEncoder make_encoder(const FitConfig& config, std::size_t output_dim);

FitReport fit_class(const EmbeddingSet& exemplars, const Embedding& z0, const CandidateSpec& spec,
                    const EmbeddingSet& text_lookup, const FitConfig& config);

// Insertion-ordered map from class name to optimized embedding. Entries cannot
// be modified or removed once added.
class ClassRegistry {
 public:
  struct Entry {
    Embedding embedding;
    std::uint64_t provenance = 0;
  };

  void add(Embedding embedding, std::uint64_t provenance);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Entry>& entries() const { return entries_; }
  const Embedding* find(const std::string& name) const;

  // The first `count` class embeddings (all when count is omitted).
  EmbeddingSet as_set(std::optional<std::size_t> count = std::nullopt) const;

 private:
  std::vector<Entry> entries_;
};

struct ClassTask {
  EmbeddingSet exemplars;
  Embedding z0;
  CandidateSpec spec;
  std::optional<FitConfig> config;  // overrides the shared config
};

// Thread cap from EMBEDFIT_THREADS (default: hardware concurrency, at least 1).
std::size_t thread_limit();

// Fits every task independently and registers them in input order. Work may
// be spread over up to `threads` workers; results do not depend on it.
ClassRegistry fit_sequential(const std::vector<ClassTask>& tasks, const EmbeddingSet& text_lookup,
                             const FitConfig& config, std::vector<FitReport>* reports = nullptr,
                             std::size_t threads = thread_limit());

}  // namespace embedfit
