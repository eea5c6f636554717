#pragma once

#include <functional>
#include <span>

#include "embedfit/embedding.hpp"
#include "embedfit/neighborhood.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit {

struct LossWeights {
  double lambda1 = 1.0;  // coarse alignment
  double lambda2 = 1.0;  // fine separation
};

struct LossBreakdown {
  double img_align = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
  double total = 0.0;
};

// A scalar loss together with its gradient with respect to the text embedding.
struct LossValue {
  double value = 0.0;
  Vec gradient;
};

inline constexpr double kZeroProjection = 1e-10;

// -(1/N) sum_i cos(x_i, z).
LossValue loss_img_align(std::span<const double> z, const EmbeddingSet& exemplars);

// (1/|C|) sum_p (1 - cos(U^T (z - c), U^T (p - c))) over the coarse part U.
LossValue loss_coarse(std::span<const double> z, const EmbeddingSet& coarse, const SubspacePart& part,
                      std::span<const double> center);

// (1/|F|) sum_n cos(U^T (z - c), U^T (n - c)) over the fine part U.
LossValue loss_fine(std::span<const double> z, const EmbeddingSet& fine, const SubspacePart& part,
                    std::span<const double> center);

struct TotalLoss {
  LossBreakdown breakdown;
  Vec gradient;
};

// The three-term objective for one class. The basis split is taken once at
// construction and held fixed for the lifetime of the object.
class Objective {
 public:
  // center_projections = false projects raw vectors (center taken as zero).
  Objective(EmbeddingSet exemplars, const NeighborhoodSpec& neighborhood, const SubspaceBasis& basis,
            LossWeights weights, bool center_projections = true);

  TotalLoss evaluate(std::span<const double> z) const;

  std::size_t dim() const { return dim_; }
  const SubspacePart& coarse_part() const { return coarse_part_; }
  const SubspacePart& fine_part() const { return fine_part_; }
  const Vec& center() const { return center_; }

 private:
  std::size_t dim_;
  EmbeddingSet exemplars_;
  EmbeddingSet coarse_;
  EmbeddingSet fine_;
  SubspacePart coarse_part_;
  SubspacePart fine_part_;
  Vec center_;
  LossWeights weights_;
};

TotalLoss total_loss(std::span<const double> z, const EmbeddingSet& exemplars,
                     const NeighborhoodSpec& neighborhood, const SubspaceBasis& basis, LossWeights weights);

using DifferentiableFn = std::function<LossValue(std::span<const double>)>;

// Central-difference check of fn's analytic gradient at z. Returns the max over
// coordinates of |g_fd - g_an| / max(1e-8, |g_fd| + |g_an|).
double gradcheck(const DifferentiableFn& fn, std::span<const double> z, double h = 1e-4);

}  // namespace embedfit
