#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "embedfit/embedding.hpp"

namespace embedfit {

// Orthonormal principal basis of a fitted embedding set. Components are stored
// as rows, ordered by nonincreasing eigenvalue.
struct SubspaceBasis {
  std::size_t dim = 0;
  Vec center;
  std::vector<Vec> components;
  Vec eigenvalues;
  // Number of leading components forming the coarse part; 0 when the basis
  // has a single component and cannot be split.
  std::size_t k = 0;

  std::size_t rank() const { return components.size(); }
};

// A slice of a basis: the coarse or the fine part.
struct SubspacePart {
  std::size_t dim = 0;
  std::vector<Vec> components;

  std::size_t size() const { return components.size(); }
};

enum class PcaRoute { Auto, Covariance, Gram };

// Eigen-decomposition of a dense symmetric n x n row-major matrix by cyclic
// Jacobi rotations. Pivots are swept in row-major (p < q) order, at most
// kMaxSweeps sweeps, stopping once the off-diagonal Frobenius norm falls to
// 1e-10 of the full Frobenius norm. Eigenvalues come back in nonincreasing
// order (stable with respect to the diagonal index); eigenvectors are the
// matching columns, returned as rows.
struct SymmetricEigen {
  Vec values;
  std::vector<Vec> vectors;
};
inline constexpr int kMaxJacobiSweeps = 100;
SymmetricEigen symmetric_eigen(std::vector<double> matrix, std::size_t n);

// Sample-covariance PCA (divisor n - 1). Components whose eigenvalue falls
// below 1e-10 times the leading one are dropped. Each component is oriented
// so that its largest-magnitude coordinate is positive.
SubspaceBasis fit_pca(const EmbeddingSet& set, bool center = true, PcaRoute route = PcaRoute::Auto);

// Returns (coarse, fine) = (first k components, remaining components).
std::pair<SubspacePart, SubspacePart> split(const SubspaceBasis& basis, std::size_t k);

// part^T (z - center).
Vec project(const SubspacePart& part, std::span<const double> z, std::span<const double> center);

SubspacePart full_part(const SubspaceBasis& basis);

inline constexpr double kInfiniteRatio = std::numeric_limits<double>::infinity();

struct PcRatioReport {
  std::vector<double> ratios;
  std::vector<std::string> labels;
};

// Per component: mean |coordinate difference| over cross-category pairs divided
// by the same mean over within-category pairs. A zero within-category mean is
// reported as kInfiniteRatio.
PcRatioReport pc_ratio_report(const EmbeddingSet& set, const std::vector<std::string>& labels,
                              const SubspaceBasis& basis);

// Length of the leading run of components whose ratio reaches threshold,
// floored at 1 and capped at rank - 1.
std::size_t suggest_k(const PcRatioReport& report, double threshold = 3.0);

}  // namespace embedfit
