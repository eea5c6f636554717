#include "embedfit/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "embedfit/error.hpp"

namespace embedfit {
namespace {

constexpr double kJacobiTolerance = 1e-10;
constexpr double kRankTolerance = 1e-10;

double frobenius(const std::vector<double>& a, std::size_t n, bool off_only) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (off_only && i == j) continue;
      s += a[i * n + j] * a[i * n + j];
    }
  }
  return std::sqrt(s);
}

void orient(Vec& u) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (std::abs(u[i]) > std::abs(u[best])) best = i;
  }
  if (u[best] < 0.0) {
    for (double& x : u) x = -x;
  }
}

// Modified Gram-Schmidt in place, in the given order.
void reorthonormalize(std::vector<Vec>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double p = dot(rows[i], rows[j]);
      for (std::size_t c = 0; c < rows[i].size(); ++c) rows[i][c] -= p * rows[j][c];
    }
    const double n = norm(rows[i]);
    for (double& x : rows[i]) x /= n;
  }
}

}  // namespace

SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n) throw Error(ErrorCode::DimensionMismatch, "symmetric_eigen: matrix size");
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = frobenius(a, n, false);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (frobenius(a, n, true) <= kJacobiTolerance * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a[r * n + p];
          const double arq = a[r * n + q];
          a[r * n + p] = c * arp - s * arq;
          a[r * n + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a[p * n + r];
          const double aqr = a[q * n + r];
          a[p * n + r] = c * apr - s * aqr;
          a[q * n + r] = s * apr + c * aqr;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v[r * n + p];
          const double vrq = v[r * n + q];
          v[r * n + p] = c * vrp - s * vrq;
          v[r * n + q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] > a[j * n + j]; });
  SymmetricEigen out;
  for (std::size_t idx : order) {
    out.values.push_back(a[idx * n + idx]);
    Vec col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = v[r * n + idx];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

SubspaceBasis fit_pca(const EmbeddingSet& set, bool center, PcaRoute route) {
  const std::size_t n = set.size();
  const std::size_t d = set.dim();
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "PCA needs at least 2 points, got " + std::to_string(n));

  SubspaceBasis basis;
  basis.dim = d;
  basis.center.assign(d, 0.0);
  if (center) basis.center = mean_embedding(set, false).vector;

  std::vector<Vec> x(n, Vec(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) x[i][c] = set[i].vector[c] - basis.center[c];
  }
  const double divisor = static_cast<double>(n - 1);
  const std::size_t max_rank = std::min(center ? n - 1 : n, d);
  if (route == PcaRoute::Auto) route = n < d ? PcaRoute::Gram : PcaRoute::Covariance;

  Vec values;
  std::vector<Vec> comps;
  if (route == PcaRoute::Gram) {
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        gram[i * n + j] = gram[j * n + i] = dot(x[i], x[j]) / divisor;
      }
    }
    auto eig = symmetric_eigen(std::move(gram), n);
    values = std::move(eig.values);
    for (std::size_t m = 0; m < values.size(); ++m) {
      Vec u(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) u[c] += eig.vectors[m][i] * x[i][c];
      }
      comps.push_back(std::move(u));
    }
  } else {
    std::vector<double> cov(d * d, 0.0);
    for (const auto& row : x) {
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) cov[a * d + b] += row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) cov[b * d + a] = cov[a * d + b] /= divisor;
    }
    auto eig = symmetric_eigen(std::move(cov), d);
    values = std::move(eig.values);
    comps = std::move(eig.vectors);
  }

  if (values.empty() || !(values[0] > 0.0)) {
    throw Error(ErrorCode::DegenerateSet, "all points coincide; no nonzero variance");
  }
  const double cutoff = kRankTolerance * values[0];
  for (std::size_t m = 0; m < values.size() && basis.components.size() < max_rank; ++m) {
    if (!(values[m] >= cutoff)) break;
    basis.eigenvalues.push_back(values[m]);
    basis.components.push_back(std::move(comps[m]));
  }
  if (route == PcaRoute::Gram) {
    // Gram-route vectors are X^T v, orthogonal up to rounding; normalize them.
    reorthonormalize(basis.components);
  }
  for (auto& u : basis.components) orient(u);
  basis.k = basis.rank() >= 2 ? 1 : 0;
  return basis;
}

std::pair<SubspacePart, SubspacePart> split(const SubspaceBasis& basis, std::size_t k) {
  if (k < 1 || k >= basis.rank()) {
    throw Error(ErrorCode::InvalidSplit, "split index " + std::to_string(k) + " outside [1, " +
                                             std::to_string(basis.rank()) + ")");
  }
  SubspacePart coarse{basis.dim, {basis.components.begin(), basis.components.begin() + static_cast<std::ptrdiff_t>(k)}};
  SubspacePart fine{basis.dim, {basis.components.begin() + static_cast<std::ptrdiff_t>(k), basis.components.end()}};
  return {std::move(coarse), std::move(fine)};
}

SubspacePart full_part(const SubspaceBasis& basis) { return {basis.dim, basis.components}; }

Vec project(const SubspacePart& part, std::span<const double> z, std::span<const double> center) {
  require_same_dim(z.size(), part.dim, "project");
  require_same_dim(center.size(), part.dim, "project center");
  Vec out(part.size(), 0.0);
  for (std::size_t m = 0; m < part.size(); ++m) {
    double s = 0.0;
    for (std::size_t c = 0; c < part.dim; ++c) s += part.components[m][c] * (z[c] - center[c]);
    out[m] = s;
  }
  return out;
}

PcRatioReport pc_ratio_report(const EmbeddingSet& set, const std::vector<std::string>& labels,
                              const SubspaceBasis& basis) {
  if (labels.size() != set.size()) {
    throw Error(ErrorCode::InsufficientLabels, "expected one label per embedding");
  }
  require_same_dim(set.dim(), basis.dim, "pc_ratio_report");
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  if (counts.size() < 2) throw Error(ErrorCode::InsufficientLabels, "need at least 2 categories");
  for (const auto& [label, count] : counts) {
    if (count < 2) throw Error(ErrorCode::InsufficientLabels, "category '" + label + "' has fewer than 2 members");
  }

  PcRatioReport report{{}, labels};
  const std::size_t n = set.size();
  for (const auto& u : basis.components) {
    Vec coord(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < basis.dim; ++c) s += u[c] * (set[i].vector[c] - basis.center[c]);
      coord[i] = s;
    }
    double cross = 0.0, within = 0.0;
    std::size_t n_cross = 0, n_within = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double diff = std::abs(coord[i] - coord[j]);
        if (labels[i] == labels[j]) {
          within += diff;
          ++n_within;
        } else {
          cross += diff;
          ++n_cross;
        }
      }
    }
    const double within_mean = within / static_cast<double>(n_within);
    const double cross_mean = cross / static_cast<double>(n_cross);
    report.ratios.push_back(within_mean > 0.0 ? cross_mean / within_mean : kInfiniteRatio);
  }
  return report;
}

std::size_t suggest_k(const PcRatioReport& report, double threshold) {
  std::size_t lead = 0;
  while (lead < report.ratios.size() && report.ratios[lead] >= threshold) ++lead;
  const std::size_t cap = report.ratios.size() > 1 ? report.ratios.size() - 1 : 1;
  return std::min(std::max<std::size_t>(lead, 1), cap);
}

}  // namespace embedfit
