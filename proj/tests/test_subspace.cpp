#include <cmath>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "embedfit/subspace.hpp"

using namespace embedfit;
using doctest::Approx;

namespace {

// Eigenvalues of the sample covariance, descending, computed with Eigen.
Eigen::VectorXd eigen_oracle(const EmbeddingSet& set) {
  const auto n = static_cast<Eigen::Index>(set.size());
  const auto d = static_cast<Eigen::Index>(set.dim());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = set[static_cast<std::size_t>(i)].vector[static_cast<std::size_t>(j)];
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  return solver.eigenvalues().reverse();
}

double max_orthonormality_error(const SubspaceBasis& b) {
  double worst = 0;
  for (std::size_t i = 0; i < b.rank(); ++i) {
    for (std::size_t j = 0; j < b.rank(); ++j) {
      worst = std::max(worst, std::abs(dot(b.components[i], b.components[j]) - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

// Brute-force pair enumeration of the cross/within ratio along one axis.
double ratio_oracle(const std::vector<double>& coord, const std::vector<std::string>& labels) {
  double cross = 0, within = 0;
  int nc = 0, nw = 0;
  for (std::size_t i = 0; i < coord.size(); ++i) {
    for (std::size_t j = 0; j < coord.size(); ++j) {
      if (i == j) continue;
      const double diff = std::abs(coord[i] - coord[j]);
      if (labels[i] == labels[j]) {
        within += diff;
        ++nw;
      } else {
        cross += diff;
        ++nc;
      }
    }
  }
  return (cross / nc) / (within / nw);
}

}  // namespace

TEST_SUITE("subspace") {
  TEST_CASE("fit_pca examples") {
    const SubspaceBasis two = fit_pca(EmbeddingSet(2, {{"a", {1, 0}}, {"b", {-1, 0}}}));
    REQUIRE(two.rank() == 1);
    CHECK(two.eigenvalues[0] == Approx(2.0));
    CHECK(two.components[0][0] == Approx(1.0));
    CHECK(std::abs(two.components[0][1]) <= 1e-12);

    const EmbeddingSet simplex(3, {{"x", {1, 0, 0}}, {"y", {0, 1, 0}}, {"z", {0, 0, 1}}});
    const SubspaceBasis s = fit_pca(simplex);
    REQUIRE(s.rank() == 2);
    CHECK(s.eigenvalues[0] == Approx(0.5));
    CHECK(s.eigenvalues[1] == Approx(0.5));
    const Eigen::VectorXd oracle = eigen_oracle(simplex);
    CHECK(std::abs(oracle[0] - 0.5) <= 1e-12);
    CHECK(std::abs(oracle[2]) <= 1e-12);

    CHECK_ERROR(fit_pca(EmbeddingSet(2, {{"a", {1, 0}}})), "TooFewPoints");
    CHECK_ERROR(fit_pca(EmbeddingSet(2, {{"a", {1, 0}}, {"b", {1, 0}}})), "DegenerateSet");
  }

  TEST_CASE("eigenvalues match Eigen and projections reproduce them") {
    Rng rng(10);
    for (auto [n, d] : {std::pair{6, 4}, {12, 5}, {5, 20}, {30, 8}}) {
      const EmbeddingSet set = test::random_set(rng, static_cast<std::size_t>(d), static_cast<std::size_t>(n));
      const SubspaceBasis b = fit_pca(set);
      const Eigen::VectorXd oracle = eigen_oracle(set);
      for (std::size_t i = 0; i < b.rank(); ++i) CHECK(std::abs(b.eigenvalues[i] - oracle[static_cast<Eigen::Index>(i)]) <= 1e-9);
      CHECK(b.rank() == static_cast<std::size_t>(std::min(n - 1, d)));
      CHECK(max_orthonormality_error(b) <= 1e-6);

      // Per-component variance of projected coordinates equals the eigenvalue.
      const SubspacePart full = full_part(b);
      std::vector<Vec> coords;
      for (const auto& e : set) coords.push_back(project(full, e.vector, b.center));
      double total_var = 0;
      for (std::size_t c = 0; c < b.rank(); ++c) {
        double mean = 0, ss = 0;
        for (const auto& p : coords) mean += p[c];
        mean /= n;
        for (const auto& p : coords) ss += (p[c] - mean) * (p[c] - mean);
        CHECK(std::abs(ss / (n - 1) - b.eigenvalues[c]) <= 1e-6);
        total_var += b.eigenvalues[c];
      }
      // Trace identity against the raw per-dimension variances.
      double trace = 0;
      for (std::size_t j = 0; j < set.dim(); ++j) {
        double mean = 0, ss = 0;
        for (const auto& e : set) mean += e.vector[j];
        mean /= n;
        for (const auto& e : set) ss += (e.vector[j] - mean) * (e.vector[j] - mean);
        trace += ss / (n - 1);
      }
      CHECK(std::abs(trace - total_var) <= 1e-5);
      // Full-rank reconstruction.
      for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = 0; j < set.dim(); ++j) {
          double r = b.center[j];
          for (std::size_t c = 0; c < b.rank(); ++c) r += coords[i][c] * b.components[c][j];
          CHECK(std::abs(r - set[i].vector[j]) <= 1e-5);
        }
      }
    }
  }

  TEST_CASE("Gram and covariance routes agree and the sign convention is deterministic") {
    Rng rng(11);
    for (int t = 0; t < 5; ++t) {
      const EmbeddingSet set = test::random_set(rng, 10, 7);
      const SubspaceBasis cov = fit_pca(set, true, PcaRoute::Covariance);
      const SubspaceBasis gram = fit_pca(set, true, PcaRoute::Gram);
      REQUIRE(cov.rank() == gram.rank());
      for (std::size_t c = 0; c < cov.rank(); ++c) {
        CHECK(std::abs(cov.eigenvalues[c] - gram.eigenvalues[c]) <= 1e-6);
        for (std::size_t j = 0; j < 10; ++j) CHECK(std::abs(cov.components[c][j] - gram.components[c][j]) <= 1e-6);
        std::size_t arg = 0;
        for (std::size_t j = 1; j < 10; ++j) {
          if (std::abs(cov.components[c][j]) > std::abs(cov.components[c][arg])) arg = j;
        }
        CHECK(cov.components[c][arg] > 0);
      }
      const SubspaceBasis again = fit_pca(set);
      const SubspaceBasis first = fit_pca(set);
      CHECK(again.components == first.components);
      CHECK(again.eigenvalues == first.eigenvalues);
    }
  }

  TEST_CASE("uncentered PCA keeps the origin") {
    const SubspaceBasis b = fit_pca(EmbeddingSet(2, {{"a", {2, 0}}, {"b", {3, 0}}}), false);
    CHECK(b.center == Vec{0, 0});
    CHECK(b.components[0][0] == Approx(1.0));
  }

  TEST_CASE("symmetric_eigen on a known matrix") {
    const SymmetricEigen e = symmetric_eigen({2, 1, 1, 2}, 2);
    CHECK(e.values[0] == Approx(3.0));
    CHECK(e.values[1] == Approx(1.0));
    CHECK(std::abs(std::abs(e.vectors[0][0]) - std::sqrt(0.5)) <= 1e-12);
    CHECK_ERROR(symmetric_eigen({1, 2, 3}, 2), "DimensionMismatch");
  }

  TEST_CASE("split") {
    Rng rng(12);
    const SubspaceBasis b5 = fit_pca(test::random_set(rng, 8, 6));
    REQUIRE(b5.rank() == 5);
    const auto [coarse, fine] = split(b5, 1);
    CHECK(coarse.size() == 1);
    CHECK(fine.size() == 4);
    CHECK(coarse.components[0] == b5.components[0]);
    CHECK_ERROR(split(b5, 5), "InvalidSplit");
    CHECK_ERROR(split(b5, 0), "InvalidSplit");

    const SubspaceBasis b2 = fit_pca(test::random_set(rng, 4, 3));
    const auto [c2, f2] = split(b2, 1);
    CHECK(std::abs(dot(c2.components[0], f2.components[0])) <= 1e-9);
  }

  TEST_CASE("project") {
    const SubspaceBasis b = fit_pca(EmbeddingSet(3, {{"a", {1, 0, 0}}, {"b", {-1, 0, 0}}}));
    const SubspacePart part = full_part(b);
    CHECK(project(part, b.components[0], Vec{0, 0, 0})[0] == Approx(1.0));
    CHECK(std::abs(project(part, Vec{0, 3, -2}, Vec{0, 0, 0})[0]) <= 1e-7);

    Rng rng(13);
    const SubspaceBasis rb = fit_pca(test::random_set(rng, 12, 6));
    const SubspacePart rp = full_part(rb);
    for (int t = 0; t < 10; ++t) {
      const Vec z = test::random_vec(rng, 12);
      const Vec p = project(rp, z, rb.center);
      double lhs = 0, rhs = 0;
      for (double x : p) lhs += x * x;
      for (std::size_t j = 0; j < 12; ++j) rhs += (z[j] - rb.center[j]) * (z[j] - rb.center[j]);
      CHECK(lhs <= rhs + 1e-6);
    }
  }

  TEST_CASE("pc_ratio_report") {
    const EmbeddingSet set(1, {{"a", {-1}}, {"b", {-1.1}}, {"c", {1}}, {"d", {1.1}}});
    const std::vector<std::string> labels{"neg", "neg", "pos", "pos"};
    const SubspaceBasis b = fit_pca(set);
    const PcRatioReport r = pc_ratio_report(set, labels, b);
    REQUIRE(r.ratios.size() == 1);
    CHECK(std::abs(r.ratios[0] - ratio_oracle({-1, -1.1, 1, 1.1}, labels)) <= 1e-12);
    CHECK(r.ratios[0] == Approx(21.0));

    const EmbeddingSet flat(2, {{"a", {0, 0}}, {"b", {0, 0}}, {"c", {1, 1}}, {"d", {1, 1}}});
    const PcRatioReport inf = pc_ratio_report(flat, labels, fit_pca(flat));
    CHECK(inf.ratios[0] == kInfiniteRatio);

    CHECK_ERROR(pc_ratio_report(set, {"a", "a", "a", "a"}, b), "InsufficientLabels");
    CHECK_ERROR(pc_ratio_report(set, {"a", "b"}, b), "InsufficientLabels");
  }

  TEST_CASE("suggest_k") {
    CHECK(suggest_k({{5.02, 1.62, 1.6, 1.6}, {}}) == 1);
    CHECK(suggest_k({{10, 9, 1, 1}, {}}) == 2);
    CHECK(suggest_k({{1, 1, 1}, {}}) == 1);
    CHECK(suggest_k({{10, 10, 10}, {}}) == 2);
  }
}
