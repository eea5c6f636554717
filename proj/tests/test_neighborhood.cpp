#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "embedfit/neighborhood.hpp"

using namespace embedfit;

TEST_SUITE("neighborhood") {
  TEST_CASE("filter_fine_negatives examples") {
    const EmbeddingSet ex(2, {{"x", {1, 0}}});
    const EmbeddingSet cands(2, {{"b", {0, 1}}, {"a", {2, 0}}});
    const EmbeddingSet one = filter_fine_negatives(cands, ex, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].name == "a");

    const EmbeddingSet all = filter_fine_negatives(cands, ex, 5);
    REQUIRE(all.size() == 2);
    CHECK(all[0].name == "a");
    CHECK(all[1].name == "b");

    CHECK_ERROR(filter_fine_negatives(EmbeddingSet(2), ex, 1), "EmptyCandidates");
    CHECK_ERROR(filter_fine_negatives(cands, EmbeddingSet(2), 1), "EmptyExemplars");
  }

  TEST_CASE("filter_fine_negatives matches exhaustive scoring") {
    Rng rng(20);
    for (int t = 0; t < 10; ++t) {
      const EmbeddingSet cands = test::random_set(rng, 6, 6, "c");
      const EmbeddingSet ex = test::random_set(rng, 6, 4, "x");
      std::vector<double> score(6, 0.0);
      for (std::size_t i = 0; i < 6; ++i) {
        for (const auto& x : ex) {
          double ab = 0, aa = 0, bb = 0;
          for (std::size_t j = 0; j < 6; ++j) {
            ab += cands[i].vector[j] * x.vector[j];
            aa += cands[i].vector[j] * cands[i].vector[j];
            bb += x.vector[j] * x.vector[j];
          }
          score[i] += ab / std::sqrt(aa * bb) / 4.0;
        }
      }
      std::vector<std::size_t> order(6);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });

      const EmbeddingSet kept = filter_fine_negatives(cands, ex, 3);
      REQUIRE(kept.size() == 3);
      for (std::size_t i = 0; i < 3; ++i) CHECK(kept[i].name == cands[order[i]].name);

      const auto scored = score_candidates(cands, ex);
      for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(scored[i].score - score[i]) <= 1e-12);
    }
  }

  TEST_CASE("build_neighborhood") {
    Rng rng(21);
    EmbeddingSet vocab(5);
    for (const char* n : {"c0", "c1", "c2", "f0", "f1", "f2", "f3", "f4"}) vocab.add(n, test::random_vec(rng, 5));
    const EmbeddingSet ex = test::random_set(rng, 5, 3, "x");
    const CandidateSpec spec{"target", {"c0", "c1", "c2"}, {"f0", "f1", "f2", "f3", "f4"}};
    const NeighborhoodSpec nb = build_neighborhood(spec, vocab, ex, 3);
    CHECK(nb.coarse.size() == 3);
    CHECK(nb.fine.size() == 3);
    REQUIRE(nb.union_set.size() == 6);
    CHECK(nb.union_set[0].name == "c0");
    CHECK(nb.union_set[3].name == nb.fine[0].name);

    const std::string msg = [&] {
      try {
        build_neighborhood({"target", {"c0", "nowhere"}, {"f0"}}, vocab, ex, 1);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnresolvedName);
        return std::string(e.what());
      }
      return std::string();
    }();
    CHECK(msg.find("nowhere") != std::string::npos);

    CHECK_ERROR(build_neighborhood({"target", {}, {"f0"}}, vocab, ex, 1), "InsufficientCandidates");
    CHECK_ERROR(build_neighborhood({"target", {"c0"}, {"f0", "f1"}}, vocab, ex, 3), "InsufficientCandidates");
    CHECK_ERROR(build_neighborhood({"target", {"c0"}, {"c0"}}, vocab, ex, 1), "InvalidConfig");
  }

  TEST_CASE("the most image-like confusable survives pruning") {
    // Exemplars of a pastry; one fine candidate is a visually similar sweet.
    EmbeddingSet vocab(6);
    vocab.add("Indian sweet", {1, 0.2, 0, 0, 0, 0});
    vocab.add("dessert", {1, 0, 0.2, 0, 0, 0});
    vocab.add("snack", {1, 0, 0, 0.2, 0, 0});
    vocab.add("ladoo", {0.3, 0, 0, 0, 1, 0});
    vocab.add("malapua", {0.4, 0, 0, 0, 0.2, 1});
    vocab.add("jalebi", {0.2, 0, 0, 0, 0, -1});
    const EmbeddingSet ex(6, {{"s0", {0.3, 0, 0, 0, 0.1, 1}}, {"s1", {0.2, 0.1, 0, 0, 0.2, 0.9}}});
    const CandidateSpec spec{"anarsa", {"Indian sweet", "dessert", "snack"}, {"ladoo", "malapua", "jalebi"}};
    const NeighborhoodSpec nb = build_neighborhood(spec, vocab, ex, 1);
    REQUIRE(nb.fine.size() == 1);
    CHECK(nb.fine[0].name == "malapua");
    const auto scores = score_candidates(EmbeddingSet(6, {*vocab.find("ladoo"), *vocab.find("malapua"),
                                                         *vocab.find("jalebi")}),
                                         ex);
    CHECK(scores[1].score > scores[0].score);
    CHECK(scores[1].score > scores[2].score);
  }
}
