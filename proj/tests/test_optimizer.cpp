#include <cmath>
#include <cstdlib>

#include "helpers.hpp"
#include "embedfit/fixtures.hpp"
#include "embedfit/optimizer.hpp"

using namespace embedfit;
using doctest::Approx;

namespace {

// Small neighborhood around the first two axes of a 4-d space.
EmbeddingSet small_vocab() {
  return EmbeddingSet(4, {{"c0", {1, 0.2, 0.5, 0}},
                          {"c1", {1, -0.1, 0.4, 0.3}},
                          {"f0", {0.2, 1, 0, 0.6}},
                          {"f1", {0.1, 0.8, -0.5, 0.2}}});
}

const CandidateSpec kSpec{"target", {"c0", "c1"}, {"f0", "f1"}};

bool same_report(const FitReport& a, const FitReport& b) {
  if (a.final_embedding.vector != b.final_embedding.vector) return false;
  if (a.trajectory.size() != b.trajectory.size()) return false;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    const auto& x = a.trajectory[i].loss;
    const auto& y = b.trajectory[i].loss;
    if (x.total != y.total || x.img_align != y.img_align || x.coarse != y.coarse || x.fine != y.fine) return false;
  }
  return a.basis_checksum == b.basis_checksum && a.final_token == b.final_token;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("warm-up schedule") {
    const FitConfig c;
    CHECK(lr_at(c, 0) == Approx(1e-7).epsilon(1e-12));
    CHECK(lr_at(c, 999) == 1e-4);
    CHECK(lr_at(c, 4999) == 1e-4);
    CHECK(lr_at(c, 499) == Approx(0.5e-4).epsilon(1e-12));
  }

  TEST_CASE("first Adam step") {
    AdamState s(2);
    const Vec u = adam_step(s, Vec{1, -1}, 1e-3, {});
    CHECK(u[0] == Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-12));
    CHECK(u[1] == Approx(1e-3 / (1 + 1e-8)).epsilon(1e-12));
    CHECK(s.t == 1);

    AdamState z(3);
    for (double x : adam_step(z, Vec{0, 0, 0}, 1e-3, {})) CHECK(x == 0.0);
    CHECK_ERROR(adam_step(z, Vec{1, 2}, 1e-3, {}), "DimensionMismatch");
  }

  TEST_CASE("Adam matches a loop oracle") {
    Rng rng(40);
    const std::size_t d = 7;
    AdamState s(d);
    Vec m(d, 0), v(d, 0), p(d, 0), q(d, 0);
    for (int t = 1; t <= 10; ++t) {
      const Vec g = test::random_vec(rng, d);
      const double lr = 1e-3 * t;
      const Vec u = adam_step(s, g, lr, {});
      for (std::size_t i = 0; i < d; ++i) {
        m[i] = 0.9 * m[i] + 0.1 * g[i];
        v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
        const double mh = m[i] / (1 - std::pow(0.9, t));
        const double vh = v[i] / (1 - std::pow(0.999, t));
        p[i] += -lr * mh / (std::sqrt(vh) + 1e-8);
        q[i] += u[i];
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(std::abs(s.m[i] - m[i]) <= 1e-10);
      CHECK(std::abs(s.v[i] - v[i]) <= 1e-10);
      CHECK(std::abs(q[i] - p[i]) <= 1e-10);
    }
  }

  TEST_CASE("alignment-only fit turns z toward the exemplar") {
    FitConfig c;
    c.weights = {0, 0};
    c.keep_k = 2;
    const EmbeddingSet ex(4, {{"x", {0, 0, 0, 1}}});
    const Embedding z0{"target", {0.1, 0, 0, 0}};
    const FitReport r = fit_class(ex, z0, kSpec, small_vocab(), c);
    CHECK(cosine_sim(r.final_embedding.vector, ex[0].vector) >= 0.99);
    CHECK(r.steps_run == 5000);
    CHECK(r.trajectory.size() == 5000 / c.log_interval + 1);
    CHECK(r.trajectory.front().step == 0);
    CHECK(r.trajectory.back().step == 5000);
    CHECK(r.initial.vector == z0.vector);
  }

  TEST_CASE("identical runs are bitwise identical") {
    FitConfig c;
    c.keep_k = 2;
    c.total_steps = 300;
    c.warmup_steps = 100;
    c.eta = 1e-2;
    const EmbeddingSet ex(4, {{"x", {0.3, 0.1, 0.2, 1}}, {"y", {0.2, 0.3, 0.1, 0.9}}});
    const Embedding z0{"target", {0.5, 0.5, 0.1, 0.1}};
    CHECK(same_report(fit_class(ex, z0, kSpec, small_vocab(), c), fit_class(ex, z0, kSpec, small_vocab(), c)));

    c.mode = EncoderMode::Toy;
    c.seed = 9;
    c.toy_shape.token_dim = 6;
    const FitReport a = fit_class(ex, z0, kSpec, small_vocab(), c);
    const FitReport b = fit_class(ex, z0, kSpec, small_vocab(), c);
    CHECK(same_report(a, b));
    REQUIRE(a.final_token.has_value());
    CHECK(a.final_token->size() == 6);
    CHECK(a.final_embedding.dim() == 4);
    CHECK(a.encoder_checksum_before == a.encoder_checksum_after);
  }

  TEST_CASE("renormalization keeps the initial norm") {
    FitConfig c;
    c.keep_k = 2;
    c.total_steps = 200;
    c.warmup_steps = 10;
    c.eta = 1e-2;
    c.renormalize_each_step = true;
    const EmbeddingSet ex(4, {{"x", {0, 0, 0, 1}}});
    const FitReport r = fit_class(ex, {"target", {3, 0, 4, 0}}, kSpec, small_vocab(), c);
    CHECK(norm(r.final_embedding.vector) == Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("config validation") {
    FitConfig c;
    CHECK_NOTHROW(c.validate());
    c.warmup_steps = 0;
    CHECK_ERROR(c.validate(), "InvalidConfig");
    c = {};
    c.warmup_steps = 6000;
    CHECK_ERROR(c.validate(), "InvalidConfig");
    c = {};
    c.eta = -1;
    CHECK_ERROR(c.validate(), "InvalidConfig");
    c = {};
    c.k = 0;
    CHECK_ERROR(c.validate(), "InvalidConfig");

    FitConfig big;
    big.keep_k = 2;
    big.k = 3;
    const EmbeddingSet ex(4, {{"x", {0, 0, 0, 1}}});
    CHECK_ERROR(fit_class(ex, {"target", {1, 0, 0, 0}}, kSpec, small_vocab(), big), "InvalidSplit");
  }

  TEST_CASE("registry") {
    ClassRegistry reg;
    CHECK(reg.empty());
    CHECK(reg.as_set().empty());
    reg.add({"a", {1, 0}}, 1);
    reg.add({"b", {0, 1}}, 2);
    CHECK_ERROR(reg.add({"a", {1, 1}}, 3), "DuplicateClass");
    CHECK(reg.as_set(1).size() == 1);
    CHECK(reg[1].provenance == 2);
    CHECK(reg.find("b")->vector == Vec{0, 1});
  }

  TEST_CASE("sequential fitting has no forgetting and no order dependence") {
    const fixtures::ContinualFixture f = fixtures::continual();
    std::vector<ClassTask> tasks;
    for (const auto& c : f.classes) tasks.push_back({c.exemplars, c.z0, c.spec, std::nullopt});

    CHECK(fit_sequential({}, f.vocab, f.config).empty());
    std::vector<ClassTask> dup{tasks[0], tasks[0]};
    CHECK_ERROR(fit_sequential(dup, f.vocab, f.config), "DuplicateClass");

    std::vector<FitReport> reports;
    const ClassRegistry all = fit_sequential(tasks, f.vocab, f.config, &reports, 1);
    REQUIRE(all.size() == 5);
    CHECK(reports.size() == 5);
    const ClassRegistry threaded = fit_sequential(tasks, f.vocab, f.config, nullptr, 4);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(threaded[i].embedding.vector == all[i].embedding.vector);
      CHECK(threaded[i].provenance == all[i].provenance);
    }

    const ClassRegistry first = fit_sequential({tasks[0]}, f.vocab, f.config);
    CHECK(first[0].embedding.vector == all[0].embedding.vector);

    std::vector<ClassTask> reversed(tasks.rbegin(), tasks.rend());
    const ClassRegistry rev = fit_sequential(reversed, f.vocab, f.config);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(rev.find(tasks[i].spec.class_name)->vector == all[i].embedding.vector);
    }
  }

  TEST_CASE("thread cap comes from the environment") {
    ::setenv("EMBEDFIT_THREADS", "3", 1);
    CHECK(thread_limit() == 3);
    ::setenv("EMBEDFIT_THREADS", "zero", 1);
    CHECK(thread_limit() >= 1);
    ::unsetenv("EMBEDFIT_THREADS");
  }
}
