#include "helpers.hpp"
#include "embedfit/io.hpp"
#include "embedfit/serialize.hpp"

using namespace embedfit;
using nlohmann::json;

namespace {

json minimal() {
  return json{{"class_name", "cls"},
              {"exemplars_file", "ex.emb1"},
              {"base_text_file", "base.emb1"},
              {"vocab_file", "vocab.emb1"},
              {"output_file", "out/cls.emb1"},
              {"candidates", {{"coarse", {"c0", "c1"}}, {"fine", {"f0"}}}}};
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("run config defaults and paths") {
    const RunConfig c = parse_run_config(minimal(), "/data/run");
    CHECK(c.class_name == "cls");
    CHECK(c.exemplars_file == std::filesystem::path("/data/run/ex.emb1"));
    CHECK(c.candidates.class_name == "cls");
    CHECK(c.candidates.coarse.size() == 2);
    CHECK(c.fit.eta == 1e-4);
    CHECK(c.fit.warmup_steps == 1000);
    CHECK(c.fit.total_steps == 5000);
    CHECK(c.fit.k == 1);
    CHECK(c.fit.keep_k == 5);
    CHECK(c.fit.mode == EncoderMode::Identity);

    json abs = minimal();
    abs["vocab_file"] = "/elsewhere/v.emb1";
    CHECK(parse_run_config(abs, "/data").vocab_file == std::filesystem::path("/elsewhere/v.emb1"));
  }

  TEST_CASE("run config rejects bad input") {
    json j = minimal();
    j["learning_rate"] = 0.1;
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j.erase("vocab_file");
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j["candidates"]["extra"] = json::array();
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j["k"] = -1;
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j["eta"] = "fast";
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j["mode"] = "clip";
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    j = minimal();
    j["warmup_steps"] = 0;
    CHECK_ERROR(parse_run_config(j, "."), "InvalidConfig");
    CHECK_ERROR(parse_run_config(json::array(), "."), "InvalidConfig");
  }

  TEST_CASE("run config round trip") {
    json j = minimal();
    j["lambda1"] = 0.1 + 0.2;
    j["eta"] = 3.3e-5;
    j["seed"] = 18446744073709551615ull;
    j["mode"] = "toy";
    j["renormalize_each_step"] = true;
    const RunConfig c = parse_run_config(j, "");
    const json printed = to_json(c);
    const RunConfig again = parse_run_config(json::parse(dump(printed)), "");
    CHECK(to_json(again) == printed);
    CHECK(again.fit.weights.lambda1 == 0.1 + 0.2);
    CHECK(again.fit.seed == 18446744073709551615ull);
  }

  TEST_CASE("files") {
    test::TempDir dir;
    io::write_text(dir / "bad.json", "{not json");
    CHECK_ERROR(read_json(dir / "bad.json"), "InvalidConfig");
    CHECK_ERROR(read_json(dir / "none.json"), "NotFound");
    io::write_text(dir / "obj.json", dump(minimal()));
    CHECK_ERROR(load_sequence_config(dir / "obj.json"), "InvalidConfig");
    io::write_text(dir / "seq.json", dump(json::array({minimal(), minimal()})));
    const auto seq = load_sequence_config(dir / "seq.json");
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].vocab_file == dir / "vocab.emb1");

    const RunConfig c = load_run_config(dir / "obj.json");
    CHECK_ERROR(check_run_inputs(c), "NotFound");
    for (const char* f : {"ex.emb1", "base.emb1", "vocab.emb1"}) io::write_emb1(EmbeddingSet(2), dir / f);
    CHECK_NOTHROW(check_run_inputs(c));
  }

  TEST_CASE("basis round trip") {
    Rng rng(70);
    SubspaceBasis b = fit_pca(test::random_set(rng, 5, 6));
    b.k = 2;
    const json j = to_json(b);
    CHECK(j.at("version") == kJsonVersion);
    const SubspaceBasis back = basis_from_json(json::parse(dump(j)));
    CHECK(back.components == b.components);
    CHECK(back.eigenvalues == b.eigenvalues);
    CHECK(back.center == b.center);
    CHECK(back.k == 2);
    CHECK(to_json(back) == j);

    json wrong = j;
    wrong["version"] = 7;
    CHECK_ERROR(basis_from_json(wrong), "BadVersion");
    wrong = j;
    wrong.erase("components");
    CHECK_ERROR(basis_from_json(wrong), "InvalidConfig");
  }

  TEST_CASE("eval artifacts") {
    EvalResult r;
    r.class_names = {"a", "b"};
    r.per_class = {{"a", 1, 3, 100.0 / 3.0}, {"b", 0, 0, 0.0}};
    r.correct = 1;
    r.total = 3;
    r.accuracy = 100.0 / 3.0;
    r.confusion = {{1, 2}, {0, 0}};
    const json j = to_json(r);
    CHECK(json::parse(dump(j)).at("accuracy").get<double>() == r.accuracy);
    CHECK(eval_csv(r) == "class,correct,total,accuracy\na,1,3,33.333333333333336\nb,0,0,0\n");

    const json ratios = to_json(PcRatioReport{{2.5, kInfiniteRatio}, {}});
    CHECK(ratios.at("ratios")[1] == "inf");
  }
}
