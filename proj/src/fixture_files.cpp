#include "embedfit/fixtures.hpp"
#include "embedfit/io.hpp"
#include "embedfit/serialize.hpp"

namespace embedfit::fixtures {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

io::LabelRows label_rows(const LabeledImageSet& set) {
  io::LabelRows rows;
  for (std::size_t i = 0; i < set.size(); ++i) rows.emplace_back(set.images[i].name, set.labels[i]);
  return rows;
}

void write_labeled(const LabeledImageSet& set, const fs::path& emb, const fs::path& csv) {
  io::write_emb1(set.images, emb);
  io::write_labels(label_rows(set), csv);
}

RunConfig run_config(const ClassFixture& c, const FitConfig& fit, const std::string& exemplars,
                     const std::string& output) {
  return {c.spec.class_name, exemplars, "base.emb1", "vocab.emb1", output, c.spec, fit};
}

void write_json(const json& j, const fs::path& path) { io::write_text(path, dump(j) + "\n"); }

}  // namespace

void write_fixture_files(const fs::path& dir) {
  {
    const fs::path sub = dir / "collapse";
    fs::create_directories(sub);
    const CollapseFixture f = collapse();
    io::write_emb1(f.vocab, sub / "vocab.emb1");
    io::write_emb1(f.classes.front().exemplars, sub / "exemplars.emb1");
    EmbeddingSet base(f.vocab.dim());
    for (const auto& c : f.classes) base.add(c.z0);
    io::write_emb1(base, sub / "base.emb1");
    write_labeled(f.held_out, sub / "held_out.emb1", sub / "held_out_labels.csv");

    FitConfig align = f.config;
    align.weights = {0.0, 0.0};
    json seq = json::array();
    for (const auto& c : f.classes) {
      const std::string tag = c.spec.class_name == "target_a" ? "a" : "b";
      const RunConfig full = run_config(c, f.config, "exemplars.emb1", "out/full.emb1");
      write_json(to_json(full), sub / ("run_" + tag + ".json"));
      write_json(to_json(run_config(c, align, "exemplars.emb1", "out/align.emb1")), sub / ("align_" + tag + ".json"));
      seq.push_back(to_json(full));
    }
    write_json(seq, sub / "seq.json");
  }
  {
    const fs::path sub = dir / "hierarchical";
    fs::create_directories(sub);
    const HierarchicalFixture f = hierarchical();
    write_labeled({f.set, f.labels}, sub / "set.emb1", sub / "labels.csv");
  }
  {
    const fs::path sub = dir / "continual";
    fs::create_directories(sub);
    const ContinualFixture f = continual();
    io::write_emb1(f.vocab, sub / "vocab.emb1");
    EmbeddingSet base(f.vocab.dim());
    LabeledImageSet images{EmbeddingSet(f.vocab.dim()), {}};
    json seq = json::array();
    for (std::size_t i = 0; i < f.classes.size(); ++i) {
      const auto& c = f.classes[i];
      base.add(c.z0);
      const std::string ex = "exemplars_" + c.spec.class_name + ".emb1";
      io::write_emb1(c.exemplars, sub / ex);
      seq.push_back(to_json(run_config(c, f.config, ex, "out/registry.emb1")));
      for (std::size_t j = 0; j < f.task_images[i].size(); ++j) {
        images.images.add(f.task_images[i].images[j]);
        images.labels.push_back(f.task_images[i].labels[j]);
      }
    }
    io::write_emb1(base, sub / "base.emb1");
    write_labeled(images, sub / "images.emb1", sub / "labels.csv");
    write_json(seq, sub / "seq.json");
  }
  {
    const fs::path sub = dir / "classify";
    fs::create_directories(sub);
    const ClassifyFixture f = three_class();
    io::write_emb1(f.classes, sub / "classes.emb1");
    write_labeled(f.images, sub / "images.emb1", sub / "labels.csv");
  }
}

}  // namespace embedfit::fixtures
