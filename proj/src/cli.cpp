#include "embedfit/cli.hpp"

#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embedfit/eval.hpp"
#include "embedfit/fixtures.hpp"
#include "embedfit/io.hpp"
#include "embedfit/neighborhood.hpp"
#include "embedfit/optimizer.hpp"
#include "embedfit/serialize.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector:
    case ErrorCode::NonFinite:
    case ErrorCode::ZeroProjection:
    case ErrorCode::DegenerateSet:
    case ErrorCode::SplitInfeasible:
    case ErrorCode::Io:
      return kExitRuntime;
    default:
      return kExitInvalid;
  }
}

namespace {

// Result text goes to the --out path when one is given, stdout otherwise.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  } else {
    io::write_text(out_path, text);
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

LabeledImageSet labeled(const std::string& emb_path, const std::string& labels_path) {
  return io::attach_labels(io::read_emb1(emb_path), io::read_labels(labels_path));
}

Embedding base_record(const RunConfig& c) {
  const EmbeddingSet base = io::read_emb1(c.base_text_file);
  const Embedding* z0 = base.find(c.class_name);
  if (!z0) {
    throw Error(ErrorCode::UnresolvedName,
                c.base_text_file.string() + " has no record named '" + c.class_name + "'");
  }
  return *z0;
}

json fit_summary(const FitReport& r, const fs::path& output_file) {
  return json{{"class_name", r.class_name},
              {"output_file", output_file.string()},
              {"steps", r.steps_run},
              {"initial_loss", to_json(r.trajectory.front().loss)},
              {"final_loss", to_json(r.trajectory.back().loss)}};
}

int cmd_fit(const std::string& config_path, const std::string& report_path, std::ostream& out) {
  const RunConfig c = load_run_config(config_path);
  check_run_inputs(c);
  const EmbeddingSet exemplars = io::read_emb1(c.exemplars_file);
  const EmbeddingSet vocab = io::read_emb1(c.vocab_file);
  const FitReport report = fit_class(exemplars, base_record(c), c.candidates, vocab, c.fit);
  io::upsert_emb1(c.output_file, {report.final_embedding});
  if (!report_path.empty()) io::write_text(report_path, dump(to_json(report)));
  out << dump(fit_summary(report, c.output_file)) << '\n';
  return kExitOk;
}

int cmd_fit_seq(const std::string& config_path, std::ostream& out) {
  const std::vector<RunConfig> runs = load_sequence_config(config_path);
  if (runs.empty()) {
    out << "[]\n";
    return kExitOk;
  }
  for (const auto& c : runs) {
    check_run_inputs(c);
    if (c.vocab_file != runs.front().vocab_file) {
      throw Error(ErrorCode::InvalidConfig, "class '" + c.class_name + "' uses a different vocab_file than the first entry");
    }
  }
  const EmbeddingSet vocab = io::read_emb1(runs.front().vocab_file);
  std::vector<ClassTask> tasks;
  for (const auto& c : runs) tasks.push_back({io::read_emb1(c.exemplars_file), base_record(c), c.candidates, c.fit});

  std::vector<FitReport> reports;
  const ClassRegistry registry = fit_sequential(tasks, vocab, runs.front().fit, &reports);

  // one write per output file, records in input order
  std::map<fs::path, std::vector<Embedding>> by_file;
  std::vector<fs::path> order;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!by_file.count(runs[i].output_file)) order.push_back(runs[i].output_file);
    by_file[runs[i].output_file].push_back(registry[i].embedding);
  }
  for (const auto& path : order) io::upsert_emb1(path, by_file[path]);

  json summary = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    json row = fit_summary(reports[i], runs[i].output_file);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(registry[i].provenance));
    row["provenance"] = hex;
    summary.push_back(row);
  }
  out << dump(summary) << '\n';
  return kExitOk;
}

int cmd_pca(const std::string& input, const std::string& labels_path, const CLI::Option* k_opt, std::size_t k,
            const std::string& out_path) {
  const EmbeddingSet set = io::read_emb1(input);
  SubspaceBasis basis = fit_pca(set);
  json extra;
  if (!labels_path.empty()) {
    const LabeledImageSet ls = io::attach_labels(set, io::read_labels(labels_path));
    const PcRatioReport report = pc_ratio_report(set, ls.labels, basis);
    const std::size_t suggested = suggest_k(report);
    extra["pc_ratio_report"] = to_json(report);
    extra["suggested_k"] = suggested;
    if (!*k_opt) {
      split(basis, suggested);
      basis.k = suggested;
    }
  }
  if (*k_opt) {
    split(basis, k);
    basis.k = k;
  }
  json j = to_json(basis);
  for (auto& [key, value] : extra.items()) j[key] = value;
  io::write_text(out_path, dump(j) + "\n");
  return kExitOk;
}

int cmd_classify(const std::string& classes, const std::string& images, const std::string& labels,
                 const std::string& out_path, std::ostream& out) {
  const EvalResult r = classify(labeled(images, labels), io::read_emb1(classes));
  if (!out_path.empty()) io::write_text(out_path, eval_csv(r));
  out << dump(to_json(r)) << '\n';
  return kExitOk;
}

int cmd_retrieve(const std::string& query, const std::string& gallery, const std::string& labels, std::size_t k,
                 std::ostream& out) {
  const Embedding q = io::read_record(query);
  const LabeledImageSet g = labeled(gallery, labels);
  const double p = precision_at_k(q, g, k, q.name);
  auto ranked = rank_by_similarity(q.vector, g.images);
  ranked.resize(k);
  json top = json::array();
  for (const auto& item : ranked) {
    top.push_back({{"name", item.name}, {"label", g.labels[item.index]}, {"similarity", item.similarity}});
  }
  out << dump(json{{"query", q.name}, {"k", k}, {"precision", p}, {"top", top}}) << '\n';
  return kExitOk;
}

int cmd_mean_image(const std::string& exemplars, const std::string& labels, const std::string& out_path,
                   std::ostream& out) {
  const EmbeddingSet baseline = mean_image_baseline(labeled(exemplars, labels));
  io::write_emb1(baseline, out_path);
  json names = json::array();
  for (const auto& e : baseline) names.push_back(e.name);
  out << dump(json{{"output_file", out_path}, {"classes", names}}) << '\n';
  return kExitOk;
}

int cmd_neighbors(const std::string& query, const std::string& vocab, std::size_t n, std::ostream& out) {
  out << dump(to_json(nearest_neighbors(io::read_record(query), io::read_emb1(vocab), n))) << '\n';
  return kExitOk;
}

int cmd_filter(const std::string& candidates, const std::string& exemplars, std::size_t keep, std::ostream& out) {
  const EmbeddingSet cands = io::read_emb1(candidates);
  const EmbeddingSet ex = io::read_emb1(exemplars);
  const EmbeddingSet kept = filter_fine_negatives(cands, ex, keep);
  const auto scores = score_candidates(kept, ex);
  json rows = json::array();
  for (const auto& s : scores) rows.push_back({{"name", s.name}, {"score", s.score}});
  out << dump(rows) << '\n';
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
  bool ok = true;
  json rows = json::array();
  for (const auto& r : fixtures::gradcheck_suite(seed)) {
    ok = ok && r.passed();
    rows.push_back({{"check", r.name},
                    {"instances", r.instances},
                    {"max_rel_error", r.worst},
                    {"tolerance", r.tolerance},
                    {"passed", r.passed()}});
  }
  out << dump(json{{"seed", seed}, {"passed", ok}, {"checks", rows}}) << '\n';
  return ok ? kExitOk : kExitRuntime;
}

int cmd_project2d(const std::string& input, const std::string& out_path, std::ostream& out) {
  const EmbeddingSet set = io::read_emb1(input);
  const auto coords = project_2d(set);
  std::ostringstream csv;
  csv << "name,x,y\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    csv << set[i].name << ',' << fmt(coords[i][0]) << ',' << fmt(coords[i][1]) << '\n';
  }
  emit(csv.str(), out_path, out);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit class text embeddings to a few exemplar images inside their semantic neighborhood."};
  app.name("embedfit");
  app.require_subcommand(1);

  std::string config, report, input, labels, out_path, classes, images, query, gallery, vocab, candidates,
      exemplars;
  std::size_t k = 0, n = 0, keep = 0;
  std::uint64_t seed = 0;

  auto* fit = app.add_subcommand("fit", "Fit one class from a run config");
  fit->add_option("--config", config, "Run config JSON")->required();
  fit->add_option("--report", report, "Write the full fit report JSON here");

  auto* fit_seq = app.add_subcommand("fit-seq", "Fit a list of classes one after another");
  fit_seq->add_option("--config", config, "JSON array of run configs")->required();

  auto* pca = app.add_subcommand("pca", "Fit PCA to an embedding file");
  pca->add_option("--input", input)->required();
  pca->add_option("--labels", labels, "name,label CSV; enables the PC ratio report");
  auto* k_opt = pca->add_option("--k", k, "Coarse/fine split index")->check(CLI::PositiveNumber);
  pca->add_option("--out", out_path)->required();

  auto* eval = app.add_subcommand("eval", "Evaluate class embeddings");
  eval->require_subcommand(1);
  auto* classify_cmd = eval->add_subcommand("classify", "Top-1 classification by cosine similarity");
  classify_cmd->add_option("--classes", classes)->required();
  classify_cmd->add_option("--images", images)->required();
  classify_cmd->add_option("--labels", labels)->required();
  classify_cmd->add_option("--out", out_path, "Per-class CSV");
  auto* retrieve = eval->add_subcommand("retrieve", "Precision@k of a query over a labeled gallery");
  retrieve->add_option("--query", query, "<file.emb1:name>")->required();
  retrieve->add_option("--gallery", gallery)->required();
  retrieve->add_option("--labels", labels)->required();
  retrieve->add_option("--k", k)->required()->check(CLI::PositiveNumber);

  auto* baseline = app.add_subcommand("baseline", "Baselines");
  baseline->require_subcommand(1);
  auto* mean_image = baseline->add_subcommand("mean-image", "Normalized mean exemplar per class");
  mean_image->add_option("--exemplars", exemplars)->required();
  mean_image->add_option("--labels", labels)->required();
  mean_image->add_option("--out", out_path)->required();

  auto* neighbors = app.add_subcommand("neighbors", "Nearest vocabulary entries");
  neighbors->add_option("--query", query, "<file.emb1:name>")->required();
  neighbors->add_option("--vocab", vocab)->required();
  neighbors->add_option("--n", n)->required()->check(CLI::PositiveNumber);

  auto* filter = app.add_subcommand("filter-negatives", "Keep the candidates closest to the exemplars");
  filter->add_option("--candidates", candidates)->required();
  filter->add_option("--exemplars", exemplars)->required();
  filter->add_option("--keep", keep)->required()->check(CLI::PositiveNumber);

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every analytic gradient");
  gradcheck_cmd->add_option("--seed", seed);

  auto* project = app.add_subcommand("project2d", "Top-2 PCA coordinates as CSV");
  project->add_option("--input", input)->required();
  project->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*fit) return cmd_fit(config, report, out);
    if (*fit_seq) return cmd_fit_seq(config, out);
    if (*pca) return cmd_pca(input, labels, k_opt, k, out_path);
    if (*classify_cmd) return cmd_classify(classes, images, labels, out_path, out);
    if (*retrieve) return cmd_retrieve(query, gallery, labels, k, out);
    if (*mean_image) return cmd_mean_image(exemplars, labels, out_path, out);
    if (*neighbors) return cmd_neighbors(query, vocab, n, out);
    if (*filter) return cmd_filter(candidates, exemplars, keep, out);
    if (*gradcheck_cmd) return cmd_gradcheck(seed, out);
    if (*project) return cmd_project2d(input, out_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace embedfit
