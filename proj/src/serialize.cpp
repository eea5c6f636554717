#include "embedfit/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "embedfit/error.hpp"
#include "embedfit/io.hpp"

namespace embedfit {
namespace {

using nlohmann::json;

const std::set<std::string> kRunKeys = {
    "class_name",   "exemplars_file", "base_text_file", "vocab_file", "candidates", "keep_k",
    "k",            "lambda1",        "lambda2",        "eta",        "warmup_steps", "total_steps",
    "seed",         "mode",           "output_file",    "renormalize_each_step", "center_projections",
    "log_interval"};

template <class T>
T get_field(const json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T require_field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("missing required field '") + key + "'");
  return get_field<T>(j, key, T{});
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "run config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kRunKeys.count(key)) throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
  }
  RunConfig c;
  c.class_name = require_field<std::string>(j, "class_name");
  c.exemplars_file = resolve(base_dir, require_field<std::string>(j, "exemplars_file"));
  c.base_text_file = resolve(base_dir, require_field<std::string>(j, "base_text_file"));
  c.vocab_file = resolve(base_dir, require_field<std::string>(j, "vocab_file"));
  c.output_file = resolve(base_dir, require_field<std::string>(j, "output_file"));

  if (!j.contains("candidates") || !j.at("candidates").is_object()) {
    throw Error(ErrorCode::InvalidConfig, "missing required object 'candidates'");
  }
  const auto& cand = j.at("candidates");
  for (const auto& [key, value] : cand.items()) {
    if (key != "coarse" && key != "fine") throw Error(ErrorCode::InvalidConfig, "unknown key 'candidates." + key + "'");
  }
  c.candidates.class_name = c.class_name;
  c.candidates.coarse = require_field<std::vector<std::string>>(cand, "coarse");
  c.candidates.fine = require_field<std::vector<std::string>>(cand, "fine");

  FitConfig& f = c.fit;
  f.keep_k = get_count(j, "keep_k", f.keep_k);
  f.k = get_count(j, "k", f.k);
  f.weights.lambda1 = get_field<double>(j, "lambda1", f.weights.lambda1);
  f.weights.lambda2 = get_field<double>(j, "lambda2", f.weights.lambda2);
  f.eta = get_field<double>(j, "eta", f.eta);
  f.warmup_steps = get_count(j, "warmup_steps", f.warmup_steps);
  f.total_steps = get_count(j, "total_steps", f.total_steps);
  f.seed = get_field<std::uint64_t>(j, "seed", f.seed);
  f.mode = parse_encoder_mode(get_field<std::string>(j, "mode", to_string(f.mode)));
  f.renormalize_each_step = get_field<bool>(j, "renormalize_each_step", f.renormalize_each_step);
  f.center_projections = get_field<bool>(j, "center_projections", f.center_projections);
  f.log_interval = get_count(j, "log_interval", f.log_interval);
  f.validate();
  return c;
}

json to_json(const RunConfig& c) {
  const FitConfig& f = c.fit;
  return json{{"class_name", c.class_name},
              {"exemplars_file", c.exemplars_file.string()},
              {"base_text_file", c.base_text_file.string()},
              {"vocab_file", c.vocab_file.string()},
              {"output_file", c.output_file.string()},
              {"candidates", {{"coarse", c.candidates.coarse}, {"fine", c.candidates.fine}}},
              {"keep_k", f.keep_k},
              {"k", f.k},
              {"lambda1", f.weights.lambda1},
              {"lambda2", f.weights.lambda2},
              {"eta", f.eta},
              {"warmup_steps", f.warmup_steps},
              {"total_steps", f.total_steps},
              {"seed", f.seed},
              {"mode", to_string(f.mode)},
              {"renormalize_each_step", f.renormalize_each_step},
              {"center_projections", f.center_projections},
              {"log_interval", f.log_interval}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json(path), path.parent_path());
}

std::vector<RunConfig> load_sequence_config(const std::filesystem::path& path) {
  const json j = read_json(path);
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, path.string() + ": sequence config must be a JSON array");
  std::vector<RunConfig> out;
  for (const auto& item : j) out.push_back(parse_run_config(item, path.parent_path()));
  return out;
}

void check_run_inputs(const RunConfig& c) {
  for (const auto* p : {&c.exemplars_file, &c.base_text_file, &c.vocab_file}) {
    if (!std::filesystem::is_regular_file(*p)) {
      throw Error(ErrorCode::NotFound, "input file '" + p->string() + "' does not exist");
    }
  }
}

json to_json(const SubspaceBasis& b) {
  json comps = json::array();
  for (const auto& u : b.components) comps.push_back(u);
  return json{{"version", kJsonVersion}, {"dim", b.dim}, {"center", b.center}, {"eigenvalues", b.eigenvalues}, {"components", comps},
              {"k", b.k == 0 ? json(nullptr) : json(b.k)}};
}

SubspaceBasis basis_from_json(const json& j) {
  SubspaceBasis b;
  if (j.contains("version") && j.at("version") != kJsonVersion) {
    throw Error(ErrorCode::BadVersion, "basis JSON version " + j.at("version").dump());
  }
  try {
    b.dim = j.at("dim").get<std::size_t>();
    b.center = j.at("center").get<Vec>();
    b.eigenvalues = j.at("eigenvalues").get<Vec>();
    b.components = j.at("components").get<std::vector<Vec>>();
    b.k = j.at("k").is_null() ? 0 : j.at("k").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("basis JSON: ") + e.what());
  }
  return b;
}

json to_json(const PcRatioReport& r) {
  json ratios = json::array();
  for (double x : r.ratios) ratios.push_back(std::isinf(x) ? json("inf") : json(x));
  return json{{"ratios", ratios}};
}

json to_json(const LossBreakdown& l) {
  return json{{"img_align", l.img_align}, {"coarse", l.coarse}, {"fine", l.fine}, {"total", l.total}};
}

json to_json(const FitConfig& f) {
  json j{{"eta", f.eta},
         {"warmup_steps", f.warmup_steps},
         {"total_steps", f.total_steps},
         {"lambda1", f.weights.lambda1},
         {"lambda2", f.weights.lambda2},
         {"k", f.k},
         {"keep_k", f.keep_k},
         {"seed", f.seed},
         {"mode", to_string(f.mode)},
         {"renormalize_each_step", f.renormalize_each_step},
         {"center_projections", f.center_projections},
         {"adam", {{"beta1", f.adam.beta1}, {"beta2", f.adam.beta2}, {"eps", f.adam.eps}}},
         {"log_interval", f.log_interval}};
  return j;
}

json to_json(const FitReport& r) {
  json traj = json::array();
  for (const auto& s : r.trajectory) {
    json row = to_json(s.loss);
    row["step"] = s.step;
    traj.push_back(row);
  }
  json j{{"version", kJsonVersion},
         {"class_name", r.class_name},
         {"config", to_json(r.config)},
         {"steps_run", r.steps_run},
         {"coarse", r.coarse_names},
         {"fine", r.fine_names},
         {"basis_rank", r.basis_rank},
         {"basis_checksum", hex(r.basis_checksum)},
         {"encoder_checksum_before", hex(r.encoder_checksum_before)},
         {"encoder_checksum_after", hex(r.encoder_checksum_after)},
         {"initial_embedding", r.initial.vector},
         {"final_embedding", r.final_embedding.vector},
         {"trajectory", traj}};
  if (r.final_token) j["final_token"] = *r.final_token;
  return j;
}

json to_json(const EvalResult& r) {
  json per_class = json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"class", c.name}, {"correct", c.correct}, {"total", c.total}, {"accuracy", c.accuracy}});
  }
  return json{{"version", kJsonVersion},  {"accuracy", r.accuracy},   {"correct", r.correct},     {"total", r.total},
              {"classes", r.class_names}, {"per_class", per_class}, {"confusion", r.confusion}};
}

json to_json(const std::vector<RankedItem>& ranked) {
  json out = json::array();
  for (const auto& item : ranked) out.push_back({{"name", item.name}, {"similarity", item.similarity}});
  return out;
}

std::string eval_csv(const EvalResult& r) {
  std::ostringstream out;
  out << "class,correct,total,accuracy\n";
  char buf[32];
  for (const auto& c : r.per_class) {
    std::snprintf(buf, sizeof buf, "%.17g", c.accuracy);
    out << c.name << ',' << c.correct << ',' << c.total << ',' << buf << '\n';
  }
  return out.str();
}

std::string dump(const json& j) { return j.dump(2); }

}  // namespace embedfit
