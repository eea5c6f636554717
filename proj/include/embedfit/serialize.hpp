#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "embedfit/eval.hpp"
#include "embedfit/neighborhood.hpp"
#include "embedfit/optimizer.hpp"
#include "embedfit/subspace.hpp"

namespace embedfit {

// Written into every JSON artifact this library produces.
inline constexpr int kJsonVersion = 1;

// One class-fitting run as described by a JSON config file. Relative paths are
// resolved against the directory holding the config.
struct RunConfig {
  std::string class_name;
  std::filesystem::path exemplars_file;
  std::filesystem::path base_text_file;
  std::filesystem::path vocab_file;
  std::filesystem::path output_file;
  CandidateSpec candidates;
  FitConfig fit;
};

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const RunConfig& config);

nlohmann::json read_json(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);
// A JSON array of run configs.
std::vector<RunConfig> load_sequence_config(const std::filesystem::path& path);

// Input files must exist and agree on dimension.
void check_run_inputs(const RunConfig& config);

nlohmann::json to_json(const SubspaceBasis& basis);
SubspaceBasis basis_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PcRatioReport& report);
nlohmann::json to_json(const LossBreakdown& loss);
nlohmann::json to_json(const FitConfig& config);
nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const EvalResult& result);
nlohmann::json to_json(const std::vector<RankedItem>& ranked);

// Per-class rows: class,correct,total,accuracy.
std::string eval_csv(const EvalResult& result);

// JSON text with doubles at full round-trip precision.
std::string dump(const nlohmann::json& j);

}  // namespace embedfit
