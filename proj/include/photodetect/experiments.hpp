#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "photodetect/csv.hpp"

namespace photodetect::cli {

inline constexpr const char* kVersion = "1.0.0";
// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "PHOTODETECT_OUT_DIR";

const std::vector<std::string>& experiment_names();

/// One experiment run. `parameters` holds only the keys the user supplied;
/// missing keys take the experiment's defaults.
struct ExperimentConfig {
  std::string experiment;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::string output_path;

  // Accepts {experiment, seed, output_path, parameters}; any other key is an error.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  // Echo with every default filled in; feeding it back reproduces the run.
  nlohmann::json to_json() const;
  // Rejects unknown experiments, unknown parameter keys, wrong types and
  // out-of-range values. Throws ParameterError.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// Applies "key=value" to the parameter map. The value is read as JSON when it
// parses, otherwise as a string.
void apply_parameter_override(ExperimentConfig& config, const std::string& assignment);

// `threads` = 0 uses the hardware concurrency. Output is independent of it.
io::ResultTable run_experiment(const ExperimentConfig& config, unsigned threads = 0);

io::ResultTable run_hom_dip(const ExperimentConfig& config);
io::ResultTable run_spdc_herald(const ExperimentConfig& config);
io::ResultTable run_multiplex_fidelity(const ExperimentConfig& config);
io::ResultTable run_deadtime_rate(const ExperimentConfig& config, unsigned threads = 0);
io::ResultTable run_darkcount_table(const ExperimentConfig& config);

// --out, then the config's output_path, then $PHOTODETECT_OUT_DIR/<experiment>.csv,
// then ./<experiment>.csv.
std::filesystem::path resolve_output_path(const ExperimentConfig& config, const std::optional<std::string>& cli_out);

// UTC ISO-8601; honours SOURCE_DATE_EPOCH for reproducible files.
std::string timestamp_now();

void write_table(const io::ResultTable& table, const std::filesystem::path& path);

}  // namespace photodetect::cli
