#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photodetect/errors.hpp"
#include "photodetect/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace photodetect;

  CLI::App app{"Photo-detector model experiments"};
  app.set_version_flag("--version", cli::kVersion);

  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  unsigned threads = 0;

  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(cli::experiment_names()));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--seed", seed, "Override the configured seed");
  app.add_option("--out", out, "Output CSV path (default: config, then $" + std::string(cli::kOutputDirEnv) + ", then cwd)");
  app.add_option("--param", overrides, "Override one parameter, key=value")->take_all();
  app.add_option("--threads", threads, "Worker threads for sweeps (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    cli::ExperimentConfig config = cli::load_config(config_path);
    config.experiment = experiment;
    if (seed) config.seed = *seed;
    for (const auto& assignment : overrides) cli::apply_parameter_override(config, assignment);
    config.validate();

    const auto table = cli::run_experiment(config, threads);
    const auto path = cli::resolve_output_path(config, out);
    cli::write_table(table, path);
    std::cout << path.string() << '\n';
    return 0;
  } catch (const ParameterError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelError& e) {
    std::cerr << "model error: " << e.what() << '\n';
    return kExitModel;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
}
