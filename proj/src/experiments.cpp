#include "photodetect/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "photodetect/errors.hpp"
#include "photodetect/fock.hpp"
#include "photodetect/hom.hpp"
#include "photodetect/multiplex.hpp"
#include "photodetect/spectral.hpp"
#include "photodetect/temporal.hpp"

namespace photodetect::cli {
namespace {

using nlohmann::json;

constexpr int kMaxGridPoints = 4096;
constexpr int kMaxSweepPoints = 100000;

/// User parameters merged over an experiment's defaults. Keys absent from
/// the defaults are rejected, and each value must match its default's type.
class ParameterSet {
 public:
  ParameterSet(const json& given, json defaults) : values_(std::move(defaults)) {
    if (!given.is_object()) throw ParameterError("'parameters' must be a JSON object");
    for (const auto& [key, value] : given.items()) {
      if (!values_.contains(key)) throw ParameterError("unknown parameter '" + key + "'");
      check_type(key, values_[key], value);
      values_[key] = value;
    }
  }

  const json& merged() const { return values_; }

  double number(const std::string& key) const {
    const double v = values_.at(key).get<double>();
    if (!std::isfinite(v)) throw ParameterError("parameter '" + key + "' must be finite");
    return v;
  }

  int integer(const std::string& key, int lo, int hi) const {
    const auto& v = values_.at(key);
    const long long x = v.is_number_unsigned() ? static_cast<long long>(std::min<std::uint64_t>(v.get<std::uint64_t>(), 1ULL << 62))
                                               : v.get<long long>();
    if (x < lo || x > hi) {
      throw ParameterError("parameter '" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& v : values_.at(key)) out.push_back(v.get<double>());
    if (out.empty()) throw ParameterError("parameter '" + key + "' must be a non-empty list");
    for (double x : out) {
      if (!std::isfinite(x)) throw ParameterError("parameter '" + key + "' must hold finite numbers");
    }
    return out;
  }

  std::string text(const std::string& key) const { return values_.at(key).get<std::string>(); }

 private:
  static void check_type(const std::string& key, const json& reference, const json& value) {
    bool ok;
    if (reference.is_number_integer()) {
      ok = value.is_number_integer();
    } else if (reference.is_number()) {
      ok = value.is_number();
    } else if (reference.is_array()) {
      ok = value.is_array() && std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); });
    } else {
      ok = value.type() == reference.type();
    }
    if (!ok) throw ParameterError("parameter '" + key + "' has the wrong type (expected like " + reference.dump() + ")");
  }

  json values_;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

void require_unit(double x, const std::string& name) { require(x >= 0.0 && x <= 1.0, name + " must lie in [0, 1]"); }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return out;
}

std::string number_text(double v) { return io::format_number(v); }

// ---------------------------------------------------------------- hom-dip

json hom_defaults() {
  return {{"gamma", 1.0},          {"tau_min", -4.0},         {"tau_max", 4.0},           {"tau_points", 81},
          {"width", 1.0},          {"grid_min", -10.0},       {"grid_max", 10.0},         {"grid_points", 201},
          {"detector_eta", 0.8},   {"detector_center", 0.0},  {"detector_bandwidth", 9.5}};
}

struct HomParams {
  double gamma, tau_min, tau_max;
  int tau_points;
  double width;
  spectral::FrequencyGrid grid;
  DetectorSpec detector;
};

HomParams parse_hom(const ParameterSet& p) {
  const double gamma = p.number("gamma");
  require_unit(gamma, "gamma");
  const double tau_min = p.number("tau_min"), tau_max = p.number("tau_max");
  require(tau_max >= tau_min, "tau_max must be >= tau_min");
  const int tau_points = p.integer("tau_points", 1, kMaxSweepPoints);
  const double width = p.number("width");
  require(width > 0.0, "width must be > 0");
  const int grid_points = p.integer("grid_points", 2, kMaxGridPoints);
  spectral::FrequencyGrid grid(p.number("grid_min"), p.number("grid_max"), grid_points);
  DetectorSpec det;
  det.eta_eff = p.number("detector_eta");
  det.center = p.number("detector_center");
  det.bandwidth = p.number("detector_bandwidth");
  det.validate();
  return {gamma, tau_min, tau_max, tau_points, width, grid, det};
}

// ---------------------------------------------------------------- spdc-herald

json herald_defaults() {
  return {{"grid_min", -6.0},     {"grid_max", 6.0},     {"grid_points", 128},        {"width_idler", 1.0},
          {"width_signal", 1.0},  {"correlations", {0.0, 0.9, 0.99}},                 {"bandwidth", 4.0},
          {"ratio_min", 0.02},    {"ratio_max", 1.5},    {"ratio_points", 10},        {"wide_bandwidth", 10.0},
          {"detector_eta", 1.0}};
}

struct HeraldParams {
  spectral::FrequencyGrid grid;
  double width_idler, width_signal;
  std::vector<double> correlations;
  double bandwidth, ratio_min, ratio_max;
  int ratio_points;
  double wide_bandwidth, eta;
};

HeraldParams parse_herald(const ParameterSet& p) {
  spectral::FrequencyGrid grid(p.number("grid_min"), p.number("grid_max"), p.integer("grid_points", 2, 1024));
  const double wi = p.number("width_idler"), ws = p.number("width_signal");
  require(wi > 0.0 && ws > 0.0, "JSA widths must be > 0");
  const auto correlations = p.numbers("correlations");
  for (double c : correlations) require(c > -1.0 && c < 1.0, "correlations must lie in (-1, 1)");
  const double bandwidth = p.number("bandwidth"), wide = p.number("wide_bandwidth");
  require(bandwidth > 0.0 && wide > 0.0, "bandwidths must be > 0");
  const double rmin = p.number("ratio_min"), rmax = p.number("ratio_max");
  require(rmin >= 0.0 && rmax >= rmin, "need 0 <= ratio_min <= ratio_max");
  const int points = p.integer("ratio_points", 1, 10000);
  const double eta = p.number("detector_eta");
  require_unit(eta, "detector_eta");
  return {grid, wi, ws, correlations, bandwidth, rmin, rmax, points, wide, eta};
}

// ---------------------------------------------------------------- multiplex-fidelity

json multiplex_defaults() {
  return {{"scheme", "nport"},
          {"photons", 2},
          {"eta", 1.0},
          {"modes", {1, 2, 4, 8, 16, 32, 64}},
          {"p_couple", 0.5},
          {"loop_loss", 1.0},
          {"dead_bins", 0}};
}

struct MultiplexParams {
  bool tdm;
  int photons;
  double eta;
  std::vector<int> modes;
  double p_couple, loop_loss;
  int dead_bins;
};

MultiplexParams parse_multiplex(const ParameterSet& p) {
  const std::string scheme = p.text("scheme");
  require(scheme == "nport" || scheme == "tdm", "scheme must be 'nport' or 'tdm'");
  const int photons = p.integer("photons", 0, 200);
  const double eta = p.number("eta");
  require_unit(eta, "eta");
  std::vector<int> modes;
  for (double m : p.numbers("modes")) {
    require(m == std::floor(m) && m >= 1.0 && m <= 100000.0, "modes must be integers in [1, 100000]");
    modes.push_back(static_cast<int>(m));
  }
  const double pc = p.number("p_couple"), ll = p.number("loop_loss");
  require(pc > 0.0 && pc <= 1.0, "p_couple must lie in (0, 1]");
  require(ll > 0.0 && ll <= 1.0, "loop_loss must lie in (0, 1]");
  const int dead_bins = p.integer("dead_bins", 0, 100000);
  return {scheme == "tdm", photons, eta, modes, pc, ll, dead_bins};
}

// ---------------------------------------------------------------- deadtime-rate

json deadtime_defaults() {
  return {{"tau_dead", 1.0}, {"rates", {0.1, 1.0, 5.0}}, {"events", 100000}, {"eta", 1.0}, {"dark_rate", 0.0}};
}

struct DeadtimeParams {
  double tau_dead;
  std::vector<double> rates;
  int events;
  double eta, dark_rate;
};

DeadtimeParams parse_deadtime(const ParameterSet& p) {
  const double tau = p.number("tau_dead");
  require(tau >= 0.0, "tau_dead must be >= 0");
  const auto rates = p.numbers("rates");
  for (double r : rates) require(r > 0.0, "rates must be > 0");
  const int events = p.integer("events", 1, 100000000);
  const double eta = p.number("eta");
  require_unit(eta, "eta");
  const double dark = p.number("dark_rate");
  require(dark >= 0.0, "dark_rate must be >= 0");
  return {tau, rates, events, eta, dark};
}

// ---------------------------------------------------------------- darkcount-table

json darkcount_defaults() {
  return {{"r", 0.3}, {"eta", 0.8}, {"n_max", 25}, {"k_max", 25}, {"input_photons", 1}, {"signature", 1}};
}

struct DarkcountParams {
  DetectorSpec detector;
  int n_max, k_max, input_photons, signature;
};

DarkcountParams parse_darkcount(const ParameterSet& p) {
  DetectorSpec det;
  det.r_dark = p.number("r");
  det.eta_eff = p.number("eta");
  det.validate();
  const int n_max = p.integer("n_max", 0, fock::kMaxCutoff);
  const int k_max = p.integer("k_max", 0, n_max);
  const int input = p.integer("input_photons", 0, n_max);
  const int signature = p.integer("signature", 0, n_max);
  return {det, n_max, k_max, input, signature};
}

// ---------------------------------------------------------------- registry

struct Experiment {
  std::function<json()> defaults;
  std::function<void(const ParameterSet&)> check;
};

const std::map<std::string, Experiment>& registry() {
  static const std::map<std::string, Experiment> table{
      {"hom-dip", {hom_defaults, [](const ParameterSet& p) { parse_hom(p); }}},
      {"spdc-herald", {herald_defaults, [](const ParameterSet& p) { parse_herald(p); }}},
      {"multiplex-fidelity", {multiplex_defaults, [](const ParameterSet& p) { parse_multiplex(p); }}},
      {"deadtime-rate", {deadtime_defaults, [](const ParameterSet& p) { parse_deadtime(p); }}},
      {"darkcount-table", {darkcount_defaults, [](const ParameterSet& p) { parse_darkcount(p); }}},
  };
  return table;
}

const Experiment& lookup(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ParameterError("unknown experiment '" + name + "'");
  return it->second;
}

ParameterSet parameters_for(const ExperimentConfig& config, const std::string& expected) {
  if (config.experiment != expected) throw ParameterError("configuration is for '" + config.experiment + "', not '" + expected + "'");
  return ParameterSet(config.parameters, lookup(expected).defaults());
}

io::ResultTable start_table(const ExperimentConfig& config) {
  io::ResultTable table;
  table.add_metadata("photodetect-sim", kVersion);
  table.add_metadata("timestamp", timestamp_now());
  table.add_metadata("config", config.to_json().dump());
  return table;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs job(i) for i in [0, count) on `threads` workers. Each job writes only
// its own output slot, so the merged result does not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < count && !failed; i = next++) {
      try {
        job(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ParameterError("configuration must be a JSON object");
  ExperimentConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      if (!value.is_string()) throw ParameterError("'experiment' must be a string");
      config.experiment = value.get<std::string>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ParameterError("'seed' must be a non-negative integer");
      config.seed = value.get<std::uint64_t>();
    } else if (key == "output_path") {
      if (!value.is_string()) throw ParameterError("'output_path' must be a string");
      config.output_path = value.get<std::string>();
    } else if (key == "parameters") {
      if (!value.is_object()) throw ParameterError("'parameters' must be a JSON object");
      config.parameters = value;
    } else {
      throw ParameterError("unknown configuration key '" + key + "'");
    }
  }
  return config;
}

json ExperimentConfig::to_json() const {
  const ParameterSet params(parameters, lookup(experiment).defaults());
  json doc = {{"experiment", experiment}, {"seed", seed}, {"parameters", params.merged()}};
  if (!output_path.empty()) doc["output_path"] = output_path;
  return doc;
}

void ExperimentConfig::validate() const {
  const Experiment& exp = lookup(experiment);
  exp.check(ParameterSet(parameters, exp.defaults()));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open configuration file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("configuration file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(doc);
}

void apply_parameter_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParameterError("parameter override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  config.parameters[key] = value;
}

io::ResultTable run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  if (config.experiment == "hom-dip") return run_hom_dip(config);
  if (config.experiment == "spdc-herald") return run_spdc_herald(config);
  if (config.experiment == "multiplex-fidelity") return run_multiplex_fidelity(config);
  if (config.experiment == "deadtime-rate") return run_deadtime_rate(config, threads);
  return run_darkcount_table(config);
}

io::ResultTable run_hom_dip(const ExperimentConfig& config) {
  const HomParams p = parse_hom(parameters_for(config, "hom-dip"));
  const auto psi = spectral::gaussian_amplitude(p.grid, 0.0, p.width);
  const double unit = hom::calibrate_delay_unit(psi);
  const auto taus = linspace(p.tau_min, p.tau_max, p.tau_points);

  std::vector<double> analytic, simulated, dressed;
  for (double tau : taus) {
    analytic.push_back(hom::coincidence_analytic(p.gamma, tau));
    simulated.push_back(hom::coincidence_simulated(psi, psi, tau, p.gamma, unit));
    dressed.push_back(hom::coincidence_detector_dressed(psi, psi, tau, p.detector, p.detector, p.gamma, unit));
  }

  io::ResultTable table = start_table(config);
  table.add_metadata("delay_unit", number_text(unit));
  table.add_metadata("visibility_analytic", number_text(hom::visibility(analytic)));
  table.add_metadata("visibility_simulated", number_text(hom::visibility(simulated)));
  table.add_metadata("visibility_dressed", number_text(hom::visibility(dressed)));
  table.add_column("tau", taus);
  table.add_column("analytic", std::move(analytic));
  table.add_column("simulated", std::move(simulated));
  table.add_column("dressed", std::move(dressed));
  return table;
}

io::ResultTable run_spdc_herald(const ExperimentConfig& config) {
  const HeraldParams p = parse_herald(parameters_for(config, "spdc-herald"));
  const double step = p.grid.spacing();
  std::vector<double> corr, ratio, resolution, bandwidth, herald, purity;
  auto emit = [&](const spectral::JointSpectralAmplitude& jsa, double c, double delta, double big_delta) {
    DetectorSpec det;
    det.eta_eff = p.eta;
    det.resolution = delta;
    det.bandwidth = big_delta;
    const auto rho = spectral::condition_signal_tophat(jsa, det);
    corr.push_back(c);
    ratio.push_back(delta / big_delta);
    resolution.push_back(delta);
    bandwidth.push_back(big_delta);
    herald.push_back(rho.trace());
    purity.push_back(spectral::purity(rho));
  };
  for (double c : p.correlations) {
    const auto jsa = spectral::gaussian_jsa(p.grid, p.grid, {0.0, 0.0, p.width_idler, p.width_signal, c});
    for (double r : linspace(p.ratio_min, p.ratio_max, p.ratio_points)) emit(jsa, c, r * p.bandwidth, p.bandwidth);
    emit(jsa, c, step, p.wide_bandwidth);  // finest resolution, wide window
    emit(jsa, c, 0.0, 0.5 * step);         // a single outcome node
  }
  io::ResultTable table = start_table(config);
  table.add_metadata("grid_spacing", number_text(step));
  table.add_column("correlation", std::move(corr));
  table.add_column("ratio", std::move(ratio));
  table.add_column("resolution", std::move(resolution));
  table.add_column("bandwidth", std::move(bandwidth));
  table.add_column("herald_probability", std::move(herald));
  table.add_column("purity", std::move(purity));
  return table;
}

io::ResultTable run_multiplex_fidelity(const ExperimentConfig& config) {
  const MultiplexParams p = parse_multiplex(parameters_for(config, "multiplex-fidelity"));
  std::vector<double> modes, fidelity, loss;
  std::vector<std::vector<double>> probs(p.photons + 1);
  for (int m : p.modes) {
    const auto dist = p.tdm ? multiplex::tdm_click_distribution(
                                  p.photons, {p.p_couple, p.loop_loss, m, p.eta, p.dead_bins})
                            : multiplex::nport_click_distribution(p.photons, {m, p.eta});
    modes.push_back(m);
    fidelity.push_back(multiplex::resolution_fidelity(p.photons, dist));
    loss.push_back(dist.loss_mass);
    for (int k = 0; k <= p.photons; ++k) probs[k].push_back(dist.at(k));
  }
  io::ResultTable table = start_table(config);
  table.add_column(p.tdm ? "bins" : "ports", std::move(modes));
  table.add_column("fidelity", std::move(fidelity));
  table.add_column("loss_mass", std::move(loss));
  for (int k = 0; k <= p.photons; ++k) table.add_column("p_" + std::to_string(k), std::move(probs[k]));
  return table;
}

io::ResultTable run_deadtime_rate(const ExperimentConfig& config, unsigned threads) {
  const DeadtimeParams p = parse_deadtime(parameters_for(config, "deadtime-rate"));
  const std::size_t n = p.rates.size();
  std::vector<double> observed(n), error(n), clicks(n), window(n), closed(n);
  const temporal::DeadTimeModel model{p.eta, p.tau_dead};
  parallel_for(n, worker_count(threads, n), [&](std::size_t i) {
    const double rate = p.rates[i];
    window[i] = p.events / rate;
    const auto arrivals = temporal::poisson_arrivals(rate, window[i], temporal::derive_seed(config.seed, 2 * i));
    const auto out =
        temporal::simulate_clicks(arrivals, model, p.dark_rate, window[i], temporal::derive_seed(config.seed, 2 * i + 1));
    const auto est = temporal::observed_rate(out, window[i]);
    observed[i] = est.rate;
    error[i] = est.std_error;
    clicks[i] = static_cast<double>(est.clicks);
    closed[i] = temporal::nonparalyzable_rate(p.eta * rate + p.eta * p.dark_rate, p.tau_dead);
  });
  io::ResultTable table = start_table(config);
  table.add_column("true_rate", p.rates);
  std::vector<double> product;
  for (double r : p.rates) product.push_back(r * p.tau_dead);
  table.add_column("rate_tau", std::move(product));
  table.add_column("observed_rate", std::move(observed));
  table.add_column("std_error", std::move(error));
  table.add_column("closed_form", std::move(closed));
  table.add_column("clicks", std::move(clicks));
  table.add_column("window", std::move(window));
  return table;
}

io::ResultTable run_darkcount_table(const ExperimentConfig& config) {
  const DarkcountParams p = parse_darkcount(parameters_for(config, "darkcount-table"));
  const auto p_dc = fock::dark_count_probs(p.detector, p.k_max, p.n_max);
  const auto input = fock::FockDensityMatrix::number_state(p.input_photons, p.n_max);
  const auto lossy = fock::loss_channel(input, p.detector.eta_eff);
  const auto measured = fock::measure_with_dark_counts(input, p.detector, p.signature);
  const auto full_dc = fock::dark_count_probs(p.detector, p.n_max, p.n_max);

  std::vector<double> ks, weights;
  for (int k = 0; k <= p.k_max; ++k) {
    ks.push_back(k);
    // branch with k dark counts and signature - k signal photons
    double w = 0.0;
    if (k == 0) {
      w = lossy.population(p.signature);
    } else if (k <= p.signature) {
      w = full_dc[k] * lossy.population(p.signature - k);
    }
    weights.push_back(w);
  }
  double total = 0.0;
  for (double v : p_dc) total += v;

  io::ResultTable table = start_table(config);
  table.add_metadata("p_dc_total", number_text(total));
  table.add_metadata("signature_probability", number_text(measured.trace()));
  if (fock::dark_count_mass_exceeds_unity(p_dc)) table.add_metadata("warning", "dark-count probabilities exceed unit mass");
  table.add_column("k", std::move(ks));
  table.add_column("p_dc", p_dc);
  table.add_column("mixture_weight", std::move(weights));
  return table;
}

std::filesystem::path resolve_output_path(const ExperimentConfig& config, const std::optional<std::string>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (!config.output_path.empty()) return config.output_path;
  const std::string file = config.experiment + ".csv";
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) return std::filesystem::path(dir) / file;
  return file;
}

std::string timestamp_now() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(epoch, &end, 10);
    if (errno != 0 || *end != '\0' || v < 0) throw ParameterError("SOURCE_DATE_EPOCH must be a non-negative integer");
    t = static_cast<std::time_t>(v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

void write_table(const io::ResultTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open output file '" + path.string() + "'");
  table.write(out);
  if (!out) throw ParameterError("failed writing output file '" + path.string() + "'");
}

}  // namespace photodetect::cli
