#include "photodetect/temporal.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "photodetect/errors.hpp"

namespace photodetect::temporal {
namespace {

// Bit-reproducible uniform and exponential draws on mt19937_64.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

void check_window(double window) {
  if (!(window >= 0.0 && std::isfinite(window))) throw ParameterError("observation window must be finite and >= 0");
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && std::isfinite(rate))) throw ParameterError("event rate must be finite and >= 0");
}

}  // namespace

ClickStream::ClickStream(std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i]) || times_[i] < 0.0) throw ParameterError("event times must be finite and >= 0");
    if (i > 0 && !(times_[i] > times_[i - 1])) throw ParameterError("event times must be strictly increasing");
  }
}

void DeadTimeModel::validate() const {
  if (!(eta_eff >= 0.0 && eta_eff <= 1.0)) throw ParameterError("efficiency must lie in [0, 1]");
  if (!(tau_dead >= 0.0 && std::isfinite(tau_dead))) throw ParameterError("dead-time must be finite and >= 0");
}

double eta_of_t(const DeadTimeModel& model, double t, std::optional<double> last_click) {
  if (!last_click || t < *last_click) return model.eta_eff;
  return t - *last_click < model.tau_dead ? 0.0 : model.eta_eff;
}

ClickStream poisson_arrivals(double rate, double window, std::uint64_t seed) {
  check_rate(rate);
  check_window(window);
  std::vector<double> times;
  if (rate == 0.0) return ClickStream{};
  times.reserve(static_cast<std::size_t>(rate * window * 1.1) + 16);
  Sampler sampler(seed);
  double t = sampler.exponential(rate);
  while (t <= window) {
    if (times.empty() || t > times.back()) times.push_back(t);
    t += sampler.exponential(rate);
  }
  return ClickStream(std::move(times));
}

ClickStream simulate_clicks(const ClickStream& arrivals, const DeadTimeModel& model, double dark_rate, double window,
                            std::uint64_t seed) {
  model.validate();
  check_rate(dark_rate);
  check_window(window);
  if (!arrivals.empty() && arrivals[arrivals.size() - 1] > window) {
    throw ParameterError("arrivals extend beyond the observation window");
  }

  const ClickStream dark = poisson_arrivals(dark_rate, window, derive_seed(seed, 1));
  Sampler gate(derive_seed(seed, 2));

  std::vector<double> clicks;
  std::optional<double> last_click;
  std::size_t i = 0, j = 0;
  while (i < arrivals.size() || j < dark.size()) {
    double t;
    if (j >= dark.size() || (i < arrivals.size() && arrivals[i] <= dark[j])) {
      t = arrivals[i++];
    } else {
      t = dark[j++];
    }
    const double eta = eta_of_t(model, t, last_click);
    const double u = gate.uniform();
    if (u < eta && (!last_click || t > *last_click)) {
      clicks.push_back(t);
      last_click = t;
    }
  }
  return ClickStream(std::move(clicks));
}

RateEstimate observed_rate(const ClickStream& clicks, double window) {
  check_window(window);
  RateEstimate est;
  est.clicks = clicks.size();
  if (clicks.size() < 3) {
    if (window > 0.0) {
      est.rate = static_cast<double>(clicks.size()) / window;
      est.std_error = std::sqrt(static_cast<double>(clicks.size())) / window;
    }
    return est;
  }
  const std::size_t gaps = clicks.size() - 1;
  const double mean = (clicks[gaps] - clicks[0]) / static_cast<double>(gaps);
  double sq = 0.0;
  for (std::size_t k = 1; k < clicks.size(); ++k) {
    const double d = (clicks[k] - clicks[k - 1]) - mean;
    sq += d * d;
  }
  const double sd = std::sqrt(sq / static_cast<double>(gaps - 1));
  est.rate = 1.0 / mean;
  est.std_error = sd / (mean * mean * std::sqrt(static_cast<double>(gaps)));
  return est;
}

double nonparalyzable_rate(double true_rate, double tau_dead) {
  check_rate(true_rate);
  if (!(tau_dead >= 0.0)) throw ParameterError("dead-time must be >= 0");
  return true_rate / (1.0 + true_rate * tau_dead);
}

int blocked_bins(const DeadTimeModel& model, double bin_period) {
  model.validate();
  if (!(bin_period > 0.0)) throw ParameterError("bin period must be > 0");
  if (model.tau_dead == 0.0) return 0;
  return static_cast<int>(std::ceil(model.tau_dead / bin_period)) - 1;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void write_csv(std::ostream& out, const ClickStream& stream) {
  out << "time_s\n";
  char buf[64];
  for (double t : stream.times()) {
    std::snprintf(buf, sizeof buf, "%.12g\n", t);
    out << buf;
  }
}

ClickStream read_csv(std::istream& in) {
  std::vector<double> times;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (first) {
      first = false;
      if (line == "time_s") continue;
    }
    std::size_t used = 0;
    double t = 0.0;
    try {
      t = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ParameterError("malformed click-stream line: " + line);
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw ParameterError("malformed click-stream line: " + line);
    times.push_back(t);
  }
  return ClickStream(std::move(times));
}

}  // namespace photodetect::temporal
