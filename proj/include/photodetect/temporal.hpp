#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace photodetect::temporal {

/// Time-ordered detection or arrival events, in seconds.
class ClickStream {
 public:
  ClickStream() = default;
  // Throws ParameterError unless times are finite, >= 0 and strictly increasing.
  explicit ClickStream(std::vector<double> times);

  std::span<const double> times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }

  friend bool operator==(const ClickStream&, const ClickStream&) = default;

 private:
  std::vector<double> times_;
};

/// Top-hat dead-time: the detector has efficiency eta_eff except during
/// [t_click, t_click + tau_dead) after each click. Blocked events do not
/// extend the window (non-paralyzable).
struct DeadTimeModel {
  double eta_eff = 1.0;
  double tau_dead = 0.0;

  void validate() const;
};

double eta_of_t(const DeadTimeModel& model, double t, std::optional<double> last_click);

// Homogeneous Poisson process on [0, window]. Deterministic for a given seed.
ClickStream poisson_arrivals(double rate, double window, std::uint64_t seed);

// Merges photon arrivals with Poisson dark events of rate dark_rate and passes
// each candidate through the dead-time gate. Deterministic for a given seed.
ClickStream simulate_clicks(const ClickStream& arrivals, const DeadTimeModel& model, double dark_rate, double window,
                            std::uint64_t seed);

struct RateEstimate {
  double rate = 0.0;
  double std_error = 0.0;
  std::size_t clicks = 0;
};

// Renewal estimate of the click rate from the mean inter-click gap, with the
// delta-method standard error. Falls back to clicks / window for fewer than
// three clicks.
RateEstimate observed_rate(const ClickStream& clicks, double window);

// Observed rate of a non-paralyzable detector fed by Poisson light: R / (1 + R tau).
double nonparalyzable_rate(double true_rate, double tau_dead);

// Number of later time bins, spaced bin_period apart, that fall inside the dead
// window of a click. Feeds multiplex::TdmSpec::dead_bins.
int blocked_bins(const DeadTimeModel& model, double bin_period);

// Independent, reproducible sub-seed for stream `stream` of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// One column of event times with 12 significant digits, preceded by a header line.
void write_csv(std::ostream& out, const ClickStream& stream);
ClickStream read_csv(std::istream& in);

}  // namespace photodetect::temporal
