#include "photodetect/multiplex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "photodetect/errors.hpp"

namespace photodetect::multiplex {
namespace {

constexpr int kOracleMaxPhotons = 6;
constexpr int kOracleMaxPorts = 8;
constexpr int kMaxPhotons = 200;

void check_photons(int n) {
  if (n < 0 || n > kMaxPhotons) throw ParameterError("photon number must lie in [0, " + std::to_string(kMaxPhotons) + "]");
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError(std::string(name) + " must lie in [0, 1]");
}

void check(const NPortSpec& spec) {
  if (spec.n_ports < 1) throw ParameterError("N-port needs at least one output port");
  check_probability(spec.eta, "efficiency");
}

void check(const TdmSpec& spec) {
  if (!(spec.p_couple > 0.0 && spec.p_couple <= 1.0)) throw ParameterError("out-coupling probability must lie in (0, 1]");
  if (!(spec.loop_loss > 0.0 && spec.loop_loss <= 1.0)) throw ParameterError("loop survival probability must lie in (0, 1]");
  if (spec.max_bins < 1) throw ParameterError("TDM needs at least one time bin");
  if (spec.dead_bins < 0) throw ParameterError("dead bins must be >= 0");
  check_probability(spec.eta, "efficiency");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double ClickDistribution::total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

ClickDistribution nport_click_distribution(int n_photons, const NPortSpec& spec) {
  check_photons(n_photons);
  check(spec);
  const int n_ports = spec.n_ports;

  // occupancy[k][m]: probability that k photons occupy exactly m distinct ports.
  std::vector<std::vector<double>> occupancy(n_photons + 1, std::vector<double>(n_photons + 1, 0.0));
  occupancy[0][0] = 1.0;
  for (int k = 1; k <= n_photons; ++k) {
    for (int m = 0; m < k; ++m) {
      const double p = occupancy[k - 1][m];
      if (p == 0.0) continue;
      occupancy[k][m] += p * m / n_ports;
      if (m < n_ports) occupancy[k][m + 1] += p * (n_ports - m) / n_ports;
    }
  }

  // Losses act per photon, independently of routing.
  ClickDistribution dist;
  dist.probs.assign(n_photons + 1, 0.0);
  dist.loss_mass = 1.0 - spec.eta;
  for (int k = 0; k <= n_photons; ++k) {
    const double survive = binomial(n_photons, k) * std::pow(spec.eta, k) * std::pow(1.0 - spec.eta, n_photons - k);
    if (survive == 0.0) continue;
    for (int m = 0; m <= k; ++m) dist.probs[m] += survive * occupancy[k][m];
  }
  return dist;
}

ClickDistribution nport_oracle(int n_photons, const NPortSpec& spec) {
  check(spec);
  if (n_photons < 0 || n_photons > kOracleMaxPhotons || spec.n_ports > kOracleMaxPorts) {
    throw ParameterError("N-port enumeration is limited to 6 photons and 8 ports");
  }
  const int n_ports = spec.n_ports;
  long routings = 1;
  for (int i = 0; i < n_photons; ++i) routings *= n_ports;
  const double routing_weight = std::pow(1.0 / n_ports, n_photons);

  std::vector<long double> acc(n_photons + 1, 0.0L);
  std::vector<int> port(n_photons);
  for (long route = 0; route < routings; ++route) {
    long code = route;
    for (int i = 0; i < n_photons; ++i) {
      port[i] = static_cast<int>(code % n_ports);
      code /= n_ports;
    }
    for (unsigned mask = 0; mask < (1u << n_photons); ++mask) {
      unsigned occupied = 0;
      int survivors = 0;
      for (int i = 0; i < n_photons; ++i) {
        if (mask & (1u << i)) {
          occupied |= 1u << port[i];
          ++survivors;
        }
      }
      const double w = routing_weight * std::pow(spec.eta, survivors) * std::pow(1.0 - spec.eta, n_photons - survivors);
      acc[std::popcount(occupied)] += w;
    }
  }
  ClickDistribution dist;
  dist.probs.assign(acc.begin(), acc.end());
  dist.loss_mass = 1.0 - spec.eta;
  return dist;
}

BinProbabilities tdm_bin_probabilities(const TdmSpec& spec) {
  check(spec);
  BinProbabilities bins;
  bins.probs.resize(spec.max_bins);
  double circulating = 1.0;
  double captured = 0.0;
  for (int k = 1; k <= spec.max_bins; ++k) {
    circulating *= spec.loop_loss;
    bins.probs[k - 1] = circulating * spec.p_couple;
    captured += bins.probs[k - 1];
    circulating *= 1.0 - spec.p_couple;
  }
  bins.loss_mass = 1.0 - captured;
  return bins;
}

ClickDistribution tdm_click_distribution(int n_photons, const TdmSpec& spec) {
  check_photons(n_photons);
  const BinProbabilities bins = tdm_bin_probabilities(spec);

  // Thin by efficiency first: q[k] is the chance a photon is detectable in bin k.
  std::vector<double> q(bins.probs.size());
  double detectable = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    q[k] = spec.eta * bins.probs[k];
    detectable += q[k];
  }
  const double undetected = 1.0 - detectable;

  // state[placed][clicks][cooldown]: photons assigned so far, clicks so far and
  // remaining blocked bins, accumulated with multinomial weights.
  const int n = n_photons;
  const int d = spec.dead_bins;
  auto idx = [&](int placed, int clicks, int cool) { return (placed * (n + 1) + clicks) * (d + 1) + cool; };
  std::vector<double> state((n + 1) * (n + 1) * (d + 1), 0.0);
  state[idx(0, 0, 0)] = 1.0;
  for (double qk : q) {
    std::vector<double> next(state.size(), 0.0);
    for (int placed = 0; placed <= n; ++placed)
      for (int clicks = 0; clicks <= placed; ++clicks)
        for (int cool = 0; cool <= d; ++cool) {
          const double w = state[idx(placed, clicks, cool)];
          if (w == 0.0) continue;
          const int remaining = n - placed;
          double pow_q = 1.0;
          for (int j = 0; j <= remaining; ++j) {
            const double wj = w * binomial(remaining, j) * pow_q;
            pow_q *= qk;
            if (j == 0) {
              next[idx(placed, clicks, cool > 0 ? cool - 1 : 0)] += wj;
            } else if (cool == 0) {
              next[idx(placed + j, clicks + 1, d)] += wj;
            } else {
              next[idx(placed + j, clicks, cool - 1)] += wj;
            }
          }
        }
    state = std::move(next);
  }

  ClickDistribution dist;
  dist.probs.assign(n + 1, 0.0);
  dist.loss_mass = undetected;
  for (int placed = 0; placed <= n; ++placed) {
    const double tail = std::pow(undetected, n - placed);
    for (int clicks = 0; clicks <= placed; ++clicks)
      for (int cool = 0; cool <= d; ++cool) dist.probs[clicks] += state[idx(placed, clicks, cool)] * tail;
  }
  return dist;
}

double resolution_fidelity(int n_photons, const ClickDistribution& distribution) {
  if (n_photons < 0) throw ParameterError("photon number must be >= 0");
  return distribution.at(n_photons);
}

}  // namespace photodetect::multiplex
