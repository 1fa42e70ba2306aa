#pragma once

#include <vector>

namespace photodetect::multiplex {

// Balanced N-port cascade in front of N bucket detectors of efficiency eta.
struct NPortSpec {
  int n_ports = 1;
  double eta = 1.0;
};

// Fibre-loop time-division multiplexer. Each round trip a photon survives the
// loop with probability loop_loss and is then coupled out to the detector with
// probability p_couple. Photons still circulating after max_bins round trips
// are counted as lost. dead_bins is the number of bins following a click in
// which the detector cannot respond (see temporal::blocked_bins).
struct TdmSpec {
  double p_couple = 1.0;
  double loop_loss = 1.0;
  int max_bins = 1;
  double eta = 1.0;
  int dead_bins = 0;
};

// probs[m] = P(m clicks). loss_mass is the probability that a single photon
// is never detected.
struct ClickDistribution {
  std::vector<double> probs;
  double loss_mass = 0.0;

  double total() const;
  double at(int m) const { return m >= 0 && m < static_cast<int>(probs.size()) ? probs[m] : 0.0; }
};

// probs[k - 1] = P(photon coupled out in bin k); loss_mass is everything else.
struct BinProbabilities {
  std::vector<double> probs;
  double loss_mass = 0.0;
};

// Exact click-count distribution for independently and uniformly routed photons.
ClickDistribution nport_click_distribution(int n_photons, const NPortSpec& spec);

// Brute-force enumeration over every routing and every per-photon survival
// pattern. Limited to n_photons <= 6 and n_ports <= 8.
ClickDistribution nport_oracle(int n_photons, const NPortSpec& spec);

BinProbabilities tdm_bin_probabilities(const TdmSpec& spec);

ClickDistribution tdm_click_distribution(int n_photons, const TdmSpec& spec);

// P(click count == n_photons).
double resolution_fidelity(int n_photons, const ClickDistribution& distribution);

}  // namespace photodetect::multiplex
