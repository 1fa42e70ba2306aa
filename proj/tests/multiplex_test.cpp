#include <cmath>
#include <vector>

#include "doctest.h"
#include "photodetect/errors.hpp"
#include "photodetect/multiplex.hpp"

using namespace photodetect;
using namespace photodetect::multiplex;

namespace {

// Enumerates each photon's fate (lost, or detectable in bin k) and applies
// the dead-bin rule bin by bin.
std::vector<double> tdm_enumeration(int n, const TdmSpec& spec) {
  std::vector<double> p_bin;
  double circulating = 1.0;
  for (int k = 0; k < spec.max_bins; ++k) {
    circulating *= spec.loop_loss;
    p_bin.push_back(spec.eta * circulating * spec.p_couple);
    circulating *= 1.0 - spec.p_couple;
  }
  double p_lost = 1.0;
  for (double p : p_bin) p_lost -= p;
  const int outcomes = spec.max_bins + 1;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= outcomes;
  std::vector<double> probs(n + 1, 0.0);
  std::vector<int> fate(n);
  for (long code = 0; code < total; ++code) {
    long c = code;
    double w = 1.0;
    std::vector<int> occupied(spec.max_bins, 0);
    for (int i = 0; i < n; ++i) {
      fate[i] = static_cast<int>(c % outcomes);
      c /= outcomes;
      if (fate[i] == spec.max_bins) {
        w *= p_lost;
      } else {
        w *= p_bin[fate[i]];
        occupied[fate[i]] = 1;
      }
    }
    int clicks = 0;
    int last_click = -1000000;
    for (int k = 0; k < spec.max_bins; ++k) {
      if (occupied[k] && k - last_click > spec.dead_bins) {
        ++clicks;
        last_click = k;
      }
    }
    probs[clicks] += w;
  }
  return probs;
}

}  // namespace

TEST_CASE("N-port click distributions") {
  for (int ports : {1, 3, 9}) CHECK(nport_click_distribution(1, {ports, 1.0}).at(1) == doctest::Approx(1.0));

  auto two_two = nport_click_distribution(2, {2, 1.0});
  CHECK(two_two.at(2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(two_two.at(1) == doctest::Approx(0.5).epsilon(1e-15));

  auto two_four = nport_click_distribution(2, {4, 1.0});
  CHECK(two_four.at(2) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(two_four.at(1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(resolution_fidelity(2, two_four) == doctest::Approx(0.75));

  CHECK(nport_click_distribution(0, {5, 0.3}).at(0) == 1.0);
  CHECK(nport_click_distribution(1, {4, 0.6}).at(1) == doctest::Approx(0.6));
  CHECK(nport_click_distribution(2, {1, 1.0}).loss_mass == 0.0);
  CHECK_THROWS_AS(nport_click_distribution(2, {0, 1.0}), ParameterError);
  CHECK_THROWS_AS(nport_click_distribution(2, {2, 1.2}), ParameterError);
}

TEST_CASE("N-port enumeration oracle") {
  CHECK(nport_oracle(0, {3, 0.4}).at(0) == 1.0);
  auto three = nport_oracle(3, {3, 1.0});
  CHECK(three.at(3) == doctest::Approx(6.0 / 27).epsilon(1e-15));
  CHECK(three.at(2) == doctest::Approx(18.0 / 27).epsilon(1e-15));
  CHECK(three.at(1) == doctest::Approx(3.0 / 27).epsilon(1e-15));

  // loss then route: 0.25 both survive (then 1/2 collide), 0.5 one survives
  auto lossy = nport_oracle(2, {2, 0.5});
  CHECK(lossy.at(0) == doctest::Approx(0.25));
  CHECK(lossy.at(1) == doctest::Approx(0.5 + 0.25 * 0.5));
  CHECK(lossy.at(2) == doctest::Approx(0.25 * 0.5));

  CHECK_THROWS_AS(nport_oracle(7, {2, 1.0}), ParameterError);
  CHECK_THROWS_AS(nport_oracle(2, {9, 1.0}), ParameterError);
}

TEST_CASE("N-port properties") {
  for (double eta : {0.3, 0.7, 1.0})
    for (int n = 0; n <= 6; ++n)
      for (int ports = 1; ports <= 8; ++ports) {
        auto fast = nport_click_distribution(n, {ports, eta});
        auto full = nport_oracle(n, {ports, eta});
        CHECK(std::abs(fast.total() - 1.0) < 1e-12);
        for (int m = 0; m <= n; ++m) {
          CHECK(std::abs(fast.at(m) - full.at(m)) < 1e-12);
          if (m > std::min(n, ports)) CHECK(fast.at(m) == 0.0);
        }
        // lower efficiency is stochastically dominated by unit efficiency
        auto ideal = nport_click_distribution(n, {ports, 1.0});
        double tail = 0.0, tail_ideal = 0.0;
        for (int k = n; k >= 0; --k) {
          tail += fast.at(k);
          tail_ideal += ideal.at(k);
          CHECK(tail <= tail_ideal + 1e-12);
        }
      }

  double previous = 0.0;
  for (int ports = 2; ports <= 64; ++ports) {
    const double f = resolution_fidelity(2, nport_click_distribution(2, {ports, 1.0}));
    CHECK(f > previous);
    CHECK(f == doctest::Approx(1.0 - 1.0 / ports).epsilon(1e-14));
    previous = f;
  }
}

TEST_CASE("TDM bin probabilities") {
  auto single = tdm_bin_probabilities({1.0, 1.0, 4, 1.0, 0});
  CHECK(single.probs[0] == 1.0);
  CHECK(single.probs[1] == 0.0);
  CHECK(single.loss_mass == 0.0);

  auto half = tdm_bin_probabilities({0.5, 1.0, 30, 1.0, 0});
  for (int k = 1; k <= 30; ++k) CHECK(half.probs[k - 1] == doctest::Approx(std::pow(0.5, k)).epsilon(1e-15));
  CHECK(half.loss_mass == doctest::Approx(std::pow(0.5, 30)).epsilon(1e-6));

  auto lossy = tdm_bin_probabilities({0.5, 0.9, 20, 1.0, 0});
  double sum = lossy.loss_mass;
  for (double p : lossy.probs) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-12);
  CHECK(lossy.probs[2] == doctest::Approx(std::pow(0.9, 3) * 0.25 * 0.5));

  CHECK_THROWS_AS(tdm_bin_probabilities({0.0, 1.0, 3, 1.0, 0}), ParameterError);
  CHECK_THROWS_AS(tdm_bin_probabilities({0.5, 1.1, 3, 1.0, 0}), ParameterError);
  CHECK_THROWS_AS(tdm_bin_probabilities({0.5, 1.0, 0, 1.0, 0}), ParameterError);
}

TEST_CASE("TDM click distributions") {
  for (double p : {0.2, 0.5, 0.9}) {
    auto d = tdm_click_distribution(1, {p, 1.0, 12, 1.0, 0});
    CHECK(d.at(1) == doctest::Approx(1.0 - std::pow(1.0 - p, 12)).epsilon(1e-13));
  }
  auto pair = tdm_click_distribution(2, {0.5, 1.0, 200, 1.0, 0});
  CHECK(pair.at(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(pair.at(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  for (int n = 0; n <= 5; ++n) {
    auto one_bin = tdm_click_distribution(n, {1.0, 1.0, 5, 0.55, 0});
    CHECK(one_bin.at(1) == doctest::Approx(1.0 - std::pow(0.45, n)).epsilon(1e-13));
  }

  for (int dead : {0, 1, 3})
    for (int n = 0; n <= 4; ++n) {
      TdmSpec spec{0.35, 0.93, 5, 0.8, dead};
      auto d = tdm_click_distribution(n, spec);
      auto ref = tdm_enumeration(n, spec);
      CHECK(std::abs(d.total() - 1.0) < 1e-12);
      for (int m = 0; m <= n; ++m) CHECK(std::abs(d.at(m) - ref[m]) < 1e-12);
    }
}
