#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "photodetect/errors.hpp"
#include "photodetect/fock.hpp"

using namespace photodetect;
using namespace photodetect::fock;

namespace {

FockDensityMatrix equal_superposition_01(int n_max) {
  Vector v = Vector::Zero(n_max + 1);
  v(0) = v(1) = 1.0 / std::sqrt(2.0);
  return FockDensityMatrix::pure(v);
}

// Random mixed state of rank `rank` with support on |0>..|support_max>.
FockDensityMatrix random_state(std::mt19937_64& rng, int n_max, int support_max, int rank = 3) {
  std::normal_distribution<double> g;
  Matrix acc = Matrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k < rank; ++k) {
    Vector v = Vector::Zero(n_max + 1);
    for (int n = 0; n <= support_max; ++n) v(n) = {g(rng), g(rng)};
    acc += v * v.adjoint();
  }
  return FockDensityMatrix(n_max, 1, acc / acc.trace().real());
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("number projector") {
  Matrix p0 = number_projector(0, 3);
  CHECK(p0(0, 0) == std::complex<double>(1.0));
  CHECK(p0.cwiseAbs().sum() == 1.0);
  Matrix id = Matrix::Zero(6, 6);
  for (int n = 0; n < 6; ++n) {
    Matrix p = number_projector(n, 6);
    CHECK(max_abs_diff(p * p, p) == 0.0);
    id += p;
  }
  CHECK(id == Matrix::Identity(6, 6));
  CHECK_THROWS_AS(number_projector(3, 3), ParameterError);
  CHECK_THROWS_AS(number_projector(-1, 3), ParameterError);
}

TEST_CASE("project_number") {
  SUBCASE("equal superposition") {
    auto [state, p] = project_number(equal_superposition_01(3), 1);
    CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(state.trace() == doctest::Approx(0.5));
    CHECK(std::abs(state(0, 0)) == 0.0);
    CHECK(std::abs(state(0, 1)) == 0.0);
  }
  SUBCASE("eigenstate and orthogonality") {
    auto rho = FockDensityMatrix::number_state(2, 4);
    auto hit = project_number(rho, 2);
    CHECK(hit.probability == 1.0);
    CHECK(hit.state.matrix() == rho.matrix());
    auto miss = project_number(rho, 1);
    CHECK(miss.probability == 0.0);
    CHECK(miss.state.matrix().isZero(0.0));
  }
  SUBCASE("thermal vacuum readout") {
    auto rho = thermal_state({0.5, 20});
    CHECK(project_number(rho, 0).probability == rho(0, 0).real());
    // 1 / sum_{n<=20} tanh(0.5)^n
    CHECK(rho(0, 0).real() == doctest::Approx(0.53788289177222492).epsilon(1e-14));
  }
}

TEST_CASE("bucket detector") {
  auto vac = FockDensityMatrix::vacuum(4);
  CHECK(project_click(vac).probability == 0.0);
  CHECK(project_no_click(vac).probability == 1.0);
  CHECK(project_click(equal_superposition_01(4)).probability == doctest::Approx(0.5));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto rho = random_state(rng, 6, 6);
    auto click = project_click(rho);
    auto none = project_no_click(rho);
    CHECK(std::abs(click.probability + none.probability - rho.trace()) < 1e-12);
    // coherences between different photon numbers are removed
    for (int m = 0; m <= 6; ++m)
      for (int n = 0; n <= 6; ++n)
        if (m != n) CHECK(std::abs(click.state(m, n)) == 0.0);
  }
}

TEST_CASE("beamsplitter amplitudes match polynomial expansion") {
  for (double eta : {0.0, 0.3, 0.5, 0.81, 1.0})
    for (int m = 0; m <= 4; ++m)
      for (int n = 0; n <= 4; ++n) {
        auto expected = oracle::expand_creation_polynomial(m, n, eta);
        for (int p = 0; p <= m + n; ++p) {
          double want = expected.count({p, m + n - p}) ? expected[{p, m + n - p}] : 0.0;
          CHECK(std::abs(beamsplitter_amplitude(m, n, p, m + n - p, eta) - want) < 1e-12);
        }
      }
}

TEST_CASE("beamsplitter on Fock inputs") {
  SUBCASE("two-photon bunching") {
    auto out = beamsplitter_two_mode(FockDensityMatrix::two_mode_number_state(1, 1, 3), 0.5);
    CHECK(out.population(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(out.population(2, 0) - 0.5) < 1e-14);
    CHECK(std::abs(out.population(0, 2) - 0.5) < 1e-14);
    // relative minus sign between |2,0> and |0,2>
    CHECK(out(out.index(2, 0), out.index(0, 2)).real() == doctest::Approx(-0.5));
    CHECK(beamsplitter_amplitude(1, 1, 2, 0, 0.5) == doctest::Approx(1.0 / std::sqrt(2.0)));
  }
  SUBCASE("identity beamsplitter") {
    auto in = FockDensityMatrix::two_mode_number_state(1, 0, 2);
    CHECK(max_abs_diff(beamsplitter_two_mode(in, 1.0).matrix(), in.matrix()) == 0.0);
  }
  SUBCASE("two photons in one port") {
    auto out = beamsplitter_two_mode(FockDensityMatrix::two_mode_number_state(2, 0, 3), 0.5);
    CHECK(std::abs(out.population(2, 0) - 0.25) < 1e-14);
    CHECK(std::abs(out.population(1, 1) - 0.5) < 1e-14);
    CHECK(std::abs(out.population(0, 2) - 0.25) < 1e-14);
  }
  SUBCASE("number conservation and trace") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const int n_max = 4;
    Vector v = Vector::Zero(25);
    for (int m = 0; m <= n_max; ++m)
      for (int n = 0; m + n <= n_max; ++n) v(m * 5 + n) = {g(rng), g(rng)};
    v.normalize();
    auto out = beamsplitter_two_mode(FockDensityMatrix::two_mode_pure(v, n_max), 0.37);
    CHECK(std::abs(out.trace() - 1.0) < 1e-12);
    // the total-number distribution is unchanged
    auto in = FockDensityMatrix::two_mode_pure(v, n_max);
    for (int total = 0; total <= n_max; ++total) {
      double before = 0.0, after = 0.0;
      for (int m = 0; m <= total; ++m) {
        before += in.population(m, total - m);
        after += out.population(m, total - m);
      }
      CHECK(std::abs(before - after) < 1e-12);
    }
    out.validate();
  }
  SUBCASE("errors") {
    auto in = FockDensityMatrix::two_mode_number_state(1, 0, 2);
    CHECK_THROWS_AS(beamsplitter_two_mode(in, 1.5), ParameterError);
    CHECK_THROWS_AS(beamsplitter_two_mode(in, -0.1), ParameterError);
    CHECK_THROWS_AS(beamsplitter_two_mode(FockDensityMatrix::two_mode_number_state(2, 1, 2), 0.5), ModelError);
    CHECK_THROWS_AS(beamsplitter_two_mode(FockDensityMatrix::vacuum(2), 0.5), ParameterError);
  }
}

TEST_CASE("loss channel") {
  SUBCASE("single photon") {
    auto out = loss_channel(FockDensityMatrix::number_state(1, 3), 0.5);
    CHECK(out.population(0) == doctest::Approx(0.5));
    CHECK(out.population(1) == doctest::Approx(0.5));
  }
  SUBCASE("two photons") {
    auto out = loss_channel(FockDensityMatrix::number_state(2, 3), 0.7);
    CHECK(std::abs(out.population(0) - 0.09) < 1e-15);
    CHECK(std::abs(out.population(1) - 0.42) < 1e-15);
    CHECK(std::abs(out.population(2) - 0.49) < 1e-15);
  }
  SUBCASE("unit efficiency is the identity") {
    std::mt19937_64 rng(3);
    auto rho = random_state(rng, 5, 5);
    CHECK(loss_channel(rho, 1.0).matrix() == rho.matrix());
  }
  SUBCASE("agrees with dilation, preserves trace, composes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
      auto rho = random_state(rng, 6, 4);
      for (double eta : {0.0, 0.3, 0.7, 1.0}) {
        auto direct = loss_channel(rho, eta);
        CHECK(max_abs_diff(direct.matrix(), oracle::dilated_loss(rho, eta).matrix()) < 1e-12);
        CHECK(std::abs(direct.trace() - rho.trace()) < 1e-12);
        direct.validate();
      }
      auto twice = loss_channel(loss_channel(rho, 0.6), 0.45);
      CHECK(max_abs_diff(twice.matrix(), loss_channel(rho, 0.27).matrix()) < 1e-12);
    }
  }
  CHECK_THROWS_AS(loss_channel(FockDensityMatrix::vacuum(2), 1.01), ParameterError);
}

TEST_CASE("thermal state") {
  CHECK(thermal_state({0.0, 5}).matrix() == FockDensityMatrix::vacuum(5).matrix());
  auto rho = thermal_state({0.5, 30});
  for (int n = 0; n < 30; ++n) {
    CHECK(rho.population(n + 1) / rho.population(n) == doctest::Approx(std::tanh(0.5)).epsilon(1e-13));
    CHECK(rho.population(n + 1) <= rho.population(n));
  }
  for (double r : {0.05, 0.3, 1.0, 2.0}) CHECK(std::abs(thermal_state({r, 40}).trace() - 1.0) < 1e-12);
  rho.validate();
  CHECK_THROWS_AS(thermal_state({-0.1, 5}), ParameterError);
  // geometric distribution mean t / (1 - t) once truncation is negligible
  const double t = std::tanh(0.3);
  CHECK(thermal_state({0.3, 60}).mean_photon_number() == doctest::Approx(t / (1 - t)).epsilon(1e-12));
}

TEST_CASE("dark count probabilities") {
  DetectorSpec spec;
  spec.r_dark = 0.0;
  spec.eta_eff = 0.6;
  auto p = dark_count_probs(spec, 4, 10);
  CHECK(p[0] == 1.0);
  for (int k = 1; k <= 4; ++k) CHECK(p[k] == 0.0);

  spec.r_dark = 0.7;
  spec.eta_eff = 1.0;
  p = dark_count_probs(spec, 4, 10);
  CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-15));
  for (int k = 1; k <= 4; ++k) CHECK(p[k] == 0.0);

  spec.r_dark = 0.3;
  spec.eta_eff = 0.8;
  p = dark_count_probs(spec, 25, 25);
  auto reference = oracle::reflected_thermal_counts(0.3, 0.8, 25);
  for (int k = 0; k <= 25; ++k) {
    CHECK(p[k] >= 0.0);
    CHECK(p[k] <= 1.0);
    CHECK(std::abs(p[k] - reference[k]) < 1e-9);
  }
  CHECK(std::abs(p[1] - 0.070195615369756423) < 1e-12);
  CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-9);
  CHECK_FALSE(dark_count_mass_exceeds_unity(p));
  std::vector<double> bad{0.7, 0.4};
  CHECK(dark_count_mass_exceeds_unity(bad));
}

TEST_CASE("measurement with dark counts") {
  std::mt19937_64 rng(17);
  auto rho = random_state(rng, 6, 5);
  DetectorSpec spec;
  spec.eta_eff = 0.65;

  SUBCASE("no dark counts reduces to lossy projection") {
    for (int n = 0; n <= 6; ++n) {
      auto with_dc = measure_with_dark_counts(rho, spec, n);
      auto plain = project_number(loss_channel(rho, spec.eta_eff), n).state;
      CHECK(with_dc.matrix() == plain.matrix());
    }
  }
  SUBCASE("vacuum input gives a pure false positive") {
    spec.r_dark = 0.4;
    auto out = measure_with_dark_counts(FockDensityMatrix::vacuum(6), spec, 1);
    const double p1 = dark_count_probs(spec, 1, 6)[1];
    CHECK(out.population(0) == doctest::Approx(p1).epsilon(1e-15));
    CHECK(out.trace() == doctest::Approx(p1).epsilon(1e-15));
  }
  SUBCASE("single photon at unit efficiency") {
    spec.r_dark = 0.3;
    spec.eta_eff = 1.0;
    Vector v = Vector::Zero(7);
    v(0) = std::sqrt(0.25);
    v(1) = std::sqrt(0.75);
    auto in = FockDensityMatrix::pure(v);
    auto out = measure_with_dark_counts(in, spec, 1);
    // eta = 1 routes every thermal photon away from the detector, so p_dc(1) = 0
    CHECK(out.trace() == doctest::Approx(0.75).epsilon(1e-14));

    spec.eta_eff = 0.8;
    out = measure_with_dark_counts(in, spec, 1);
    auto lossy = loss_channel(in, 0.8);
    const double p1 = dark_count_probs(spec, 1, 6)[1];
    CHECK(std::abs(out.trace() - (lossy.population(1) + p1 * lossy.population(0))) < 1e-15);
    CHECK(std::abs(out.population(1) - 0.75 * 0.8) < 1e-14);
  }
  CHECK_THROWS_AS(measure_with_dark_counts(rho, spec, 7), ParameterError);
}
