#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "photodetect/detector.hpp"

namespace photodetect::fock {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Largest supported per-mode photon-number cutoff.
inline constexpr int kMaxCutoff = 80;

/// Density matrix over a truncated photon-number basis.
///
/// Single-mode states live on |0>..|n_max>. Two-mode states use the product
/// basis |m>|n> with both m and n in 0..n_max, flattened as m * (n_max + 1) + n;
/// the first mode is the transmitted (detected) port and the second the
/// reflected one.
///
/// Post-measurement states are kept unnormalized; call normalized() when a
/// unit-trace state is needed.
class FockDensityMatrix {
 public:
  FockDensityMatrix(int n_max, int modes, Matrix data);

  static FockDensityMatrix vacuum(int n_max);
  static FockDensityMatrix number_state(int n, int n_max);
  static FockDensityMatrix two_mode_number_state(int m, int n, int n_max);
  // Pure single-mode state from amplitudes over |0>..|size-1>.
  static FockDensityMatrix pure(const Vector& amplitudes);
  // Pure two-mode state from amplitudes in the flattened product basis.
  static FockDensityMatrix two_mode_pure(const Vector& amplitudes, int n_max);
  // rho_a (x) rho_b for two single-mode states with the same cutoff.
  static FockDensityMatrix product(const FockDensityMatrix& a, const FockDensityMatrix& b);

  int n_max() const { return n_max_; }
  int modes() const { return modes_; }
  int mode_dim() const { return n_max_ + 1; }
  Eigen::Index dim() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  std::complex<double> operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  Eigen::Index index(int m, int n) const { return static_cast<Eigen::Index>(m) * mode_dim() + n; }

  double trace() const;
  // <n|rho|n> for single-mode states.
  double population(int n) const;
  // <m,n|rho|m,n> for two-mode states.
  double population(int m, int n) const;
  // Photon-number distribution of one mode (0 or 1) of a two-mode state.
  std::vector<double> marginal_populations(int mode) const;
  double mean_photon_number() const;

  FockDensityMatrix normalized() const;
  // Traces out the second (reflected) mode of a two-mode state.
  FockDensityMatrix trace_out_second() const;

  double hermiticity_error() const;
  double min_eigenvalue() const;
  // Throws ModelError if the state is not Hermitian (1e-12), has trace outside
  // [0, 1 + 1e-12] or has an eigenvalue below -1e-10.
  void validate() const;

 private:
  int n_max_;
  int modes_;
  Matrix data_;
};

struct Measurement {
  FockDensityMatrix state;
  double probability;
};

// |n><n| as a dim x dim matrix.
Matrix number_projector(int n, int dim);

Measurement project_number(const FockDensityMatrix& rho, int n);
// Bucket detector outcomes: click keeps the n >= 1 diagonal blocks, no-click keeps |0><0|.
Measurement project_click(const FockDensityMatrix& rho);
Measurement project_no_click(const FockDensityMatrix& rho);

// <m_out, n_out| U(eta) |m_in, n_in> for the two-mode beamsplitter
//   a^dag -> sqrt(eta) a^dag - sqrt(1 - eta) b^dag
//   b^dag -> sqrt(1 - eta) a^dag + sqrt(eta) b^dag
// which sends |1,1> to (|2,0> - |0,2>)/sqrt(2) at eta = 1/2.
double beamsplitter_amplitude(int m_in, int n_in, int m_out, int n_out, double eta);

// U rho U^dag. Rejects inputs with population in states whose total photon
// number exceeds the per-mode cutoff.
FockDensityMatrix beamsplitter_two_mode(const FockDensityMatrix& rho2, double eta);

// Finite-efficiency channel: binomial photon loss with survival probability eta.
FockDensityMatrix loss_channel(const FockDensityMatrix& rho, double eta);

struct ThermalSource {
  double r = 0.0;
  int n_max = 0;
};

// Diagonal state with weights proportional to tanh(r)^n, renormalized to unit
// trace over 0..n_max.
FockDensityMatrix thermal_state(const ThermalSource& source);

// p_dc(k), k = 0..k_max: probability that k thermal photons reach the detector
// through the reflecting port of an efficiency-eta beamsplitter. The thermal
// series is truncated at n_max and renormalized like thermal_state.
std::vector<double> dark_count_probs(const DetectorSpec& spec, int k_max, int n_max);

// True when the dark-count table carries more than 1 + 1e-6 total probability.
bool dark_count_mass_exceeds_unity(std::span<const double> probs);

// Output state for an n-photon signature of a detector with finite efficiency
// and thermal dark counts (unnormalized).
FockDensityMatrix measure_with_dark_counts(const FockDensityMatrix& rho, const DetectorSpec& spec, int n);

}  // namespace photodetect::fock
