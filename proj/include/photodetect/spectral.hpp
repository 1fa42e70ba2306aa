#pragma once

#include <vector>

#include <Eigen/Dense>

#include "photodetect/detector.hpp"

namespace photodetect::spectral {

/// Uniform angular-frequency grid. Every sum over nodes carries the spacing
/// as its quadrature weight (rectangle rule).
class FrequencyGrid {
 public:
  FrequencyGrid(double omega_min, double omega_max, int n_points);

  double omega_min() const { return omega_min_; }
  double omega_max() const { return omega_max_; }
  int size() const { return n_points_; }
  double spacing() const { return (omega_max_ - omega_min_) / (n_points_ - 1); }
  double node(int i) const { return omega_min_ + i * spacing(); }
  // Index of the node closest to omega (clamped to the grid).
  int nearest(double omega) const;
  // Indices of the nodes inside [center - half_width, center + half_width];
  // edges within 1e-9 of a step snap inwards to include the boundary node.
  std::vector<int> window(double center, double half_width) const;
  bool covers(double lo, double hi) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  double omega_min_;
  double omega_max_;
  int n_points_;
};

// Single-photon spectral amplitude psi(omega_i), in amplitude per sqrt(rad/s).
struct SpectralAmplitude {
  FrequencyGrid grid;
  Eigen::VectorXcd amp;

  double norm() const;
};

// Two-photon amplitude psi(omega1_i, omega2_j); rows index the idler (detected)
// photon and columns the signal photon.
struct JointSpectralAmplitude {
  FrequencyGrid grid1;
  FrequencyGrid grid2;
  Eigen::MatrixXcd amp;

  double norm() const;
};

/// Signal density matrix on a frequency grid. `data(i, j)` holds
/// rho(omega_i, omega_j) * d omega, so the trace is a plain diagonal sum.
/// Conditional states are kept unnormalized; the trace is the heralding
/// probability.
struct SpectralDensityMatrix {
  FrequencyGrid grid;
  Eigen::MatrixXcd data;

  double trace() const { return data.trace().real(); }
  SpectralDensityMatrix normalized() const;
  // Throws ModelError unless Hermitian (1e-10), PSD (-1e-9) and trace <= 1 + 1e-9.
  void validate() const;
};

struct GaussianJsaShape {
  double center1 = 0.0;
  double center2 = 0.0;
  double width1 = 1.0;
  double width2 = 1.0;
  double correlation = 0.0;
};

/// Microscopic detector response eta(omega0, omega) = peak * h((omega - omega0) / resolution),
/// with h a unit top-hat on [-1, 1] or exp(-x^2 / 2). Detection outcomes omega0
/// run over the macroscopic window [center - bandwidth, center + bandwidth].
struct ResponseKernel {
  enum class Form { TopHat, Gaussian };

  Form form = Form::TopHat;
  double center = 0.0;
  double bandwidth = 0.0;
  double resolution = 0.0;
  double peak = 1.0;

  static ResponseKernel top_hat(const DetectorSpec& detector);
  // Dimensionless profile h at offset (omega - omega0).
  double profile(double offset) const;
};

struct SpectralProjection {
  SpectralAmplitude state;
  double probability;
};

// Normalized amplitude proportional to exp(-(omega - center)^2 / (2 width^2)).
// Requires the grid to cover center +- 5 widths.
SpectralAmplitude gaussian_amplitude(const FrequencyGrid& grid, double center, double width);

// Normalized bivariate Gaussian amplitude; correlation 0 gives a product state.
JointSpectralAmplitude gaussian_jsa(const FrequencyGrid& grid1, const FrequencyGrid& grid2, const GaussianJsaShape& shape);

// Top-hat single-photon projector of half-width delta around omega0.
SpectralProjection finite_res_project_single(const SpectralAmplitude& psi, double omega0, double delta);

// Heralded signal state for a top-hat detector on the idler arm: incoherent sum
// over microscopic outcomes omega0 of the coherent window amplitude.
SpectralDensityMatrix condition_signal_tophat(const JointSpectralAmplitude& jsa, const DetectorSpec& detector);

SpectralDensityMatrix condition_signal_kernel(const JointSpectralAmplitude& jsa, const ResponseKernel& kernel);

// Time-integrated (delta-response) limit: sum over omega0 of psi(omega0, .) psi*(omega0, .).
SpectralDensityMatrix time_integrated_limit(const JointSpectralAmplitude& jsa, const DetectorSpec& detector);

// Tr(rho^2) / Tr(rho)^2.
double purity(const SpectralDensityMatrix& rho);

// Largest net efficiency sum_{omega0} eta(omega0, omega) d omega0 over the grid nodes.
double kernel_net_efficiency(const ResponseKernel& kernel, const FrequencyGrid& grid);

}  // namespace photodetect::spectral
