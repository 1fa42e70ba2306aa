#include "photodetect/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "photodetect/errors.hpp"

namespace photodetect::spectral {
namespace {

using Complex = std::complex<double>;

constexpr double kSnapTolerance = 1e-9;  // in units of the grid spacing
constexpr double kCoverageWidths = 5.0;

void check_jsa(const JointSpectralAmplitude& jsa) {
  if (jsa.amp.rows() != jsa.grid1.size() || jsa.amp.cols() != jsa.grid2.size()) {
    throw ParameterError("joint amplitude shape does not match its grids");
  }
}

// Outcome nodes omega0 of the macroscopic window. A window narrower than one
// grid step collapses to the node nearest the centre.
std::vector<int> outcome_nodes(const FrequencyGrid& grid, double center, double bandwidth) {
  const double step = grid.spacing();
  if (center < grid.omega_min() - 0.5 * step || center > grid.omega_max() + 0.5 * step) {
    throw ParameterError("detector window does not intersect the frequency grid");
  }
  if (bandwidth < step) return {grid.nearest(center)};
  auto nodes = grid.window(center, bandwidth);
  if (nodes.empty()) throw ParameterError("detector window does not intersect the frequency grid");
  return nodes;
}

// Largest node offset inside a top-hat of half-width `half_width`.
int tophat_reach(double half_width, double step) { return static_cast<int>(std::floor(half_width / step + kSnapTolerance)); }

// Profile h sampled at node offsets -(n-1)..(n-1), stored at index k + n - 1.
std::vector<double> sampled_profile(const ResponseKernel& kernel, double step, int n) {
  std::vector<double> h(2 * n - 1, 0.0);
  for (int k = -(n - 1); k <= n - 1; ++k) {
    double value;
    if (kernel.form == ResponseKernel::Form::TopHat || kernel.resolution == 0.0) {
      value = std::abs(k) <= tophat_reach(kernel.resolution, step) ? 1.0 : 0.0;
    } else {
      value = kernel.profile(k * step);
    }
    h[k + n - 1] = value;
  }
  return h;
}

void check_kernel(const ResponseKernel& kernel) {
  if (!(kernel.resolution >= 0.0)) throw ParameterError("kernel resolution must be >= 0");
  if (!(kernel.bandwidth >= 0.0)) throw ParameterError("kernel bandwidth must be >= 0");
  if (!(kernel.peak >= 0.0)) throw ParameterError("kernel peak efficiency must be >= 0");
}

}  // namespace

FrequencyGrid::FrequencyGrid(double omega_min, double omega_max, int n_points)
    : omega_min_(omega_min), omega_max_(omega_max), n_points_(n_points) {
  if (n_points < 2) throw ParameterError("frequency grid needs at least two points");
  if (!(omega_max > omega_min) || !std::isfinite(omega_min) || !std::isfinite(omega_max)) {
    throw ParameterError("frequency grid bounds must be finite with omega_max > omega_min");
  }
}

int FrequencyGrid::nearest(double omega) const {
  const double pos = std::round((omega - omega_min_) / spacing());
  return static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(n_points_ - 1)));
}

std::vector<int> FrequencyGrid::window(double center, double half_width) const {
  const double step = spacing();
  const double lo = (center - half_width - omega_min_) / step - kSnapTolerance;
  const double hi = (center + half_width - omega_min_) / step + kSnapTolerance;
  const int first = std::max(0, static_cast<int>(std::ceil(lo)));
  const int last = std::min(n_points_ - 1, static_cast<int>(std::floor(hi)));
  std::vector<int> nodes;
  for (int i = first; i <= last; ++i) nodes.push_back(i);
  return nodes;
}

bool FrequencyGrid::covers(double lo, double hi) const {
  const double slack = kSnapTolerance * spacing();
  return omega_min_ <= lo + slack && omega_max_ >= hi - slack;
}

double SpectralAmplitude::norm() const { return amp.squaredNorm() * grid.spacing(); }

double JointSpectralAmplitude::norm() const { return amp.squaredNorm() * grid1.spacing() * grid2.spacing(); }

SpectralDensityMatrix SpectralDensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw ModelError("cannot normalize a spectral state with zero trace");
  return {grid, data / t};
}

void SpectralDensityMatrix::validate() const {
  if ((data - data.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ModelError("spectral density matrix is not Hermitian");
  const double t = trace();
  if (t < -1e-9 || t > 1.0 + 1e-9) throw ModelError("spectral density matrix trace outside [0, 1]");
  Eigen::MatrixXcd herm = 0.5 * (data + data.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-9) throw ModelError("spectral density matrix is not positive semidefinite");
}

ResponseKernel ResponseKernel::top_hat(const DetectorSpec& detector) {
  detector.validate();
  ResponseKernel k;
  k.form = Form::TopHat;
  k.center = detector.center;
  k.bandwidth = detector.bandwidth;
  k.resolution = detector.resolution;
  k.peak = detector.eta_eff;
  return k;
}

double ResponseKernel::profile(double offset) const {
  if (form == Form::TopHat) return std::abs(offset) <= resolution ? 1.0 : 0.0;
  if (resolution == 0.0) return offset == 0.0 ? 1.0 : 0.0;
  const double x = offset / resolution;
  return std::exp(-0.5 * x * x);
}

SpectralAmplitude gaussian_amplitude(const FrequencyGrid& grid, double center, double width) {
  if (!(width > 0.0)) throw ParameterError("Gaussian width must be > 0");
  if (!grid.covers(center - kCoverageWidths * width, center + kCoverageWidths * width)) {
    throw CoverageError("frequency grid must span the centre +- 5 widths");
  }
  Eigen::VectorXcd amp(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const double x = (grid.node(i) - center) / width;
    amp(i) = std::exp(-0.5 * x * x);
  }
  amp /= std::sqrt(amp.squaredNorm() * grid.spacing());
  return {grid, std::move(amp)};
}

JointSpectralAmplitude gaussian_jsa(const FrequencyGrid& grid1, const FrequencyGrid& grid2, const GaussianJsaShape& shape) {
  if (!(shape.width1 > 0.0 && shape.width2 > 0.0)) throw ParameterError("JSA widths must be > 0");
  if (!(shape.correlation > -1.0 && shape.correlation < 1.0)) throw ParameterError("JSA correlation must lie in (-1, 1)");
  if (!grid1.covers(shape.center1 - kCoverageWidths * shape.width1, shape.center1 + kCoverageWidths * shape.width1) ||
      !grid2.covers(shape.center2 - kCoverageWidths * shape.width2, shape.center2 + kCoverageWidths * shape.width2)) {
    throw CoverageError("frequency grids must span each centre +- 5 widths");
  }
  const double rho = shape.correlation;
  const double scale = 1.0 / (2.0 * (1.0 - rho * rho));
  Eigen::MatrixXcd amp(grid1.size(), grid2.size());
  for (int i = 0; i < grid1.size(); ++i) {
    const double x = (grid1.node(i) - shape.center1) / shape.width1;
    for (int j = 0; j < grid2.size(); ++j) {
      const double y = (grid2.node(j) - shape.center2) / shape.width2;
      amp(i, j) = std::exp(-scale * (x * x - 2.0 * rho * x * y + y * y));
    }
  }
  amp /= std::sqrt(amp.squaredNorm() * grid1.spacing() * grid2.spacing());
  return {grid1, grid2, std::move(amp)};
}

SpectralProjection finite_res_project_single(const SpectralAmplitude& psi, double omega0, double delta) {
  if (!(delta >= 0.0)) throw ParameterError("resolution half-width must be >= 0");
  if (psi.amp.size() != psi.grid.size()) throw ParameterError("amplitude size does not match its grid");
  Eigen::VectorXcd kept = Eigen::VectorXcd::Zero(psi.grid.size());
  for (int i : psi.grid.window(omega0, delta)) kept(i) = psi.amp(i);
  const double p = kept.squaredNorm() * psi.grid.spacing();
  return {{psi.grid, std::move(kept)}, p};
}

SpectralDensityMatrix condition_signal_tophat(const JointSpectralAmplitude& jsa, const DetectorSpec& detector) {
  detector.validate();
  check_jsa(jsa);
  const FrequencyGrid& g1 = jsa.grid1;
  const double d1 = g1.spacing();
  const double d2 = jsa.grid2.spacing();
  const int n1 = g1.size();
  const std::vector<int> outcomes = outcome_nodes(g1, detector.center, detector.bandwidth);

  // Each coherent window amplitude is weighted by 1 / (nominal window measure)^2.
  const int reach = std::min(tophat_reach(detector.resolution, d1), n1 - 1);
  const double measure = (2 * reach + 1) * d1;
  const double weight = detector.eta_eff * d1 / (measure * measure);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(jsa.grid2.size(), jsa.grid2.size());
  for (int i0 : outcomes) {
    const int first = std::max(0, i0 - reach);
    const int last = std::min(n1 - 1, i0 + reach);
    Eigen::VectorXcd phi = jsa.amp.middleRows(first, last - first + 1).colwise().sum().transpose() * d1;
    phi *= std::sqrt(d2);
    rho.noalias() += weight * (phi * phi.adjoint());
  }
  return {jsa.grid2, std::move(rho)};
}

SpectralDensityMatrix condition_signal_kernel(const JointSpectralAmplitude& jsa, const ResponseKernel& kernel) {
  check_kernel(kernel);
  check_jsa(jsa);
  const FrequencyGrid& g1 = jsa.grid1;
  const double net = kernel_net_efficiency(kernel, g1);
  if (net > 1.0 + 1e-6) {
    throw ModelError("response kernel has net efficiency " + std::to_string(net) + " > 1 at some frequency");
  }
  const double d1 = g1.spacing();
  const double d2 = jsa.grid2.spacing();
  const int n1 = g1.size();
  const std::vector<int> outcomes = outcome_nodes(g1, kernel.center, kernel.bandwidth);
  const std::vector<double> h = sampled_profile(kernel, d1, n1);

  double coherent_measure = 0.0;
  std::vector<double> root_h(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    root_h[k] = std::sqrt(h[k]);
    coherent_measure += root_h[k] * d1;
  }
  const double weight = kernel.peak * d1 / (coherent_measure * coherent_measure);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(jsa.grid2.size(), jsa.grid2.size());
  Eigen::VectorXcd phi(jsa.grid2.size());
  for (int i0 : outcomes) {
    phi.setZero();
    for (int i1 = 0; i1 < n1; ++i1) {
      const double s = root_h[i1 - i0 + n1 - 1];
      if (s == 0.0) continue;
      phi += (s * d1) * jsa.amp.row(i1).transpose();
    }
    phi *= std::sqrt(d2);
    rho.noalias() += weight * (phi * phi.adjoint());
  }
  return {jsa.grid2, std::move(rho)};
}

SpectralDensityMatrix time_integrated_limit(const JointSpectralAmplitude& jsa, const DetectorSpec& detector) {
  detector.validate();
  check_jsa(jsa);
  const double d1 = jsa.grid1.spacing();
  const double d2 = jsa.grid2.spacing();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(jsa.grid2.size(), jsa.grid2.size());
  for (int i0 : outcome_nodes(jsa.grid1, detector.center, detector.bandwidth)) {
    Eigen::VectorXcd v = jsa.amp.row(i0).transpose() * std::sqrt(d2);
    rho.noalias() += (detector.eta_eff * d1) * (v * v.adjoint());
  }
  return {jsa.grid2, std::move(rho)};
}

double purity(const SpectralDensityMatrix& rho) {
  const double t = rho.trace();
  if (!(t > 0.0)) throw ModelError("purity is undefined for a state with zero trace");
  return rho.data.squaredNorm() / (t * t);
}

double kernel_net_efficiency(const ResponseKernel& kernel, const FrequencyGrid& grid) {
  check_kernel(kernel);
  const int n = grid.size();
  const double step = grid.spacing();
  const std::vector<double> h = sampled_profile(kernel, step, n);
  double mass = 0.0;
  for (double v : h) mass += v * step;
  const std::vector<int> outcomes = outcome_nodes(grid, kernel.center, kernel.bandwidth);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double net = 0.0;
    for (int i0 : outcomes) net += kernel.peak * h[i - i0 + n - 1] / mass * step;
    worst = std::max(worst, net);
  }
  return worst;
}

}  // namespace photodetect::spectral
