#include "photodetect/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "photodetect/errors.hpp"

namespace photodetect {

void DetectorSpec::validate() const {
  if (!(eta_eff >= 0.0 && eta_eff <= 1.0)) {
    throw ParameterError("detector efficiency must lie in [0, 1], got " + std::to_string(eta_eff));
  }
  if (!(r_dark >= 0.0)) throw ParameterError("dark-count parameter r must be >= 0");
  if (!(tau_dead >= 0.0)) throw ParameterError("dead-time must be >= 0");
  if (!(bandwidth >= 0.0)) throw ParameterError("detector bandwidth must be >= 0");
  if (!(resolution >= 0.0)) throw ParameterError("detector resolution must be >= 0");
  if (!std::isfinite(center)) throw ParameterError("detector centre frequency must be finite");
}

}  // namespace photodetect

namespace photodetect::fock {
namespace {

constexpr double kTruncationTolerance = 1e-14;

void check_cutoff(int n_max) {
  if (n_max < 0 || n_max > kMaxCutoff) {
    throw ParameterError("photon-number cutoff must lie in [0, " + std::to_string(kMaxCutoff) + "]");
  }
}

void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ParameterError("transmissivity must lie in [0, 1], got " + std::to_string(eta));
  }
}

void require_single_mode(const FockDensityMatrix& rho, const char* op) {
  if (rho.modes() != 1) throw ParameterError(std::string(op) + " expects a single-mode state");
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }

// Probability that exactly k of n photons are lost at survival probability eta.
double loss_weight(int n, int k, double eta) {
  return binomial(n, k) * std::pow(eta, n - k) * std::pow(1.0 - eta, k);
}

}  // namespace

FockDensityMatrix::FockDensityMatrix(int n_max, int modes, Matrix data)
    : n_max_(n_max), modes_(modes), data_(std::move(data)) {
  check_cutoff(n_max);
  if (modes != 1 && modes != 2) throw ParameterError("Fock states support one or two modes");
  Eigen::Index expected = modes == 1 ? n_max + 1 : static_cast<Eigen::Index>(n_max + 1) * (n_max + 1);
  if (data_.rows() != expected || data_.cols() != expected) {
    throw ParameterError("density matrix shape does not match cutoff and mode count");
  }
}

FockDensityMatrix FockDensityMatrix::vacuum(int n_max) { return number_state(0, n_max); }

FockDensityMatrix FockDensityMatrix::number_state(int n, int n_max) {
  check_cutoff(n_max);
  return FockDensityMatrix(n_max, 1, number_projector(n, n_max + 1));
}

FockDensityMatrix FockDensityMatrix::two_mode_number_state(int m, int n, int n_max) {
  check_cutoff(n_max);
  if (m < 0 || n < 0 || m > n_max || n > n_max) throw ParameterError("photon number exceeds cutoff");
  Eigen::Index d = n_max + 1;
  Matrix data = Matrix::Zero(d * d, d * d);
  data(m * d + n, m * d + n) = 1.0;
  return FockDensityMatrix(n_max, 2, std::move(data));
}

FockDensityMatrix FockDensityMatrix::pure(const Vector& amplitudes) {
  if (amplitudes.size() == 0) throw ParameterError("empty amplitude vector");
  return FockDensityMatrix(static_cast<int>(amplitudes.size()) - 1, 1, amplitudes * amplitudes.adjoint());
}

FockDensityMatrix FockDensityMatrix::two_mode_pure(const Vector& amplitudes, int n_max) {
  return FockDensityMatrix(n_max, 2, amplitudes * amplitudes.adjoint());
}

FockDensityMatrix FockDensityMatrix::product(const FockDensityMatrix& a, const FockDensityMatrix& b) {
  require_single_mode(a, "product");
  require_single_mode(b, "product");
  if (a.n_max() != b.n_max()) throw ParameterError("product requires equal cutoffs");
  const Eigen::Index d = a.mode_dim();
  Matrix data(d * d, d * d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index mp = 0; mp < d; ++mp)
      data.block(m * d, mp * d, d, d) = a(m, mp) * b.matrix();
  return FockDensityMatrix(a.n_max(), 2, std::move(data));
}

double FockDensityMatrix::trace() const { return data_.trace().real(); }

double FockDensityMatrix::population(int n) const {
  require_single_mode(*this, "population(n)");
  if (n < 0 || n > n_max_) return 0.0;
  return data_(n, n).real();
}

double FockDensityMatrix::population(int m, int n) const {
  if (modes_ != 2) throw ParameterError("population(m, n) expects a two-mode state");
  if (m < 0 || n < 0 || m > n_max_ || n > n_max_) return 0.0;
  return data_(index(m, n), index(m, n)).real();
}

std::vector<double> FockDensityMatrix::marginal_populations(int mode) const {
  if (modes_ != 2 || (mode != 0 && mode != 1)) throw ParameterError("marginal requires a two-mode state and mode 0 or 1");
  std::vector<double> p(mode_dim(), 0.0);
  for (int m = 0; m <= n_max_; ++m)
    for (int n = 0; n <= n_max_; ++n) p[mode == 0 ? m : n] += population(m, n);
  return p;
}

double FockDensityMatrix::mean_photon_number() const {
  double total = 0.0;
  if (modes_ == 1) {
    for (int n = 0; n <= n_max_; ++n) total += n * population(n);
  } else {
    for (int m = 0; m <= n_max_; ++m)
      for (int n = 0; n <= n_max_; ++n) total += (m + n) * population(m, n);
  }
  return total;
}

FockDensityMatrix FockDensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0)) throw ModelError("cannot normalize a state with zero trace");
  return FockDensityMatrix(n_max_, modes_, data_ / t);
}

FockDensityMatrix FockDensityMatrix::trace_out_second() const {
  if (modes_ != 2) throw ParameterError("partial trace expects a two-mode state");
  const Eigen::Index d = mode_dim();
  Matrix reduced = Matrix::Zero(d, d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index mp = 0; mp < d; ++mp)
      for (Eigen::Index n = 0; n < d; ++n) reduced(m, mp) += data_(m * d + n, mp * d + n);
  return FockDensityMatrix(n_max_, 1, std::move(reduced));
}

double FockDensityMatrix::hermiticity_error() const { return (data_ - data_.adjoint()).cwiseAbs().maxCoeff(); }

double FockDensityMatrix::min_eigenvalue() const {
  Matrix herm = 0.5 * (data_ + data_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void FockDensityMatrix::validate() const {
  if (hermiticity_error() > 1e-12) throw ModelError("density matrix is not Hermitian");
  const double t = trace();
  if (t < -1e-12 || t > 1.0 + 1e-12) throw ModelError("density matrix trace outside [0, 1]");
  if (min_eigenvalue() < -1e-10) throw ModelError("density matrix is not positive semidefinite");
}

Matrix number_projector(int n, int dim) {
  if (dim <= 0) throw ParameterError("projector dimension must be positive");
  if (n < 0 || n >= dim) {
    throw ParameterError("photon number " + std::to_string(n) + " out of range for dimension " + std::to_string(dim));
  }
  Matrix p = Matrix::Zero(dim, dim);
  p(n, n) = 1.0;
  return p;
}

Measurement project_number(const FockDensityMatrix& rho, int n) {
  require_single_mode(rho, "project_number");
  const Eigen::Index d = rho.dim();
  if (n < 0 || n >= d) throw ParameterError("photon number out of range");
  Matrix out = Matrix::Zero(d, d);
  out(n, n) = rho(n, n);
  return {FockDensityMatrix(rho.n_max(), 1, std::move(out)), rho(n, n).real()};
}

Measurement project_click(const FockDensityMatrix& rho) {
  require_single_mode(rho, "project_click");
  const Eigen::Index d = rho.dim();
  Matrix out = Matrix::Zero(d, d);
  double p = 0.0;
  for (Eigen::Index n = 1; n < d; ++n) {
    out(n, n) = rho(n, n);
    p += rho(n, n).real();
  }
  return {FockDensityMatrix(rho.n_max(), 1, std::move(out)), p};
}

Measurement project_no_click(const FockDensityMatrix& rho) { return project_number(rho, 0); }

double beamsplitter_amplitude(int m_in, int n_in, int m_out, int n_out, double eta) {
  check_eta(eta);
  if (m_in < 0 || n_in < 0 || m_out < 0 || n_out < 0) return 0.0;
  if (m_in + n_in != m_out + n_out) return 0.0;
  const double t = std::sqrt(eta);
  const double r = std::sqrt(1.0 - eta);
  // a^dag^m b^dag^n expanded binomially; j photons of mode a stay in a,
  // l photons of mode b cross into a, so m_out = j + l.
  const double norm = 0.5 * (log_factorial(m_out) + log_factorial(n_out) - log_factorial(m_in) - log_factorial(n_in));
  double sum = 0.0;
  for (int j = 0; j <= m_in; ++j) {
    const int l = m_out - j;
    if (l < 0 || l > n_in) continue;
    const double sign = ((m_in - j) % 2 == 0) ? 1.0 : -1.0;
    const double term = binomial(m_in, j) * binomial(n_in, l) * std::pow(t, j + (n_in - l)) * std::pow(r, (m_in - j) + l);
    sum += sign * term;
  }
  return sum * std::exp(norm);
}

FockDensityMatrix beamsplitter_two_mode(const FockDensityMatrix& rho2, double eta) {
  check_eta(eta);
  if (rho2.modes() != 2) throw ParameterError("beamsplitter expects a two-mode state");
  const int n_max = rho2.n_max();
  for (int m = 0; m <= n_max; ++m)
    for (int n = n_max - m + 1; n <= n_max; ++n)
      if (std::abs(rho2.population(m, n)) > kTruncationTolerance) {
        throw ModelError("beamsplitter input has population with " + std::to_string(m + n) +
                         " photons, above the cutoff " + std::to_string(n_max));
      }

  // U is block diagonal in the total photon number N; block N uses basis |k, N-k>.
  std::vector<Eigen::MatrixXd> blocks(n_max + 1);
  for (int total = 0; total <= n_max; ++total) {
    Eigen::MatrixXd u(total + 1, total + 1);
    for (int out = 0; out <= total; ++out)
      for (int in = 0; in <= total; ++in) u(out, in) = beamsplitter_amplitude(in, total - in, out, total - out, eta);
    blocks[total] = std::move(u);
  }

  const Matrix& in = rho2.matrix();
  Matrix result = Matrix::Zero(in.rows(), in.cols());
  for (int big_n = 0; big_n <= n_max; ++big_n) {
    for (int big_m = 0; big_m <= n_max; ++big_m) {
      Matrix sub(big_n + 1, big_m + 1);
      for (int k = 0; k <= big_n; ++k)
        for (int q = 0; q <= big_m; ++q) sub(k, q) = in(rho2.index(k, big_n - k), rho2.index(q, big_m - q));
      Matrix rotated = blocks[big_n].cast<std::complex<double>>() * sub * blocks[big_m].transpose().cast<std::complex<double>>();
      for (int k = 0; k <= big_n; ++k)
        for (int q = 0; q <= big_m; ++q) result(rho2.index(k, big_n - k), rho2.index(q, big_m - q)) = rotated(k, q);
    }
  }
  return FockDensityMatrix(n_max, 2, std::move(result));
}

FockDensityMatrix loss_channel(const FockDensityMatrix& rho, double eta) {
  check_eta(eta);
  require_single_mode(rho, "loss_channel");
  const int d = rho.mode_dim();
  // Kraus operators K_k = sum_n sqrt(P(k lost | n)) |n-k><n|.
  Eigen::MatrixXd amp = Eigen::MatrixXd::Zero(d, d);  // amp(n, k) = sqrt(P(k lost | n))
  for (int n = 0; n < d; ++n)
    for (int k = 0; k <= n; ++k) amp(n, k) = std::sqrt(loss_weight(n, k, eta));

  Matrix out = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      std::complex<double> acc = 0.0;
      for (int k = 0; a + k < d && b + k < d; ++k) acc += amp(a + k, k) * amp(b + k, k) * rho(a + k, b + k);
      out(a, b) = acc;
    }
  }
  return FockDensityMatrix(rho.n_max(), 1, std::move(out));
}

FockDensityMatrix thermal_state(const ThermalSource& source) {
  if (!(source.r >= 0.0)) throw ParameterError("thermal parameter r must be >= 0");
  check_cutoff(source.n_max);
  const int d = source.n_max + 1;
  const double ratio = std::tanh(source.r);
  Eigen::VectorXd w(d);
  w(0) = 1.0;
  for (int n = 1; n < d; ++n) w(n) = w(n - 1) * ratio;
  w /= w.sum();
  return FockDensityMatrix(source.n_max, 1, w.cast<std::complex<double>>().asDiagonal());
}

std::vector<double> dark_count_probs(const DetectorSpec& spec, int k_max, int n_max) {
  spec.validate();
  check_cutoff(n_max);
  if (k_max < 0) throw ParameterError("k_max must be >= 0");
  const FockDensityMatrix thermal = thermal_state({spec.r_dark, n_max});
  // Thermal light enters the unused port; a thermal photon reaches the
  // detector when reflected, with probability 1 - eta.
  const double reflect = 1.0 - spec.eta_eff;
  std::vector<double> p(k_max + 1, 0.0);
  for (int k = 0; k <= k_max && k <= n_max; ++k) {
    double acc = 0.0;
    for (int n = k; n <= n_max; ++n) acc += thermal.population(n) * loss_weight(n, n - k, reflect);
    p[k] = acc;
  }
  return p;
}

bool dark_count_mass_exceeds_unity(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  return total > 1.0 + 1e-6;
}

FockDensityMatrix measure_with_dark_counts(const FockDensityMatrix& rho, const DetectorSpec& spec, int n) {
  spec.validate();
  require_single_mode(rho, "measure_with_dark_counts");
  if (n < 0 || n > rho.n_max()) throw ParameterError("signature photon number out of range");
  const FockDensityMatrix lossy = loss_channel(rho, spec.eta_eff);
  const std::vector<double> p_dc = dark_count_probs(spec, n, rho.n_max());

  const int d = rho.mode_dim();
  Matrix out = Matrix::Zero(d, d);
  out(n, n) = lossy(n, n);
  for (int i = 0; i < n; ++i) out(i, i) += p_dc[n - i] * lossy(i, i);
  return FockDensityMatrix(rho.n_max(), 1, std::move(out));
}

}  // namespace photodetect::fock
