#include "photodetect/hom.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "photodetect/errors.hpp"

namespace photodetect::hom {
namespace {

using Complex = std::complex<double>;

constexpr double kOverlapTolerance = 1e-9;
// Required separation, in inverse rms spectral widths, between the applied
// delay and the grid's aliasing period 2 pi / d omega.
constexpr double kAliasMargin = 8.0;

void check_shared_grid(const SpectralAmplitude& a, const SpectralAmplitude& b) {
  if (!(a.grid == b.grid)) throw ParameterError("spectral amplitudes must share one frequency grid");
  if (a.amp.size() != a.grid.size() || b.amp.size() != b.grid.size()) {
    throw ParameterError("spectral amplitude length does not match its grid");
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ParameterError("mode overlap gamma must lie in [0, 1]");
}

double rms_width(const SpectralAmplitude& psi) {
  const Eigen::ArrayXd weight = psi.amp.cwiseAbs2().array();
  const double total = weight.sum();
  if (!(total > 0.0)) throw ParameterError("spectral amplitude is identically zero");
  double mean = 0.0, second = 0.0;
  for (int i = 0; i < psi.grid.size(); ++i) mean += weight(i) * psi.grid.node(i);
  mean /= total;
  for (int i = 0; i < psi.grid.size(); ++i) second += weight(i) * std::pow(psi.grid.node(i) - mean, 2);
  return std::sqrt(second / total);
}

// |<psi| e^{i omega t} |psi>|^2 / <psi|psi>^2
double delayed_self_overlap(const SpectralAmplitude& psi, double t) {
  Complex acc = 0.0;
  double total = 0.0;
  for (int i = 0; i < psi.grid.size(); ++i) {
    const double w = std::norm(psi.amp(i));
    acc += w * std::polar(1.0, psi.grid.node(i) * t);
    total += w;
  }
  return std::norm(acc) / (total * total);
}

Eigen::VectorXcd delayed(const SpectralAmplitude& psi, double t) {
  Eigen::VectorXcd out(psi.grid.size());
  for (int i = 0; i < psi.grid.size(); ++i) out(i) = psi.amp(i) * std::polar(1.0, psi.grid.node(i) * t);
  return out;
}

void check_delay_coverage(const SpectralAmplitude& a, const SpectralAmplitude& b, double t) {
  const double period = 2.0 * std::numbers::pi / a.grid.spacing();
  const double sigma = std::min(rms_width(a), rms_width(b));
  if ((period - std::abs(t)) * sigma < kAliasMargin) {
    throw CoverageError("frequency grid too coarse for the requested delay");
  }
}

std::vector<char> window_mask(const spectral::FrequencyGrid& grid, const DetectorSpec& det) {
  if (std::isinf(det.bandwidth)) return std::vector<char>(grid.size(), 1);
  std::vector<char> mask(grid.size(), 0);
  for (int i : grid.window(det.center, det.bandwidth)) mask[i] = 1;
  return mask;
}

// Coincidence probability with output arm c restricted to `mask_c` and arm d
// to `mask_d`. Phi(u, v) = psiA(u) psiB(v) is mapped by the balanced
// beamsplitter to the c(u) d(v) amplitude (Phi(u, v) - Phi(v, u)) / 2.
double coincidence_core(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, double step, double gamma_extra,
                        const std::vector<char>& mask_c, const std::vector<char>& mask_d) {
  const int n = static_cast<int>(a.size());
  double direct = 0.0, antisym = 0.0;
  for (int u = 0; u < n; ++u) {
    if (!mask_c[u]) continue;
    for (int v = 0; v < n; ++v) {
      if (!mask_d[v]) continue;
      const Complex forward = a(u) * b(v);
      const Complex swapped = a(v) * b(u);
      direct += std::norm(forward) + std::norm(swapped);
      antisym += std::norm(forward - swapped);
    }
  }
  return 0.25 * step * step * ((1.0 - gamma_extra) * direct + gamma_extra * antisym);
}

}  // namespace

void HomConfig::validate() const {
  check_gamma(gamma);
  if (!std::isfinite(tau)) throw ParameterError("delay tau must be finite");
  if (spectra) check_shared_grid(spectra->first, spectra->second);
  if (detectors) {
    if (!spectra) throw ParameterError("detector dressing requires simulation spectra");
    detectors->first.validate();
    detectors->second.validate();
  }
  if (delay_unit && !(*delay_unit > 0.0 && std::isfinite(*delay_unit))) {
    throw ParameterError("delay unit must be finite and > 0");
  }
}

double gamma_overlap(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b) {
  check_shared_grid(psi_a, psi_b);
  const Complex overlap = psi_b.amp.dot(psi_a.amp) * psi_a.grid.spacing();
  const double gamma = std::norm(overlap);
  if (gamma > 1.0 + kOverlapTolerance) throw ModelError("mode overlap exceeds 1; inputs are not normalized");
  return std::min(gamma, 1.0);
}

double coincidence_analytic(double gamma, double tau) {
  check_gamma(gamma);
  return 0.5 - 0.5 * gamma * std::exp(-tau * tau);
}

double calibrate_delay_unit(const SpectralAmplitude& reference) {
  const double target = std::exp(-1.0);
  const double limit = std::numbers::pi / reference.grid.spacing();
  double lo = 0.0;
  double hi = std::min(1.0 / rms_width(reference), limit);
  while (delayed_self_overlap(reference, hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > limit) throw CoverageError("frequency grid too coarse to calibrate the delay unit");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (delayed_self_overlap(reference, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double coincidence_simulated(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b, double tau,
                             double gamma_extra, double delay_unit) {
  DetectorSpec transparent;
  return coincidence_detector_dressed(psi_a, psi_b, tau, transparent, transparent, gamma_extra, delay_unit);
}

double coincidence_detector_dressed(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b, double tau,
                                    const DetectorSpec& det_a, const DetectorSpec& det_b, double gamma_extra,
                                    double delay_unit) {
  check_shared_grid(psi_a, psi_b);
  check_gamma(gamma_extra);
  det_a.validate();
  det_b.validate();
  if (!(delay_unit > 0.0 && std::isfinite(delay_unit))) throw ParameterError("delay unit must be finite and > 0");
  const double t = tau * delay_unit;
  check_delay_coverage(psi_a, psi_b, t);
  const double p = coincidence_core(psi_a.amp, delayed(psi_b, t), psi_a.grid.spacing(), gamma_extra,
                                    window_mask(psi_a.grid, det_a), window_mask(psi_a.grid, det_b));
  return det_a.eta_eff * det_b.eta_eff * p;
}

double coincidence(const HomConfig& config) {
  config.validate();
  if (!config.spectra) return coincidence_analytic(config.gamma, config.tau);
  const auto& [a, b] = *config.spectra;
  const double unit = config.delay_unit ? *config.delay_unit : calibrate_delay_unit(a);
  if (!config.detectors) return coincidence_simulated(a, b, config.tau, config.gamma, unit);
  return coincidence_detector_dressed(a, b, config.tau, config.detectors->first, config.detectors->second,
                                      config.gamma, unit);
}

double visibility(std::span<const double> curve) {
  if (curve.empty()) throw ParameterError("visibility needs a non-empty curve");
  for (double c : curve) {
    if (!(c >= 0.0)) throw ParameterError("coincidence values must be non-negative");
  }
  const auto [lo, hi] = std::minmax_element(curve.begin(), curve.end());
  if (*hi + *lo == 0.0) throw ModelError("visibility of an all-zero curve is undefined");
  return (*hi - *lo) / (*hi + *lo);
}

}  // namespace photodetect::hom
