#pragma once

#include <optional>
#include <span>
#include <utility>

#include "photodetect/detector.hpp"
#include "photodetect/spectral.hpp"

namespace photodetect::hom {

using spectral::SpectralAmplitude;

/// Inputs for one point of a two-photon interference curve.
///
/// `tau` is the relative delay in units where the Gaussian dip reads
/// exp(-tau^2). Simulation mode needs `spectra`; `delay_unit` converts tau to
/// a physical delay and is calibrated from the first spectrum when absent.
struct HomConfig {
  double gamma = 1.0;
  double tau = 0.0;
  std::optional<std::pair<SpectralAmplitude, SpectralAmplitude>> spectra;
  std::optional<std::pair<DetectorSpec, DetectorSpec>> detectors;
  std::optional<double> delay_unit;

  void validate() const;
};

// |sum psiA conj(psiB) d omega|^2 on a shared grid.
double gamma_overlap(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b);

// 1/2 - gamma exp(-tau^2) / 2.
double coincidence_analytic(double gamma, double tau);

// Physical delay (s per unit tau) at which the self-overlap
// |<psi| e^{i omega t} |psi>|^2 falls to 1/e. Equals sqrt(2)/w for a Gaussian
// amplitude of width w.
double calibrate_delay_unit(const SpectralAmplitude& reference);

// Probability of one photon in each beamsplitter output, from the symmetrized
// two-photon amplitude. `gamma_extra` scales the interference term.
double coincidence_simulated(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b, double tau,
                             double gamma_extra, double delay_unit);

// As coincidence_simulated, with each output arm seen through a detector's
// efficiency and top-hat spectral window.
double coincidence_detector_dressed(const SpectralAmplitude& psi_a, const SpectralAmplitude& psi_b, double tau,
                                    const DetectorSpec& det_a, const DetectorSpec& det_b, double gamma_extra,
                                    double delay_unit);

// Dispatches on the populated fields of `config`.
double coincidence(const HomConfig& config);

// (max - min) / (max + min).
double visibility(std::span<const double> curve);

}  // namespace photodetect::hom
