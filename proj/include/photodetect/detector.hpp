#pragma once

#include <limits>

namespace photodetect {

/// Physical parameters of a single photo-detector.
///
/// Spectral quantities are angular frequencies in rad/s. `bandwidth` is the
/// half-width of the macroscopic response window centred on `center`;
/// `resolution` is the half-width of a single microscopic detection event.
struct DetectorSpec {
  double eta_eff = 1.0;
  double r_dark = 0.0;
  double tau_dead = 0.0;
  double center = 0.0;
  double bandwidth = std::numeric_limits<double>::infinity();
  double resolution = 0.0;

  // Throws ParameterError when a field is outside its physical range.
  void validate() const;
};

}  // namespace photodetect
