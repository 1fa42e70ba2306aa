#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "photodetect/spectral.hpp"

namespace photodetect::io {

// Shortest-safe round-trip text for a double (17 significant digits).
std::string format_number(double value);

// Parses a full numeric field; throws ParameterError on trailing junk.
double parse_number(const std::string& field);

/// Named numeric columns plus `#`-prefixed metadata lines.
class ResultTable {
 public:
  void add_column(std::string name, std::vector<double> values);
  void add_metadata(std::string key, std::string value);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::vector<double>>& columns() const { return columns_; }
  const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }
  const std::vector<double>& column(const std::string& name) const;
  const std::string& metadata_value(const std::string& key) const;
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }

  // Metadata lines, header row, then one line per row.
  void write(std::ostream& out) const;
  static ResultTable read(std::istream& in);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::pair<std::string, std::string>> metadata_;
};

// Joint amplitude as CSV: a `#` header line with both grids, then one row per
// omega1 node holding re,im pairs for every omega2 node.
void write_jsa(std::ostream& out, const spectral::JointSpectralAmplitude& jsa);
spectral::JointSpectralAmplitude read_jsa(std::istream& in);

// Density matrix in the same interleaved re,im layout with a single grid header.
void write_density(std::ostream& out, const spectral::SpectralDensityMatrix& rho);
spectral::SpectralDensityMatrix read_density(std::istream& in);

}  // namespace photodetect::io
