#include "photodetect/csv.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "photodetect/errors.hpp"

namespace photodetect::io {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// "# tag k1=v1 k2=v2 ..." -> {k: v}; the tag must match.
std::map<std::string, std::string> parse_grid_header(std::istream& in, const std::string& tag) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("missing " + tag + " header line");
  std::istringstream tokens(strip_cr(line));
  std::string hash, found;
  tokens >> hash >> found;
  if (hash != "#" || found != tag) throw ParameterError("expected '# " + tag + "' header line");
  std::map<std::string, std::string> fields;
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ParameterError("malformed header token: " + token);
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return fields;
}

double header_number(const std::map<std::string, std::string>& fields, const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw ParameterError("header is missing '" + key + "'");
  return parse_number(it->second);
}

int header_count(const std::map<std::string, std::string>& fields, const std::string& key) {
  const double v = header_number(fields, key);
  if (v != static_cast<int>(v)) throw ParameterError("header field '" + key + "' must be an integer");
  return static_cast<int>(v);
}

void write_complex_rows(std::ostream& out, const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_number(m(i, j).real()) << ',' << format_number(m(i, j).imag());
    }
    out << '\n';
  }
}

Eigen::MatrixXcd read_complex_rows(std::istream& in, int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  std::string line;
  for (int i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ParameterError("matrix has fewer rows than its header declares");
    const auto fields = split(strip_cr(line), ',');
    if (static_cast<int>(fields.size()) != 2 * cols) throw ParameterError("matrix row has the wrong number of fields");
    for (int j = 0; j < cols; ++j) m(i, j) = {parse_number(fields[2 * j]), parse_number(fields[2 * j + 1])};
  }
  while (std::getline(in, line)) {
    if (!strip_cr(line).empty()) throw ParameterError("matrix has more rows than its header declares");
  }
  return m;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_number(const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParameterError("not a number: '" + field + "'");
  }
  if (field.find_first_not_of(" \t", used) != std::string::npos) throw ParameterError("not a number: '" + field + "'");
  return v;
}

void ResultTable::add_column(std::string name, std::vector<double> values) {
  if (name.empty() || name.find_first_of(",\n") != std::string::npos) throw ParameterError("invalid column name");
  if (!columns_.empty() && values.size() != rows()) throw ParameterError("column '" + name + "' has the wrong length");
  for (const auto& existing : names_) {
    if (existing == name) throw ParameterError("duplicate column '" + name + "'");
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
}

void ResultTable::add_metadata(std::string key, std::string value) {
  if (key.empty() || key.find_first_of(":\n") != std::string::npos) throw ParameterError("invalid metadata key");
  if (value.find('\n') != std::string::npos) throw ParameterError("metadata values must be single-line");
  metadata_.emplace_back(std::move(key), std::move(value));
}

const std::vector<double>& ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return columns_[i];
  }
  throw ParameterError("no column named '" + name + "'");
}

const std::string& ResultTable::metadata_value(const std::string& key) const {
  for (const auto& [k, v] : metadata_) {
    if (k == key) return v;
  }
  throw ParameterError("no metadata entry '" + key + "'");
}

void ResultTable::write(std::ostream& out) const {
  for (const auto& [key, value] : metadata_) out << "# " << key << ": " << value << '\n';
  for (std::size_t c = 0; c < names_.size(); ++c) out << (c ? "," : "") << names_[c];
  out << '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << format_number(columns_[c][r]);
    out << '\n';
  }
}

ResultTable ResultTable::read(std::istream& in) {
  ResultTable table;
  std::string line;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  bool header = false;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(": ");
      if (line.rfind("# ", 0) != 0 || colon == std::string::npos) throw ParameterError("malformed metadata line: " + line);
      table.add_metadata(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    const auto fields = split(line, ',');
    if (!header) {
      names = fields;
      columns.resize(names.size());
      header = true;
      continue;
    }
    if (fields.size() != names.size()) throw ParameterError("row has the wrong number of fields: " + line);
    for (std::size_t c = 0; c < fields.size(); ++c) columns[c].push_back(parse_number(fields[c]));
  }
  for (std::size_t c = 0; c < names.size(); ++c) table.add_column(names[c], std::move(columns[c]));
  return table;
}

void write_jsa(std::ostream& out, const spectral::JointSpectralAmplitude& jsa) {
  out << "# jsa omega1_min=" << format_number(jsa.grid1.omega_min()) << " omega1_max=" << format_number(jsa.grid1.omega_max())
      << " n1=" << jsa.grid1.size() << " omega2_min=" << format_number(jsa.grid2.omega_min())
      << " omega2_max=" << format_number(jsa.grid2.omega_max()) << " n2=" << jsa.grid2.size() << '\n';
  write_complex_rows(out, jsa.amp);
}

spectral::JointSpectralAmplitude read_jsa(std::istream& in) {
  const auto h = parse_grid_header(in, "jsa");
  spectral::FrequencyGrid g1(header_number(h, "omega1_min"), header_number(h, "omega1_max"), header_count(h, "n1"));
  spectral::FrequencyGrid g2(header_number(h, "omega2_min"), header_number(h, "omega2_max"), header_count(h, "n2"));
  auto amp = read_complex_rows(in, g1.size(), g2.size());
  return {g1, g2, std::move(amp)};
}

void write_density(std::ostream& out, const spectral::SpectralDensityMatrix& rho) {
  out << "# density omega_min=" << format_number(rho.grid.omega_min()) << " omega_max=" << format_number(rho.grid.omega_max())
      << " n=" << rho.grid.size() << '\n';
  write_complex_rows(out, rho.data);
}

spectral::SpectralDensityMatrix read_density(std::istream& in) {
  const auto h = parse_grid_header(in, "density");
  spectral::FrequencyGrid g(header_number(h, "omega_min"), header_number(h, "omega_max"), header_count(h, "n"));
  auto data = read_complex_rows(in, g.size(), g.size());
  return {g, std::move(data)};
}

}  // namespace photodetect::io
