#include "mixrate/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mixrate/errors.hpp"

namespace mixrate {

namespace {

constexpr double kLoadMassTolerance = 1e-9;

double number_field(const nlohmann::json &j, const char *key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ArgumentError(std::string("expected a numeric field '") + key + "'");
  return j.at(key).get<double>();
}

} // namespace

nlohmann::json to_json(const MixingDistribution &g) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto &a : g.atoms()) atoms.push_back({{"w", a.weight}, {"theta", a.theta}});
  return {{"atoms", atoms}, {"theta_lo", g.bounds().lo}, {"theta_hi", g.bounds().hi}};
}

MixingDistribution mixing_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ArgumentError("mixing distribution must be a JSON object");
  for (const auto &[key, _] : j.items())
    if (key != "atoms" && key != "theta_lo" && key != "theta_hi")
      throw ArgumentError("unknown key '" + key + "' in mixing distribution");
  if (!j.contains("atoms") || !j.at("atoms").is_array() || j.at("atoms").empty())
    throw ArgumentError("mixing distribution needs a nonempty 'atoms' array");

  ThetaBounds bounds;
  if (j.contains("theta_lo")) bounds.lo = number_field(j, "theta_lo");
  if (j.contains("theta_hi")) bounds.hi = number_field(j, "theta_hi");
  if (!(bounds.lo < bounds.hi)) throw ArgumentError("theta_lo must be below theta_hi");

  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < j.at("atoms").size(); ++i) {
    const auto &a = j.at("atoms")[i];
    if (!a.is_object()) throw ArgumentError("atom " + std::to_string(i) + " is not an object");
    for (const auto &[key, _] : a.items())
      if (key != "w" && key != "theta")
        throw ArgumentError("unknown key '" + key + "' in atom " + std::to_string(i));
    const Atom atom{number_field(a, "w"), number_field(a, "theta")};
    if (!std::isfinite(atom.weight) || atom.weight <= 0.0)
      throw ArgumentError("atom " + std::to_string(i) + " has non-positive weight");
    if (!bounds.contains(atom.theta)) {
      std::ostringstream os;
      os << "atom " << i << " (theta=" << atom.theta << ") lies outside [" << bounds.lo << ", "
         << bounds.hi << "]";
      throw DomainError(os.str());
    }
    total += atom.weight;
    atoms.push_back(atom);
  }
  if (std::abs(total - 1.0) > kLoadMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << " (residual " << total - 1.0 << ")";
    throw ArgumentError(os.str());
  }
  return MixingDistribution::normalized(std::move(atoms), bounds);
}

nlohmann::json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw IoError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

MixingDistribution load_mixing_distribution(const std::string &path) {
  return mixing_from_json(read_json_file(path));
}

void save_mixing_distribution(const MixingDistribution &g, const std::string &path) {
  write_text_file(path, to_json(g).dump(2) + "\n");
}

std::vector<double> load_samples_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto cell = line.substr(first, line.find_first_of(",\r") - first);
    try {
      std::size_t used = 0;
      const double x = std::stod(cell, &used);
      if (!std::isfinite(x)) throw std::invalid_argument("non-finite");
      xs.push_back(x);
    } catch (const std::exception &) {
      if (lineno == 1) continue;
      throw IoError("'" + path + "' line " + std::to_string(lineno) + ": not a number");
    }
  }
  if (xs.empty()) throw IoError("'" + path + "' holds no samples");
  return xs;
}

} // namespace mixrate
