#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mixrate/measures.hpp"

namespace mixrate {

/// {"atoms":[{"w":..,"theta":..},..],"theta_lo":..,"theta_hi":..}
nlohmann::json to_json(const MixingDistribution &g);

/// Weights must sum to one within 1e-9 (then rescaled); every atom must lie
/// in [theta_lo, theta_hi]. Bounds default to [-10, 10].
MixingDistribution mixing_from_json(const nlohmann::json &j);

MixingDistribution load_mixing_distribution(const std::string &path);
void save_mixing_distribution(const MixingDistribution &g, const std::string &path);

/// One real per line; blank lines and a non-numeric header line are skipped.
std::vector<double> load_samples_csv(const std::string &path);

nlohmann::json read_json_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

} // namespace mixrate
