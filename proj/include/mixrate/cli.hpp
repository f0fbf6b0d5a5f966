#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixrate/experiments.hpp"

namespace mixrate::cli {

/// Runs one subcommand. Exit codes: 0 success, 2 validation error,
/// 3 numerical infeasibility, 4 I/O error. Errors are also reported as a
/// single JSON line on `err`.
int dispatch(int argc, char **argv);
/// `args` excludes the program name.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Rate-sweep configuration file:
///
///   {"family": "gaussian", "sigma": 1.0,
///    "truth": {"kind": "fixed", "distribution": {...}}
///          | {"kind": "hard_instance", "u": 12, "m": 2, "base_moments": [0, 4],
///             "g0": {...}, "scale_n": 1000},
///    "m": 2, "m0": 1, "n_grid": [256, 1024, 4096, 16384], "reps": 100, "seed": 7,
///    "estimator": {"restarts": 16, "max_iter": 600, "weight_floor": 1e-6,
///                  "merge_radius": 1e-6, "early_stop": true}}
///
/// Unknown keys are rejected at every level.
RateSweepConfig rate_sweep_config_from_json(const nlohmann::json &j);

nlohmann::json to_json(const RateSweepReport &r);
nlohmann::json to_json(const LanReport &r);
nlohmann::json to_json(const DkwReport &r);

} // namespace mixrate::cli
