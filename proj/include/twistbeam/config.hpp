#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistbeam/decomposition.hpp"
#include "twistbeam/envelope.hpp"
#include "twistbeam/fields.hpp"
#include "twistbeam/oracle.hpp"
#include "twistbeam/propagation.hpp"

namespace twistbeam::config {

using json = nlohmann::json;

enum class StateKind { pure, half_blocked };

struct BeamSpec {
  StateKind state = StateKind::pure;
  int n_a = 0;
  int l_a = 1;
  double b0 = 1.0;
  double b0_prime = 0.0;
  int charge_sign = 1;
  double omega0 = 1.0;
};

struct ZSchedule {
  double start = 0.0;
  double end = 30.0;
  int samples = 301;
  std::vector<double> snapshots;  // propagate and verify; defaults to {end}

  std::vector<double> grid() const;
};

struct CartesianSpec {
  bool enabled = true;
  int points = 201;          // per axis
  double half_width = 0.0;   // 0: the synthesis radial extent at each z
};

struct VerifySpec {
  oracle::OracleConfig oracle;
  std::optional<double> tolerance;  // default: 1e-4 for pure states, deficit bound for half-blocked
};

struct RunConfig {
  json raw;
  fields::FieldProfile profile;
  fields::NormalizationUnits units;
  BeamSpec beam;
  Truncation truncation;
  ZSchedule z;
  propagation::GridSpec grid;
  CartesianSpec cartesian;
  envelope::StepControl envelope;
  decomposition::QuadSpec quadrature;
  VerifySpec verify;
  std::string output_directory = "out";

  fields::NormalizedField normalized() const;
  decomposition::InitialState initial_state() const;
  BasisConvention convention() const { return {beam.omega0}; }
  json tolerances() const;
};

/// Checks the document against the shipped schema rules and builds the run. Throws
/// ConfigError naming the offending JSON path.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace twistbeam::config
