#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "savi/alloc.hpp"
#include "savi/quadratic_model.hpp"

namespace savi {

struct ExperimentConfig {
  // [model]
  std::string kind = "codec";  // codec | quadratic
  std::uint64_t seed = 7;
  int T = 2;
  int d = 2;
  double lambda0 = 1.0;
  double precision = 0.25;
  std::vector<double> evidence;  // empty: drawn from the seed

  // [dag], quadratic only
  int nodes = 0;
  std::string edges;
  std::vector<int> dims;
  double coupling = 1.0;
  double favi_scale = 0.5;

  // [optim]
  OptimConfig optim;
  Mask optimize = Mask::Joint;

  // [run]
  std::vector<Method> methods;
  std::string out = ".";
  std::string name = "run";
};

/// Strict INI parsing: unknown sections or keys are errors naming the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& c);

/// Builds the model the config describes and applies the optimize mask.
std::unique_ptr<Model> build_model(const ExperimentConfig& c);
OptimConfig effective_optim(const ExperimentConfig& c);

}  // namespace savi
