// Copyright 2026 The DP-ULR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration and its JSON form. Unknown keys are rejected at every
// level.

#ifndef DPULR_RUN_CONFIG_H_
#define DPULR_RUN_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dpulr/controller.h"
#include "dpulr/estimator.h"
#include "dpulr/network.h"

namespace dpulr {

enum class Algorithm { kDpUlr, kDpSgd };
enum class SamplingMode { kPoisson, kPermutation };
enum class OptimizerKind { kAdam, kSgd };

struct PrivacySpec {
  double q = 0.01;
  double sigma0 = 1.0;
  std::uint64_t n_b = 1;
  std::size_t repeats = 100;  // K
  double clip = 1.0;          // C
  double delta = 1e-5;
  std::uint64_t n_bar = 0;    // 0: training-set size
  WorkingSigma working_sigma = WorkingSigma::kLargestEigenvalue;
  // Infinity (absent from the JSON) disables the cap.
  double sigma_cap = std::numeric_limits<double>::infinity();
  bool strict = false;
};

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.01;
  double decay_factor = 0.85;
  std::size_t decay_interval_epochs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct DataSpec {
  std::string source = "synth";  // "mnist" or "synth"
  // mnist
  std::string images;
  std::string labels;
  std::string valid_images;  // optional dedicated validation files
  std::string valid_labels;
  std::size_t limit = 0;     // 0: all rows
  // synth
  std::size_t n = 1000;
  std::size_t dim = 2;
  std::size_t classes = 2;
  double separation = 10.0;
  std::uint64_t synth_seed = 1;
  // held-out split when no validation files are given
  double valid_fraction = 0.2;
  std::uint64_t split_seed = 20240601;
};

struct RunConfig {
  Algorithm algorithm = Algorithm::kDpUlr;
  std::vector<LayerSpec> layers;
  PrivacySpec privacy;
  OptimizerSpec optimizer;
  std::size_t epochs = 1;
  std::uint64_t max_steps = 0;  // 0: epochs·steps_per_epoch
  std::uint64_t seed = 0;
  SamplingMode sampling = SamplingMode::kPoisson;
  InjectMode inject = InjectMode::kActivations;
  DataSpec data;
};

// Relative data paths are resolved against base_dir when it is nonempty.
RunConfig ParseRunConfig(const std::string& json_text,
                         const std::string& base_dir = "");
RunConfig LoadRunConfig(const std::string& path);
std::string RunConfigToJson(const RunConfig& config);

// Hard errors throw; soft problems come back as warnings.
std::vector<std::string> ValidateRunConfig(const RunConfig& config);

std::string_view AlgorithmName(Algorithm a);
std::string_view SamplingName(SamplingMode s);
std::string_view OptimizerName(OptimizerKind k);

}  // namespace dpulr

#endif  // DPULR_RUN_CONFIG_H_
