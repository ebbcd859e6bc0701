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

// Training loops (forward-only DP-ULR and the DP-SGD baseline), metrics and
// parameter files.

#ifndef DPULR_TRAINER_H_
#define DPULR_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dpulr/accountant.h"
#include "dpulr/controller.h"
#include "dpulr/dataset.h"
#include "dpulr/network.h"
#include "dpulr/run_config.h"

namespace dpulr {

struct StepRecord {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  std::size_t batch_size = 0;
  double train_loss = 0.0;
  // NaN except on the last step of an epoch.
  double train_acc = std::numeric_limits<double>::quiet_NaN();
  double valid_acc = std::numeric_limits<double>::quiet_NaN();
  double epsilon = 0.0;
  double alpha_star = 0.0;
  // NaN for dp-sgd.
  double min_eig_min = 0.0;
  double sigma_max = 0.0;
  std::size_t remediated_layers = 0;
  // Not in the CSV.
  bool regime_valid = false;
  std::uint64_t rejections = 0;
  std::vector<ControllerReport> layers;
};

struct TrainResult {
  ModelParams params;
  std::vector<StepRecord> records;
  std::uint64_t steps_per_epoch = 0;
  std::uint64_t total_steps = 0;
  std::size_t train_size = 0;
  std::size_t valid_size = 0;
  std::uint64_t n_bar = 0;
  EpsilonResult final_epsilon;
  double final_train_acc = 0.0;
  double final_valid_acc = 0.0;
  std::vector<std::string> warnings;
};

// ⌈1/q⌉ under Poisson sampling; ⌊N/batch⌋ under permutation batching.
std::uint64_t StepsPerEpoch(const RunConfig& config, std::size_t train_size);

// lr·decay^⌊epoch/interval⌋.
double LearningRateAt(const OptimizerSpec& spec, std::uint64_t epoch);

// Batch size used by permutation mode: max(n_b, round(q·N)).
std::size_t PermutationBatchSize(const RunConfig& config,
                                 std::size_t train_size);

class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, const ModelParams& shape);
  // θ ← θ − update(grad) with learning rate lr; grads per layer, flattened.
  void Apply(ModelParams& params, const std::vector<Vector>& grads, double lr);

 private:
  OptimizerSpec spec_;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
  std::uint64_t t_ = 0;
};

DataSplit LoadRunData(const DataSpec& spec);

double Accuracy(const ModelParams& params, const Dataset& data);

TrainResult Train(const RunConfig& config, const Dataset& train,
                  const Dataset& valid);

inline constexpr char kMetricsHeader[] =
    "step,epoch,batch_size,train_loss,train_acc,valid_acc,epsilon,alpha_star,"
    "min_eig_min,sigma_max,remediated_layers";

// NaN fields are written empty. Doubles use the shortest round-trip form.
void WriteMetricsCsv(const std::vector<StepRecord>& records,
                     const std::string& path);
std::vector<StepRecord> ReadMetricsCsv(const std::string& path);

// "DPULRPRM", u32 version, u32 layer count, per layer (u32 in, u32 out,
// u32 activation), then per layer the weights row-major and the bias as
// little-endian float64.
void WriteParams(const ModelParams& params, const std::string& path);
ModelParams ReadParams(const std::string& path);

void WriteSummaryJson(const TrainResult& result, const RunConfig& config,
                      const std::string& path);

}  // namespace dpulr

#endif  // DPULR_TRAINER_H_
