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

#include "dpulr/run_config.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <type_traits>

#include "dpulr/error.h"
#include "json.hpp"

namespace dpulr {
namespace {

using nlohmann::json;

void RejectUnknown(const json& obj, const char* where,
                   std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    Fail(ErrorCode::kConfig, std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      Fail(ErrorCode::kConfig,
           "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void Read(const json& obj, const char* key, const char* where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("");
    }
    out = it->get<T>();
  } catch (const std::exception&) {
    Fail(ErrorCode::kConfig, std::string(where) + "." + key +
                                 " has the wrong type: " + it->dump());
  }
}

std::string ResolvePath(const std::string& p, const std::string& base) {
  if (p.empty() || base.empty()) return p;
  std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

std::string_view AlgorithmName(Algorithm a) {
  return a == Algorithm::kDpUlr ? "dp-ulr" : "dp-sgd";
}
std::string_view SamplingName(SamplingMode s) {
  return s == SamplingMode::kPoisson ? "poisson" : "permutation";
}
std::string_view OptimizerName(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

RunConfig ParseRunConfig(const std::string& json_text,
                         const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    Fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  RejectUnknown(root, "config",
                {"algorithm", "layers", "privacy", "optimizer", "epochs",
                 "max_steps", "seed", "sampling", "inject", "data"});
  RunConfig c;

  std::string algorithm = "dp-ulr";
  Read(root, "algorithm", "config", algorithm);
  if (algorithm == "dp-ulr") {
    c.algorithm = Algorithm::kDpUlr;
  } else if (algorithm == "dp-sgd") {
    c.algorithm = Algorithm::kDpSgd;
    c.optimizer.kind = OptimizerKind::kSgd;
    c.optimizer.learning_rate = 0.1;
  } else {
    Fail(ErrorCode::kConfig, "unknown algorithm '" + algorithm + "'");
  }

  if (!root.contains("layers") || !root["layers"].is_array()) {
    Fail(ErrorCode::kConfig, "config.layers must be an array");
  }
  for (const json& l : root["layers"]) {
    RejectUnknown(l, "layers[]", {"in_dim", "out_dim", "activation"});
    LayerSpec spec;
    Read(l, "in_dim", "layers[]", spec.in_dim);
    Read(l, "out_dim", "layers[]", spec.out_dim);
    std::string act = "identity";
    Read(l, "activation", "layers[]", act);
    spec.activation = ParseActivation(act);
    c.layers.push_back(spec);
  }

  if (root.contains("privacy")) {
    const json& p = root["privacy"];
    RejectUnknown(p, "privacy",
                  {"q", "sigma0", "n_b", "K", "C", "delta", "n_bar",
                   "working_sigma", "sigma_cap", "strict"});
    Read(p, "q", "privacy", c.privacy.q);
    Read(p, "sigma0", "privacy", c.privacy.sigma0);
    Read(p, "n_b", "privacy", c.privacy.n_b);
    Read(p, "K", "privacy", c.privacy.repeats);
    Read(p, "C", "privacy", c.privacy.clip);
    Read(p, "delta", "privacy", c.privacy.delta);
    Read(p, "n_bar", "privacy", c.privacy.n_bar);
    Read(p, "strict", "privacy", c.privacy.strict);
    std::string ws = std::string(WorkingSigmaName(c.privacy.working_sigma));
    Read(p, "working_sigma", "privacy", ws);
    c.privacy.working_sigma = ParseWorkingSigma(ws);
    if (p.contains("sigma_cap") && !p["sigma_cap"].is_null()) {
      Read(p, "sigma_cap", "privacy", c.privacy.sigma_cap);
    }
  }

  if (root.contains("optimizer")) {
    const json& o = root["optimizer"];
    RejectUnknown(o, "optimizer",
                  {"kind", "learning_rate", "decay_factor",
                   "decay_interval_epochs", "beta1", "beta2", "epsilon"});
    std::string kind(OptimizerName(c.optimizer.kind));
    Read(o, "kind", "optimizer", kind);
    if (kind == "adam") {
      c.optimizer.kind = OptimizerKind::kAdam;
    } else if (kind == "sgd") {
      c.optimizer.kind = OptimizerKind::kSgd;
    } else {
      Fail(ErrorCode::kConfig, "unknown optimizer '" + kind + "'");
    }
    Read(o, "learning_rate", "optimizer", c.optimizer.learning_rate);
    Read(o, "decay_factor", "optimizer", c.optimizer.decay_factor);
    Read(o, "decay_interval_epochs", "optimizer",
         c.optimizer.decay_interval_epochs);
    Read(o, "beta1", "optimizer", c.optimizer.beta1);
    Read(o, "beta2", "optimizer", c.optimizer.beta2);
    Read(o, "epsilon", "optimizer", c.optimizer.epsilon);
  }

  Read(root, "epochs", "config", c.epochs);
  Read(root, "max_steps", "config", c.max_steps);
  Read(root, "seed", "config", c.seed);
  std::string sampling = "poisson";
  Read(root, "sampling", "config", sampling);
  if (sampling == "poisson") {
    c.sampling = SamplingMode::kPoisson;
  } else if (sampling == "permutation") {
    c.sampling = SamplingMode::kPermutation;
  } else {
    Fail(ErrorCode::kConfig, "unknown sampling mode '" + sampling + "'");
  }
  std::string inject = "activations";
  Read(root, "inject", "config", inject);
  c.inject = ParseInjectMode(inject);

  if (root.contains("data")) {
    const json& d = root["data"];
    RejectUnknown(d, "data",
                  {"source", "images", "labels", "valid_images",
                   "valid_labels", "limit", "n", "dim", "classes",
                   "separation", "seed", "valid_fraction", "split_seed"});
    DataSpec& ds = c.data;
    Read(d, "source", "data", ds.source);
    Read(d, "images", "data", ds.images);
    Read(d, "labels", "data", ds.labels);
    Read(d, "valid_images", "data", ds.valid_images);
    Read(d, "valid_labels", "data", ds.valid_labels);
    Read(d, "limit", "data", ds.limit);
    Read(d, "n", "data", ds.n);
    Read(d, "dim", "data", ds.dim);
    Read(d, "classes", "data", ds.classes);
    Read(d, "separation", "data", ds.separation);
    Read(d, "seed", "data", ds.synth_seed);
    Read(d, "valid_fraction", "data", ds.valid_fraction);
    Read(d, "split_seed", "data", ds.split_seed);
    ds.images = ResolvePath(ds.images, base_dir);
    ds.labels = ResolvePath(ds.labels, base_dir);
    ds.valid_images = ResolvePath(ds.valid_images, base_dir);
    ds.valid_labels = ResolvePath(ds.valid_labels, base_dir);
  }
  ValidateRunConfig(c);
  return c;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  return ParseRunConfig(ss.str(), base.empty() ? "." : base);
}

std::string RunConfigToJson(const RunConfig& c) {
  json root;
  root["algorithm"] = AlgorithmName(c.algorithm);
  root["layers"] = json::array();
  for (const LayerSpec& l : c.layers) {
    root["layers"].push_back({{"in_dim", l.in_dim},
                              {"out_dim", l.out_dim},
                              {"activation", ActivationName(l.activation)}});
  }
  root["privacy"] = {{"q", c.privacy.q},
                     {"sigma0", c.privacy.sigma0},
                     {"n_b", c.privacy.n_b},
                     {"K", c.privacy.repeats},
                     {"C", c.privacy.clip},
                     {"delta", c.privacy.delta},
                     {"n_bar", c.privacy.n_bar},
                     {"working_sigma", WorkingSigmaName(c.privacy.working_sigma)},
                     {"strict", c.privacy.strict}};
  if (std::isfinite(c.privacy.sigma_cap)) {
    root["privacy"]["sigma_cap"] = c.privacy.sigma_cap;
  }
  root["optimizer"] = {{"kind", OptimizerName(c.optimizer.kind)},
                       {"learning_rate", c.optimizer.learning_rate},
                       {"decay_factor", c.optimizer.decay_factor},
                       {"decay_interval_epochs", c.optimizer.decay_interval_epochs},
                       {"beta1", c.optimizer.beta1},
                       {"beta2", c.optimizer.beta2},
                       {"epsilon", c.optimizer.epsilon}};
  root["epochs"] = c.epochs;
  root["max_steps"] = c.max_steps;
  root["seed"] = c.seed;
  root["sampling"] = SamplingName(c.sampling);
  root["inject"] = InjectModeName(c.inject);
  const DataSpec& d = c.data;
  json data = {{"source", d.source},
               {"valid_fraction", d.valid_fraction},
               {"split_seed", d.split_seed}};
  if (d.source == "mnist") {
    data["images"] = d.images;
    data["labels"] = d.labels;
    if (!d.valid_images.empty()) {
      data["valid_images"] = d.valid_images;
      data["valid_labels"] = d.valid_labels;
    }
    data["limit"] = d.limit;
  } else {
    data["n"] = d.n;
    data["dim"] = d.dim;
    data["classes"] = d.classes;
    data["separation"] = d.separation;
    data["seed"] = d.synth_seed;
  }
  root["data"] = data;
  return root.dump(2);
}

std::vector<std::string> ValidateRunConfig(const RunConfig& c) {
  std::vector<std::string> warnings;
  ValidateArchitecture(c.layers);
  const PrivacySpec& p = c.privacy;
  if (!(p.q > 0.0 && p.q <= 1.0)) Fail(ErrorCode::kConfig, "privacy.q must lie in (0, 1]");
  if (!(p.sigma0 > 0.0)) Fail(ErrorCode::kConfig, "privacy.sigma0 must be positive");
  if (p.n_b < 1) Fail(ErrorCode::kConfig, "privacy.n_b must be >= 1");
  if (p.repeats < 1) Fail(ErrorCode::kConfig, "privacy.K must be >= 1");
  if (!(p.clip > 0.0)) Fail(ErrorCode::kConfig, "privacy.C must be positive");
  if (!(p.sigma_cap > 0.0)) {
    Fail(ErrorCode::kConfig, "privacy.sigma_cap must be positive");
  }
  if (!(p.delta > 0.0 && p.delta < 1.0)) {
    Fail(ErrorCode::kConfig, "privacy.delta must lie in (0, 1)");
  }
  const OptimizerSpec& o = c.optimizer;
  if (!(o.learning_rate >= 0.0)) Fail(ErrorCode::kConfig, "learning_rate must be >= 0");
  if (!(o.decay_factor > 0.0)) Fail(ErrorCode::kConfig, "decay_factor must be positive");
  if (o.decay_interval_epochs < 1) {
    Fail(ErrorCode::kConfig, "decay_interval_epochs must be >= 1");
  }
  if (c.epochs < 1 && c.max_steps == 0) {
    Fail(ErrorCode::kConfig, "epochs must be >= 1");
  }
  const DataSpec& d = c.data;
  if (d.source == "mnist") {
    if (d.images.empty() || d.labels.empty()) {
      Fail(ErrorCode::kConfig, "data.images and data.labels are required for mnist");
    }
    if (d.valid_images.empty() != d.valid_labels.empty()) {
      Fail(ErrorCode::kConfig, "data.valid_images and data.valid_labels go together");
    }
  } else if (d.source == "synth") {
    if (d.n < 1 || d.dim < 1 || d.classes < 1) {
      Fail(ErrorCode::kConfig, "synth data needs n, dim, classes >= 1");
    }
  } else {
    Fail(ErrorCode::kConfig, "unknown data.source '" + d.source + "'");
  }
  if (c.sampling == SamplingMode::kPermutation) {
    warnings.push_back(
        "sampling=permutation: fixed-size shuffled batches are not covered by "
        "the privacy analysis; reported epsilon assumes Poisson sampling with "
        "rejection");
  }
  if (c.algorithm == Algorithm::kDpSgd && c.inject == InjectMode::kParams) {
    warnings.push_back("inject is ignored by dp-sgd");
  }
  return warnings;
}

}  // namespace dpulr
