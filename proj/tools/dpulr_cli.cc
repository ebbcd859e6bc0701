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

// dpulr command-line front end. Talks to the library only through dpulr.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "dpulr/dpulr.h"
#include "json.hpp"

namespace {

using nlohmann::json;

int Report(dpulr_status status, const char* what) {
  std::fprintf(stderr, "dpulr %s: %s: %s\n", what, dpulr_status_string(status),
               dpulr_last_error());
  return static_cast<int>(status);
}

json Number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

int RunTrain(const std::string& config, const std::string& out_dir) {
  dpulr_run* run = nullptr;
  dpulr_status st = dpulr_run_create_from_file(config.c_str(), &run);
  if (st != DPULR_OK) return Report(st, "train");
  st = dpulr_run_execute(run);
  for (size_t i = 0; i < dpulr_run_num_warnings(run); ++i) {
    std::fprintf(stderr, "warning: %s\n", dpulr_run_warning(run, i));
  }
  if (st == DPULR_OK) st = dpulr_run_write_outputs(run, out_dir.c_str());
  dpulr_run_summary s{};
  if (st == DPULR_OK) st = dpulr_run_get_summary(run, &s);
  if (st != DPULR_OK) {
    dpulr_run_destroy(run);
    return Report(st, "train");
  }
  json j = {{"steps", s.steps},
            {"steps_per_epoch", s.steps_per_epoch},
            {"train_size", s.train_size},
            {"valid_size", s.valid_size},
            {"final_train_acc", Number(s.final_train_acc)},
            {"final_valid_acc", Number(s.final_valid_acc)},
            {"epsilon", Number(s.epsilon)},
            {"alpha", s.alpha},
            {"regime_valid", s.regime_valid != 0},
            {"out", out_dir}};
  std::cout << j.dump() << '\n';
  dpulr_run_destroy(run);
  return 0;
}

int RunEpsilon(const dpulr_srgm_params& p, std::uint64_t steps, double delta,
               bool strict, bool impairment_free) {
  dpulr_epsilon_result r{};
  const dpulr_status st =
      dpulr_best_epsilon(&p, steps, delta, strict ? 1 : 0,
                         impairment_free ? 1 : 0, &r);
  if (st != DPULR_OK) return Report(st, "epsilon");
  json j = {{"epsilon", r.epsilon},
            {"alpha", r.alpha},
            {"gamma", r.gamma},
            {"impairment_term", r.impairment_term},
            {"main_term", r.main_term},
            {"regime_valid", r.regime_valid != 0}};
  std::cout << j.dump() << '\n';
  return 0;
}

struct RatioGrid {
  double q = 0.01;
  double sigma0 = 4.0;
  double alpha = 1.1;
  double nbar_min = 1e3;
  double nbar_max = 1e5;
  int nbar_points = 21;
  double nb_lo = 0.5;
  double nb_hi = 0.95;
  int nb_points = 10;
  std::string out;
};

int RunBoundRatio(const RatioGrid& g) {
  std::ofstream file;
  if (!g.out.empty()) {
    file.open(g.out, std::ios::binary | std::ios::trunc);
    if (!file) {
      std::fprintf(stderr, "dpulr bound-ratio: cannot write '%s'\n", g.out.c_str());
      return DPULR_ERR_IO;
    }
  }
  std::ostream& os = g.out.empty() ? std::cout : file;
  os << "nbar,nb,ratio\n";
  char buf[128];
  for (int i = 0; i < g.nbar_points; ++i) {
    const double t = g.nbar_points > 1 ? double(i) / (g.nbar_points - 1) : 0.0;
    const auto nbar = static_cast<std::uint64_t>(
        std::llround(g.nbar_min * std::pow(g.nbar_max / g.nbar_min, t)));
    std::set<std::uint64_t> seen;
    for (int j = 0; j < g.nb_points; ++j) {
      const double f = g.nb_points > 1
                           ? g.nb_lo + (g.nb_hi - g.nb_lo) * j / (g.nb_points - 1)
                           : g.nb_lo;
      const auto nb = static_cast<std::uint64_t>(
          std::llround(f * g.q * static_cast<double>(nbar)));
      if (nb < 1 || !seen.insert(nb).second) continue;
      dpulr_srgm_params p{g.q, g.sigma0, nb, nbar};
      double ratio = 0.0;
      const dpulr_status st = dpulr_impairment_ratio(&p, g.alpha, &ratio);
      if (st != DPULR_OK) return Report(st, "bound-ratio");
      std::snprintf(buf, sizeof(buf), "%llu,%llu,%.17g\n",
                    static_cast<unsigned long long>(nbar),
                    static_cast<unsigned long long>(nb), ratio);
      os << buf;
    }
  }
  return 0;
}

int RunVerify(std::uint64_t seed, double sigma, std::size_t samples) {
  dpulr_verify_report* report = nullptr;
  const dpulr_status st = dpulr_verify_gradient(seed, sigma, samples, &report);
  if (st != DPULR_OK) return Report(st, "verify-gradient");
  json layers = json::array();
  for (size_t i = 0; i < dpulr_verify_num_layers(report); ++i) {
    dpulr_verify_layer v{};
    dpulr_verify_get_layer(report, i, &v);
    layers.push_back({{"layer", v.layer},
                      {"num_params", v.num_params},
                      {"clean_loss", v.clean_loss},
                      {"grad_norm", v.grad_norm},
                      {"max_abs_z", v.max_abs_z},
                      {"max_abs_dev", v.max_abs_dev},
                      {"rel_dev", v.rel_dev},
                      {"cov_rel_error", v.cov_rel_error}});
  }
  dpulr_verify_destroy(report);
  json j = {{"seed", seed}, {"sigma", sigma}, {"samples", samples},
            {"layers", layers}};
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DP-ULR: forward-only differentially private training"};
  app.set_version_flag("--version", std::string(dpulr_version()));
  app.require_subcommand(1);

  std::string config, out_dir;
  auto* train = app.add_subcommand("train", "Train from a JSON run config");
  train->add_option("--config", config, "Run config (JSON)")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  dpulr_srgm_params p{0.01, 4.0, 1, 10000};
  std::uint64_t steps = 1;
  double delta = 1e-5;
  bool strict = false;
  bool impairment_free = false;
  auto* eps = app.add_subcommand("epsilon", "Best (epsilon, delta) for T steps");
  eps->add_option("--q", p.q, "Sampling rate")->required();
  eps->add_option("--sigma0", p.sigma0, "Noise multiplier")->required();
  eps->add_option("--nb", p.n_b, "Minimum batch size")->required();
  eps->add_option("--nbar", p.n_bar, "Minimum dataset size")->required();
  eps->add_option("--steps", steps, "Number of steps T")->required();
  eps->add_option("--delta", delta, "Target delta")->required();
  eps->add_flag("--strict", strict, "Only alphas inside the proven regime");
  eps->add_flag("--impairment-free", impairment_free,
                "Drop the rejection term (plain subsampled Gaussian)");

  RatioGrid grid;
  auto* ratio = app.add_subcommand(
      "bound-ratio", "CSV of impairment/main term ratio over (nbar, nb)");
  ratio->add_option("--q", grid.q, "Sampling rate")->capture_default_str();
  ratio->add_option("--sigma0", grid.sigma0)->capture_default_str();
  ratio->add_option("--alpha", grid.alpha)->capture_default_str();
  ratio->add_option("--nbar-min", grid.nbar_min)->capture_default_str();
  ratio->add_option("--nbar-max", grid.nbar_max)->capture_default_str();
  ratio->add_option("--nbar-points", grid.nbar_points, "Log-spaced")
      ->capture_default_str();
  ratio->add_option("--nb-lo", grid.nb_lo, "Lowest nb as a fraction of q*nbar")
      ->capture_default_str();
  ratio->add_option("--nb-hi", grid.nb_hi)->capture_default_str();
  ratio->add_option("--nb-points", grid.nb_points)->capture_default_str();
  ratio->add_option("--out", grid.out, "Write to file instead of stdout");

  std::uint64_t seed = 1;
  double sigma = 1e-2;
  std::size_t samples = 100000;
  auto* verify = app.add_subcommand(
      "verify-gradient", "Monte-Carlo check of the gradient proxy");
  verify->add_option("--seed", seed)->capture_default_str();
  verify->add_option("--sigma", sigma)->capture_default_str();
  verify->add_option("--samples", samples)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*train) return RunTrain(config, out_dir);
  if (*eps) return RunEpsilon(p, steps, delta, strict, impairment_free);
  if (*ratio) return RunBoundRatio(grid);
  if (*verify) return RunVerify(seed, sigma, samples);
  return 1;
}
