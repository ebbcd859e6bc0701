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

#include "dpulr/dpulr.h"

#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "dpulr/accountant.h"
#include "dpulr/error.h"
#include "dpulr/run_config.h"
#include "dpulr/trainer.h"
#include "dpulr/verify.h"

struct dpulr_run {
  dpulr::RunConfig config;
  std::vector<std::string> warnings;
  std::optional<dpulr::TrainResult> result;
};

struct dpulr_verify_report {
  dpulr::VerificationReport report;
};

namespace {

thread_local std::string last_error;

dpulr_status SetError(dpulr_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, mapping exceptions to status codes.
template <typename Fn>
dpulr_status Guard(Fn&& fn) {
  try {
    fn();
    return DPULR_OK;
  } catch (const dpulr::Error& e) {
    return SetError(static_cast<dpulr_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(DPULR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(DPULR_ERR_INTERNAL, e.what());
  } catch (...) {
    return SetError(DPULR_ERR_INTERNAL, "unknown error");
  }
}

dpulr::SrgmParams ToParams(const dpulr_srgm_params& p) {
  dpulr::SrgmParams out;
  out.q = p.q;
  out.sigma0 = p.sigma0;
  out.n_b = p.n_b;
  out.n_bar = p.n_bar;
  return out;
}

}  // namespace

extern "C" {

const char* dpulr_version(void) { return "1.0.0"; }

const char* dpulr_status_string(dpulr_status status) {
  switch (status) {
    case DPULR_OK:
      return "ok";
    case DPULR_ERR_DIMENSION:
      return "dimension error";
    case DPULR_ERR_NUMERIC:
      return "numeric error";
    case DPULR_ERR_DOMAIN:
      return "domain error";
    case DPULR_ERR_CONFIG:
      return "configuration error";
    case DPULR_ERR_FORMAT:
      return "format error";
    case DPULR_ERR_VALIDITY:
      return "validity error";
    case DPULR_ERR_IO:
      return "i/o error";
    case DPULR_ERR_INDEX:
      return "index error";
    case DPULR_ERR_NULL:
      return "null argument";
    case DPULR_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* dpulr_last_error(void) { return last_error.c_str(); }

dpulr_status dpulr_best_epsilon(const dpulr_srgm_params* params,
                                uint64_t steps, double delta, int strict,
                                int impairment_free,
                                dpulr_epsilon_result* out) {
  if (params == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_best_epsilon: null argument");
  }
  return Guard([&] {
    const dpulr::EpsilonResult r = dpulr::BestEpsilon(
        ToParams(*params), steps, delta, strict != 0,
        impairment_free ? dpulr::Mechanism::kSgm : dpulr::Mechanism::kSrgm);
    out->epsilon = r.epsilon;
    out->alpha = r.alpha;
    out->gamma = r.gamma;
    out->impairment_term = r.impairment_term;
    out->main_term = r.main_term;
    out->regime_valid = r.regime_valid ? 1 : 0;
  });
}

dpulr_status dpulr_srgm_step_rdp(const dpulr_srgm_params* params,
                                 double alpha, int strict,
                                 double* impairment_term, double* main_term) {
  if (params == nullptr || impairment_term == nullptr || main_term == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_srgm_step_rdp: null argument");
  }
  return Guard([&] {
    const dpulr::SrgmParams p = ToParams(*params);
    dpulr::SrgmStepRdp(alpha, p, strict != 0);
    const dpulr::StepRdp t = dpulr::SrgmStepTerms(alpha, p);
    *impairment_term = t.impairment;
    *main_term = t.main;
  });
}

dpulr_status dpulr_impairment_ratio(const dpulr_srgm_params* params,
                                    double alpha, double* out) {
  if (params == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_impairment_ratio: null argument");
  }
  return Guard([&] { *out = dpulr::ImpairmentRatio(ToParams(*params), alpha); });
}

dpulr_status dpulr_alpha_valid(const dpulr_srgm_params* params, double alpha,
                               int* out) {
  if (params == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_alpha_valid: null argument");
  }
  return Guard([&] { *out = dpulr::AlphaValid(alpha, ToParams(*params)) ? 1 : 0; });
}

dpulr_status dpulr_run_create_from_file(const char* config_path,
                                        dpulr_run** out) {
  if (config_path == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_run_create_from_file: null argument");
  }
  *out = nullptr;
  return Guard([&] {
    auto run = std::make_unique<dpulr_run>();
    run->config = dpulr::LoadRunConfig(config_path);
    run->warnings = dpulr::ValidateRunConfig(run->config);
    *out = run.release();
  });
}

dpulr_status dpulr_run_create_from_json(const char* config_json,
                                        const char* base_dir,
                                        dpulr_run** out) {
  if (config_json == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_run_create_from_json: null argument");
  }
  *out = nullptr;
  return Guard([&] {
    auto run = std::make_unique<dpulr_run>();
    run->config =
        dpulr::ParseRunConfig(config_json, base_dir ? base_dir : "");
    run->warnings = dpulr::ValidateRunConfig(run->config);
    *out = run.release();
  });
}

dpulr_status dpulr_run_execute(dpulr_run* run) {
  if (run == nullptr) return SetError(DPULR_ERR_NULL, "dpulr_run_execute: null run");
  return Guard([&] {
    const dpulr::DataSplit data = dpulr::LoadRunData(run->config.data);
    run->result = dpulr::Train(run->config, data.train, data.valid);
    run->warnings = run->result->warnings;
  });
}

dpulr_status dpulr_run_write_outputs(const dpulr_run* run, const char* out_dir) {
  if (run == nullptr || out_dir == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_run_write_outputs: null argument");
  }
  if (!run->result) {
    return SetError(DPULR_ERR_CONFIG, "dpulr_run_write_outputs: run has not executed");
  }
  return Guard([&] {
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      dpulr::Fail(dpulr::ErrorCode::kIo, "cannot create '" + dir.string() +
                                             "': " + ec.message());
    }
    dpulr::WriteMetricsCsv(run->result->records, (dir / "metrics.csv").string());
    dpulr::WriteParams(run->result->params, (dir / "params.bin").string());
    dpulr::WriteSummaryJson(*run->result, run->config,
                            (dir / "summary.json").string());
  });
}

dpulr_status dpulr_run_get_summary(const dpulr_run* run, dpulr_run_summary* out) {
  if (run == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_run_get_summary: null argument");
  }
  if (!run->result) {
    return SetError(DPULR_ERR_CONFIG, "dpulr_run_get_summary: run has not executed");
  }
  const dpulr::TrainResult& r = *run->result;
  out->steps = r.total_steps;
  out->steps_per_epoch = r.steps_per_epoch;
  out->train_size = r.train_size;
  out->valid_size = r.valid_size;
  out->final_train_acc = r.final_train_acc;
  out->final_valid_acc = r.final_valid_acc;
  out->epsilon = r.final_epsilon.epsilon;
  out->alpha = r.final_epsilon.alpha;
  out->regime_valid = r.final_epsilon.regime_valid ? 1 : 0;
  return DPULR_OK;
}

size_t dpulr_run_num_warnings(const dpulr_run* run) {
  return run == nullptr ? 0 : run->warnings.size();
}

const char* dpulr_run_warning(const dpulr_run* run, size_t index) {
  if (run == nullptr || index >= run->warnings.size()) return nullptr;
  return run->warnings[index].c_str();
}

void dpulr_run_destroy(dpulr_run* run) { delete run; }

dpulr_status dpulr_verify_gradient(uint64_t seed, double sigma, size_t samples,
                                   dpulr_verify_report** out) {
  if (out == nullptr) return SetError(DPULR_ERR_NULL, "dpulr_verify_gradient: null out");
  *out = nullptr;
  return Guard([&] {
    auto r = std::make_unique<dpulr_verify_report>();
    r->report = dpulr::VerifyGradient(seed, sigma, samples);
    *out = r.release();
  });
}

size_t dpulr_verify_num_layers(const dpulr_verify_report* report) {
  return report == nullptr ? 0 : report->report.layers.size();
}

dpulr_status dpulr_verify_get_layer(const dpulr_verify_report* report,
                                    size_t index, dpulr_verify_layer* out) {
  if (report == nullptr || out == nullptr) {
    return SetError(DPULR_ERR_NULL, "dpulr_verify_get_layer: null argument");
  }
  if (index >= report->report.layers.size()) {
    return SetError(DPULR_ERR_INDEX, "dpulr_verify_get_layer: index out of range");
  }
  const dpulr::LayerVerification& v = report->report.layers[index];
  out->layer = v.layer;
  out->num_params = v.num_params;
  out->clean_loss = v.clean_loss;
  out->grad_norm = v.grad_norm;
  out->max_abs_z = v.max_abs_z;
  out->max_abs_dev = v.max_abs_dev;
  out->rel_dev = v.rel_dev;
  out->cov_rel_error = v.cov_rel_error;
  return DPULR_OK;
}

void dpulr_verify_destroy(dpulr_verify_report* report) { delete report; }

}  // extern "C"
