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

#include "dpulr/trainer.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include "dpulr/error.h"
#include "dpulr/estimator.h"
#include "dpulr/parallel.h"
#include "dpulr/sampler.h"
#include "json.hpp"

namespace dpulr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Labels for RngStream::Child off the run seed.
enum RngTag : std::uint64_t {
  kTagInit = 1,
  kTagBatch = 2,
  kTagEstimate = 3,
  kTagRemediation = 4,
  kTagSgdNoise = 5,
  kTagPermutation = 6,
};

std::uint64_t TotalSteps(const RunConfig& c, std::uint64_t spe) {
  return c.max_steps > 0 ? c.max_steps : c.epochs * spe;
}

SrgmParams AccountingParams(const RunConfig& c, std::uint64_t n_bar) {
  SrgmParams p;
  p.q = c.privacy.q;
  p.sigma0 = c.privacy.sigma0;
  p.n_b = c.algorithm == Algorithm::kDpSgd ? 1 : c.privacy.n_b;
  p.n_bar = n_bar;
  return p;
}

std::vector<std::string> RegimeWarnings(const SrgmParams& p) {
  std::vector<std::string> w;
  if (p.q > 0.2) w.push_back("q > 0.2: outside the proven regime");
  if (p.sigma0 < 4.0) w.push_back("sigma0 < 4: outside the proven regime");
  if (static_cast<double>(p.n_b) > p.q * static_cast<double>(p.n_bar)) {
    w.push_back("n_b > q*n_bar: outside the proven regime");
  }
  return w;
}

ModelParams InitParams(const RunConfig& c, const RngStream& root) {
  RngStream rng = root.Child(kTagInit);
  return ModelParams::RandomInit(c.layers, rng);
}

struct Evaluation {
  double train_acc = kNaN;
  double valid_acc = kNaN;
};

class RunState {
 public:
  RunState(const RunConfig& config, const Dataset& train, const Dataset& valid)
      : config_(config),
        train_(train),
        valid_(valid),
        root_(config.seed),
        params_(InitParams(config, root_)),
        optimizer_(config.optimizer, params_) {
    if (train.dim() != params_.input_dim()) {
      Fail(ErrorCode::kConfig, "data has " + std::to_string(train.dim()) +
                                   " features, first layer expects " +
                                   std::to_string(params_.input_dim()));
    }
    if (train.num_classes() > params_.output_dim()) {
      Fail(ErrorCode::kConfig, "data has " +
                                   std::to_string(train.num_classes()) +
                                   " classes, last layer outputs " +
                                   std::to_string(params_.output_dim()));
    }
    if (train.size() == 0) Fail(ErrorCode::kConfig, "empty training set");
    result_.warnings = ValidateRunConfig(config);
    result_.steps_per_epoch = StepsPerEpoch(config, train.size());
    result_.total_steps = TotalSteps(config, result_.steps_per_epoch);
    result_.train_size = train.size();
    result_.valid_size = valid.size();
    result_.n_bar = config.privacy.n_bar > 0 ? config.privacy.n_bar : train.size();
    accounting_ = AccountingParams(config, result_.n_bar);
    ValidateSrgmParams(accounting_);
    for (std::string& w : RegimeWarnings(accounting_)) {
      result_.warnings.push_back(std::move(w));
    }
    if (config.sampling == SamplingMode::kPermutation) {
      batcher_ = std::make_unique<PermutationBatcher>(
          train.size(), PermutationBatchSize(config, train.size()));
    }
  }

  TrainResult Run() {
    for (std::uint64_t t = 0; t < result_.total_steps; ++t) {
      StepRecord rec = config_.algorithm == Algorithm::kDpUlr ? UlrStep(t)
                                                              : SgdStep(t);
      rec.step = t;
      rec.epoch = t / result_.steps_per_epoch;
      ledger_.AddSteps(accounting_,
                       config_.algorithm == Algorithm::kDpUlr ? Mechanism::kSrgm
                                                              : Mechanism::kSgm);
      const EpsilonResult eps =
          ledger_.Epsilon(config_.privacy.delta, config_.privacy.strict);
      rec.epsilon = eps.epsilon;
      rec.alpha_star = eps.alpha;
      rec.regime_valid = eps.regime_valid;
      const bool epoch_end = (t + 1) % result_.steps_per_epoch == 0 ||
                             t + 1 == result_.total_steps;
      if (epoch_end) {
        const Evaluation e = Evaluate();
        rec.train_acc = e.train_acc;
        rec.valid_acc = e.valid_acc;
        result_.final_train_acc = e.train_acc;
        result_.final_valid_acc = e.valid_acc;
      }
      result_.final_epsilon = eps;
      result_.records.push_back(std::move(rec));
    }
    result_.params = params_;
    return std::move(result_);
  }

 private:
  BatchDraw NextBatch(std::uint64_t t) {
    if (batcher_) return batcher_->Draw(t, root_.Child(kTagPermutation));
    RngStream rng = root_.Child(kTagBatch, t);
    if (config_.algorithm == Algorithm::kDpSgd) {
      return DrawPoissonBatch(train_.size(), config_.privacy.q, rng);
    }
    return DrawBatch(train_.size(), config_.privacy.q, config_.privacy.n_b, rng);
  }

  double LearningRate(std::uint64_t t) const {
    return LearningRateAt(config_.optimizer, t / result_.steps_per_epoch);
  }

  std::vector<ForwardTrace> Traces(const BatchDraw& batch) const {
    std::vector<ForwardTrace> traces(batch.indices.size());
    ParallelFor(traces.size(), [&](std::size_t i) {
      const std::size_t d = batch.indices[i];
      traces[i] = ForwardClean(train_.input(d), train_.label(d), params_);
    });
    return traces;
  }

  static double MeanLoss(const std::vector<ForwardTrace>& traces) {
    if (traces.empty()) return kNaN;
    double s = 0.0;
    for (const ForwardTrace& tr : traces) s += tr.loss;
    return s / static_cast<double>(traces.size());
  }

  NoisePlan PlanLayer(const std::vector<ForwardTrace>& traces,
                      std::size_t l) const {
    const ControllerSettings s = Settings();
    if (config_.inject == InjectMode::kParams) {
      double sum = 0.0;
      for (const ForwardTrace& tr : traces) sum += tr.loss * tr.loss;
      return PlanIsotropic(sum, params_.spec(l).num_params(), s);
    }
    const std::size_t in = params_.spec(l).in_dim;
    Matrix a(traces.size(), in + 1);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const Vector& x = traces[i].inputs[l];
      const double l0 = traces[i].loss;
      for (std::size_t c = 0; c < in; ++c) a(i, c) = l0 * x[c];
      a(i, in) = l0;
    }
    return PlanLinearLayer(a, params_.spec(l).out_dim, s);
  }

  ControllerSettings Settings() const {
    ControllerSettings s;
    s.repeats = config_.privacy.repeats;
    s.clip = config_.privacy.clip;
    s.sigma0 = config_.privacy.sigma0;
    s.working_sigma = config_.privacy.working_sigma;
    s.sigma_cap = config_.privacy.sigma_cap;
    return s;
  }

  StepRecord UlrStep(std::uint64_t t) {
    const BatchDraw batch = NextBatch(t);
    const std::vector<ForwardTrace> traces = Traces(batch);
    StepRecord rec;
    rec.batch_size = batch.indices.size();
    rec.rejections = batch.rejections;
    rec.train_loss = MeanLoss(traces);
    rec.min_eig_min = std::numeric_limits<double>::infinity();
    rec.sigma_max = 0.0;
    const double divisor = batcher_ ? static_cast<double>(rec.batch_size)
                                    : static_cast<double>(config_.privacy.n_b);
    std::vector<Vector> grads(params_.num_layers());
    for (std::size_t l = 0; l < params_.num_layers(); ++l) {
      const NoisePlan plan = PlanLayer(traces, l);
      const double sigma = plan.report.sigma;
      std::vector<Vector> per_example(traces.size());
      ParallelFor(traces.size(), [&](std::size_t i) {
        const RngStream rng =
            root_.Child(kTagEstimate, t).Child(l, batch.indices[i]);
        per_example[i] =
            EstimateExampleGradient(traces[i], params_, l, sigma,
                                    config_.privacy.repeats,
                                    config_.privacy.clip, rng, config_.inject)
                .values;
      });
      Vector sum(params_.spec(l).num_params(), 0.0);
      for (const Vector& g : per_example) {
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
      }
      if (plan.has_noise()) {
        RngStream rng = root_.Child(kTagRemediation, t).Child(l);
        const Vector extra = DrawPlanNoise(plan, rng);
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += extra[j];
      }
      for (double& v : sum) v /= divisor;
      grads[l] = std::move(sum);
      ControllerReport report = plan.report;
      report.layer = l;
      rec.min_eig_min = std::min(rec.min_eig_min, report.min_eig);
      rec.sigma_max = std::max(rec.sigma_max, report.sigma);
      rec.remediated_layers += report.remediated;
      rec.layers.push_back(std::move(report));
    }
    optimizer_.Apply(params_, grads, LearningRate(t));
    return rec;
  }

  StepRecord SgdStep(std::uint64_t t) {
    const BatchDraw batch = NextBatch(t);
    const std::vector<ForwardTrace> traces = Traces(batch);
    StepRecord rec;
    rec.batch_size = batch.indices.size();
    rec.train_loss = MeanLoss(traces);
    rec.min_eig_min = kNaN;
    rec.sigma_max = kNaN;
    const std::size_t layers = params_.num_layers();
    const double c = config_.privacy.clip;
    std::vector<std::vector<Vector>> per_example(traces.size());
    ParallelFor(traces.size(), [&](std::size_t i) {
      std::vector<Vector> g = BackpropFromTrace(traces[i], params_);
      double norm2 = 0.0;
      for (const Vector& v : g) norm2 += Dot(v, v);
      const double norm = std::sqrt(norm2);
      if (norm > c) {
        const double s = c / norm;
        for (Vector& v : g) {
          for (double& e : v) e *= s;
        }
      }
      per_example[i] = std::move(g);
    });
    std::vector<Vector> grads(layers);
    RngStream noise_rng = root_.Child(kTagSgdNoise, t);
    const double noise_std = config_.privacy.sigma0 * c;
    const double divisor = config_.privacy.q * static_cast<double>(train_.size());
    for (std::size_t l = 0; l < layers; ++l) {
      Vector sum(params_.spec(l).num_params(), 0.0);
      for (const auto& g : per_example) {
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[l][j];
      }
      for (double& v : sum) v = (v + noise_std * noise_rng.NextGaussian()) / divisor;
      grads[l] = std::move(sum);
    }
    optimizer_.Apply(params_, grads, LearningRate(t));
    return rec;
  }

  Evaluation Evaluate() const {
    Evaluation e;
    e.train_acc = Accuracy(params_, train_);
    if (valid_.size() > 0) e.valid_acc = Accuracy(params_, valid_);
    return e;
  }

  const RunConfig& config_;
  const Dataset& train_;
  const Dataset& valid_;
  RngStream root_;
  ModelParams params_;
  Optimizer optimizer_;
  SrgmParams accounting_;
  RdpLedger ledger_;
  std::unique_ptr<PermutationBatcher> batcher_;
  TrainResult result_;
};

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double ParseDouble(const std::string& s) {
  if (s.empty()) return kNaN;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(ErrorCode::kFormat, "bad number '" + s + "' in metrics file");
  }
  return v;
}

std::uint64_t ParseUnsigned(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    Fail(ErrorCode::kFormat, "bad integer '" + s + "' in metrics file");
  }
  return v;
}

void PutU32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF64(std::ostream& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t GetLE(std::istream& in, int bytes, const std::string& path) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == EOF) {
      Fail(ErrorCode::kFormat, "'" + path + "' truncated at byte " +
                                   std::to_string(static_cast<long long>(in.tellg())));
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

constexpr char kParamsMagic[8] = {'D', 'P', 'U', 'L', 'R', 'P', 'R', 'M'};
constexpr std::uint32_t kParamsVersion = 1;

std::uint32_t ActivationCode(Activation a) {
  switch (a) {
    case Activation::kGelu:
      return 0;
    case Activation::kRelu:
      return 1;
    case Activation::kIdentity:
      return 2;
  }
  return 2;
}

}  // namespace

std::uint64_t StepsPerEpoch(const RunConfig& config, std::size_t train_size) {
  if (config.sampling == SamplingMode::kPermutation) {
    return std::max<std::uint64_t>(
        1, train_size / PermutationBatchSize(config, train_size));
  }
  return static_cast<std::uint64_t>(std::ceil(1.0 / config.privacy.q - 1e-9));
}

std::size_t PermutationBatchSize(const RunConfig& config,
                                 std::size_t train_size) {
  const auto expected = static_cast<std::size_t>(
      std::llround(config.privacy.q * static_cast<double>(train_size)));
  return std::min(train_size,
                  std::max<std::size_t>(config.privacy.n_b, expected));
}

double LearningRateAt(const OptimizerSpec& spec, std::uint64_t epoch) {
  const std::uint64_t decays = epoch / spec.decay_interval_epochs;
  double lr = spec.learning_rate;
  for (std::uint64_t i = 0; i < decays; ++i) lr *= spec.decay_factor;
  return lr;
}

Optimizer::Optimizer(const OptimizerSpec& spec, const ModelParams& shape)
    : spec_(spec) {
  if (spec.kind == OptimizerKind::kAdam) {
    for (std::size_t l = 0; l < shape.num_layers(); ++l) {
      m_.emplace_back(shape.spec(l).num_params(), 0.0);
      v_.emplace_back(shape.spec(l).num_params(), 0.0);
    }
  }
}

void Optimizer::Apply(ModelParams& params, const std::vector<Vector>& grads,
                      double lr) {
  if (grads.size() != params.num_layers()) {
    Fail(ErrorCode::kDimension, "optimizer: one gradient per layer expected");
  }
  ++t_;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    const Vector& g = grads[l];
    if (g.size() != params.spec(l).num_params()) {
      Fail(ErrorCode::kDimension, "optimizer: gradient size mismatch");
    }
    Vector delta(g.size());
    if (spec_.kind == OptimizerKind::kSgd) {
      for (std::size_t j = 0; j < g.size(); ++j) delta[j] = -lr * g[j];
    } else {
      const double b1 = spec_.beta1;
      const double b2 = spec_.beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      Vector& m = m_[l];
      Vector& v = v_[l];
      for (std::size_t j = 0; j < g.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        delta[j] = -lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + spec_.epsilon);
      }
    }
    params.AddToLayer(l, delta);
  }
}

DataSplit LoadRunData(const DataSpec& spec) {
  Dataset all;
  if (spec.source == "mnist") {
    all = LoadMnistIdx(spec.images, spec.labels);
    if (!spec.valid_images.empty()) {
      Dataset valid = LoadMnistIdx(spec.valid_images, spec.valid_labels);
      if (spec.limit > 0 && spec.limit < all.size()) {
        std::vector<std::size_t> head(spec.limit);
        for (std::size_t i = 0; i < spec.limit; ++i) head[i] = i;
        all = all.Subset(head);
      }
      return {std::move(all), std::move(valid)};
    }
  } else if (spec.source == "synth") {
    all = SynthDataset(spec.synth_seed, spec.n, spec.dim, spec.classes,
                       spec.separation);
  } else {
    Fail(ErrorCode::kConfig, "unknown data.source '" + spec.source + "'");
  }
  if (spec.limit > 0 && spec.limit < all.size()) {
    std::vector<std::size_t> head(spec.limit);
    for (std::size_t i = 0; i < spec.limit; ++i) head[i] = i;
    all = all.Subset(head);
  }
  return SplitDataset(all, spec.valid_fraction, spec.split_seed);
}

double Accuracy(const ModelParams& params, const Dataset& data) {
  if (data.size() == 0) return kNaN;
  std::vector<unsigned char> hit(data.size());
  ParallelFor(data.size(), [&](std::size_t i) {
    hit[i] = Predict(data.input(i), params) == data.label(i);
  });
  std::size_t correct = 0;
  for (unsigned char h : hit) correct += h;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult Train(const RunConfig& config, const Dataset& train,
                  const Dataset& valid) {
  ValidateRunConfig(config);
  RunState state(config, train, valid);
  return state.Run();
}

void WriteMetricsCsv(const std::vector<StepRecord>& records,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out << kMetricsHeader << '\n';
  for (const StepRecord& r : records) {
    out << r.step << ',' << r.epoch << ',' << r.batch_size << ','
        << FormatDouble(r.train_loss) << ',' << FormatDouble(r.train_acc) << ','
        << FormatDouble(r.valid_acc) << ',' << FormatDouble(r.epsilon) << ','
        << FormatDouble(r.alpha_star) << ',' << FormatDouble(r.min_eig_min)
        << ',' << FormatDouble(r.sigma_max) << ',' << r.remediated_layers
        << '\n';
  }
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

std::vector<StepRecord> ReadMetricsCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    Fail(ErrorCode::kFormat, "'" + path + "': unexpected header");
  }
  std::vector<StepRecord> records;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 11) {
      Fail(ErrorCode::kFormat, "'" + path + "': row " +
                                   std::to_string(records.size() + 1) +
                                   " has " + std::to_string(f.size()) +
                                   " fields");
    }
    StepRecord r;
    r.step = ParseUnsigned(f[0]);
    r.epoch = ParseUnsigned(f[1]);
    r.batch_size = ParseUnsigned(f[2]);
    r.train_loss = ParseDouble(f[3]);
    r.train_acc = ParseDouble(f[4]);
    r.valid_acc = ParseDouble(f[5]);
    r.epsilon = ParseDouble(f[6]);
    r.alpha_star = ParseDouble(f[7]);
    r.min_eig_min = ParseDouble(f[8]);
    r.sigma_max = ParseDouble(f[9]);
    r.remediated_layers = ParseUnsigned(f[10]);
    records.push_back(std::move(r));
  }
  return records;
}

void WriteParams(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(kParamsMagic, sizeof(kParamsMagic));
  PutU32(out, kParamsVersion);
  PutU32(out, static_cast<std::uint32_t>(params.num_layers()));
  for (const LayerSpec& s : params.specs()) {
    PutU32(out, static_cast<std::uint32_t>(s.in_dim));
    PutU32(out, static_cast<std::uint32_t>(s.out_dim));
    PutU32(out, ActivationCode(s.activation));
  }
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    for (double v : params.Flatten(l)) PutF64(out, v);
  }
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

ModelParams ReadParams(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kParamsMagic)) {
    Fail(ErrorCode::kFormat, "'" + path + "': bad magic at byte 0");
  }
  const auto version = GetLE(in, 4, path);
  if (version != kParamsVersion) {
    Fail(ErrorCode::kFormat, "'" + path + "': unsupported version at byte 8");
  }
  const auto layers = GetLE(in, 4, path);
  std::vector<LayerSpec> specs(layers);
  for (LayerSpec& s : specs) {
    s.in_dim = GetLE(in, 4, path);
    s.out_dim = GetLE(in, 4, path);
    const auto code = GetLE(in, 4, path);
    if (code > 2) Fail(ErrorCode::kFormat, "'" + path + "': bad activation code");
    s.activation = code == 0   ? Activation::kGelu
                   : code == 1 ? Activation::kRelu
                               : Activation::kIdentity;
  }
  ModelParams params(specs);
  for (std::size_t l = 0; l < specs.size(); ++l) {
    Vector flat(specs[l].num_params());
    for (double& v : flat) v = std::bit_cast<double>(GetLE(in, 8, path));
    params.Assign(l, flat);
  }
  if (in.peek() != EOF) {
    Fail(ErrorCode::kFormat, "'" + path + "': trailing bytes");
  }
  return params;
}

void WriteSummaryJson(const TrainResult& result, const RunConfig& config,
                      const std::string& path) {
  using nlohmann::json;
  json s;
  s["algorithm"] = AlgorithmName(config.algorithm);
  s["steps"] = result.total_steps;
  s["steps_per_epoch"] = result.steps_per_epoch;
  s["train_size"] = result.train_size;
  s["valid_size"] = result.valid_size;
  s["n_bar"] = result.n_bar;
  s["delta"] = config.privacy.delta;
  s["epsilon"] = result.final_epsilon.epsilon;
  s["alpha"] = result.final_epsilon.alpha;
  s["gamma"] = result.final_epsilon.gamma;
  s["impairment_term"] = result.final_epsilon.impairment_term;
  s["main_term"] = result.final_epsilon.main_term;
  s["regime_valid"] = result.final_epsilon.regime_valid;
  s["outside_proven_regime"] = !result.final_epsilon.regime_valid;
  s["final_train_acc"] = result.final_train_acc;
  s["final_valid_acc"] = result.final_valid_acc;
  std::uint64_t rejections = 0;
  std::uint64_t remediated_steps = 0;
  for (const StepRecord& r : result.records) {
    rejections += r.rejections;
    remediated_steps += r.remediated_layers > 0;
  }
  s["total_rejections"] = rejections;
  s["remediated_steps"] = remediated_steps;
  s["warnings"] = result.warnings;
  s["config"] = json::parse(RunConfigToJson(config));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path + "'");
  out << s.dump(2) << '\n';
  if (!out) Fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

}  // namespace dpulr
