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

#include "dpulr/verify.h"

#include <algorithm>
#include <cmath>

#include "dpulr/estimator.h"

namespace dpulr {

TinyProblem MakeTinyProblem(std::uint64_t seed) {
  const RngStream root(seed);
  RngStream init = root.Child(1);
  TinyProblem p;
  p.params = ModelParams::RandomInit(
      {{2, 4, Activation::kGelu}, {4, 3, Activation::kIdentity}}, init);
  RngStream data = root.Child(2);
  p.x = GaussianVector(2, 1.0, data);
  p.label = static_cast<std::size_t>(data.NextBelow(3));
  return p;
}

VerificationReport VerifyGradient(std::uint64_t seed, double sigma,
                                  std::size_t samples) {
  const TinyProblem p = MakeTinyProblem(seed);
  const ForwardTrace trace = ForwardClean(p.x, p.label, p.params);
  const std::vector<Vector> grads = BackpropFromTrace(trace, p.params);
  VerificationReport report;
  report.seed = seed;
  report.sigma = sigma;
  report.samples = samples;
  const RngStream mc = RngStream(seed).Child(3);
  for (std::size_t l = 0; l < p.params.num_layers(); ++l) {
    const ProxyMoments m = EmpiricalProxyMoments(p.x, p.label, p.params, l,
                                                 sigma, samples, mc.Child(l));
    const Matrix predicted = PredictedProxyCovariance(trace, p.params, l, sigma);
    LayerVerification v;
    v.layer = l;
    v.num_params = grads[l].size();
    v.clean_loss = trace.loss;
    v.grad_norm = Norm2(grads[l]);
    double dev2 = 0.0;
    for (std::size_t i = 0; i < v.num_params; ++i) {
      const double dev = m.mean[i] - grads[l][i];
      const double se = std::sqrt(m.covariance(i, i) / static_cast<double>(samples));
      v.max_abs_dev = std::max(v.max_abs_dev, std::abs(dev));
      if (se > 0.0) v.max_abs_z = std::max(v.max_abs_z, std::abs(dev) / se);
      dev2 += dev * dev;
    }
    v.rel_dev = std::sqrt(dev2) / v.grad_norm;
    v.cov_rel_error =
        (m.covariance - predicted).FrobeniusNorm() / predicted.FrobeniusNorm();
    report.layers.push_back(v);
  }
  return report;
}

}  // namespace dpulr
