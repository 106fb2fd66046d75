/*
 * Copyright 2026 The fluxtraj Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>

#include "fluxtraj/quantum.hpp"

namespace fluxtraj {

/// Sigma points for a state of dimension s with a d-dimensional uncertain
/// parameter: 2(s + d) columns. Column j carries the state sample and its
/// parameter realization.
struct SigmaPoints {
  Mat states;  // s x 2(s+d)
  Mat params;  // d x 2(s+d)
};

struct SigmaMoments {
  Vec mean;
  Mat cov;
};

/// Samples 2(s+d) sigma points at mean +/- beta * columns of the lower
/// Cholesky factor of blockdiag(p_state, l_param). State samples are
/// renormalized to unit norm unless `normalize` is false. A diagonal
/// jitter of 1e-12 is added if the factorization fails; a persistent
/// failure throws std::runtime_error.
SigmaPoints unscented_resample(const Vec& mean, const Mat& p_state, const Mat& l_param,
                               double beta, bool normalize = true);

/// Arithmetic mean and the (1 / 2 beta^2)-scaled outer-product covariance
/// of the sample states.
SigmaMoments unscented_moments(const Mat& states, double beta);

struct UnscentedPropagation {
  Mat states;
  Vec mean;
  Mat cov;
};

/// Propagates every sigma point through `dynamics(state, param)` and
/// recomputes the moments.
UnscentedPropagation unscented_propagate(const SigmaPoints& pts, double beta,
                                         const std::function<Vec(const Vec&, const Vec&)>& dynamics);

}  // namespace fluxtraj
