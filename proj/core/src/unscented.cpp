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

#include "fluxtraj/unscented.hpp"

#include <stdexcept>

#include <Eigen/Cholesky>

namespace fluxtraj {

SigmaPoints unscented_resample(const Vec& mean, const Mat& p_state, const Mat& l_param,
                               double beta, bool normalize) {
  const int s = static_cast<int>(mean.size());
  const int d = static_cast<int>(l_param.rows());
  if (p_state.rows() != s || p_state.cols() != s || l_param.cols() != d) {
    throw std::invalid_argument("unscented_resample: covariance dimensions mismatch");
  }
  auto lower_factor = [](const Mat& m) -> Mat {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::LLT<Mat> jittered(m + 1e-12 * Mat::Identity(m.rows(), m.cols()));
    if (jittered.info() != Eigen::Success) {
      throw std::runtime_error("unscented_resample: covariance not positive definite");
    }
    return jittered.matrixL();
  };
  const Mat sqrt_p = lower_factor(p_state);
  const Mat sqrt_l = lower_factor(l_param);

  const int half = s + d;
  SigmaPoints pts;
  pts.states = Mat::Zero(s, 2 * half);
  pts.params = Mat::Zero(d, 2 * half);
  for (int j = 0; j < 2 * half; ++j) {
    const double sign = j < half ? 1.0 : -1.0;
    const int col = j % half;
    Vec state = mean;
    Vec param = Vec::Zero(d);
    if (col < s) {
      state += sign * beta * sqrt_p.col(col);
    } else {
      param += sign * beta * sqrt_l.col(col - s);
    }
    if (normalize) state /= state.norm();
    pts.states.col(j) = state;
    pts.params.col(j) = param;
  }
  return pts;
}

SigmaMoments unscented_moments(const Mat& states, double beta) {
  const int count = static_cast<int>(states.cols());
  if (count == 0) throw std::invalid_argument("unscented_moments: no samples");
  SigmaMoments m;
  m.mean = states.rowwise().mean();
  const Mat centered = states.colwise() - m.mean;
  m.cov = centered * centered.transpose() / (2.0 * beta * beta);
  return m;
}

UnscentedPropagation unscented_propagate(const SigmaPoints& pts, double beta,
                                         const std::function<Vec(const Vec&, const Vec&)>& dynamics) {
  UnscentedPropagation out;
  out.states.resize(pts.states.rows(), pts.states.cols());
  for (int j = 0; j < pts.states.cols(); ++j) {
    out.states.col(j) = dynamics(pts.states.col(j), pts.params.col(j));
  }
  const SigmaMoments m = unscented_moments(out.states, beta);
  out.mean = m.mean;
  out.cov = m.cov;
  return out;
}

}  // namespace fluxtraj
