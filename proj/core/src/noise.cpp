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

#include "fluxtraj/noise.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "fluxtraj/rng.hpp"

namespace fluxtraj {

namespace {

constexpr double kTwoPiLocal = 6.28318530717958647692;

// Direct convolution is fine for optimizer-sized sequences; long
// evaluation sequences (10^5 samples x 4097 taps) go through the FFT.
std::vector<double> convolve_valid(const std::vector<double>& x, const std::vector<double>& h,
                                   int out_len) {
  const int m = static_cast<int>(h.size());
  std::vector<double> y(out_len, 0.0);
  const double direct_cost = static_cast<double>(out_len) * m;
  if (direct_cost < 3e7) {
    for (int i = 0; i < out_len; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += h[j] * x[i + m - 1 - j];
      y[i] = acc;
    }
    return y;
  }
  std::size_t n = 1;
  while (n < x.size() + h.size()) n <<= 1;
  std::vector<double> xa(n, 0.0), ha(n, 0.0);
  std::copy(x.begin(), x.end(), xa.begin());
  std::copy(h.begin(), h.end(), ha.begin());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> xf, hf;
  fft.fwd(xf, xa);
  fft.fwd(hf, ha);
  for (std::size_t i = 0; i < n; ++i) xf[i] *= hf[i];
  std::vector<double> full;
  fft.inv(full, xf);
  for (int i = 0; i < out_len; ++i) y[i] = full[i + m - 1];
  return y;
}

}  // namespace

T1Interpolant T1Interpolant::fit(std::vector<double> flux_ghz, std::vector<double> t1_us) {
  const int n = static_cast<int>(flux_ghz.size());
  if (n < 4 || t1_us.size() != flux_ghz.size()) {
    throw std::invalid_argument("T1Interpolant: need >= 4 knots with matching values");
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(flux_ghz[i + 1] > flux_ghz[i])) {
      throw std::invalid_argument("T1Interpolant: flux knots must be strictly increasing");
    }
  }
  for (double v : t1_us) {
    if (!(v > 0.0)) throw std::invalid_argument("T1Interpolant: T1 knots must be positive");
  }

  // Not-a-knot cubic spline, solved for the knot second derivatives m_i.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  std::vector<double> h(n - 1);
  for (int i = 0; i < n - 1; ++i) h[i] = flux_ghz[i + 1] - flux_ghz[i];
  for (int i = 1; i < n - 1; ++i) {
    a(i, i - 1) = h[i - 1] / 6.0;
    a(i, i) = (h[i - 1] + h[i]) / 3.0;
    a(i, i + 1) = h[i] / 6.0;
    rhs(i) = (t1_us[i + 1] - t1_us[i]) / h[i] - (t1_us[i] - t1_us[i - 1]) / h[i - 1];
  }
  // Third-derivative continuity across the first and last interior knots.
  a(0, 0) = h[1];
  a(0, 1) = -(h[0] + h[1]);
  a(0, 2) = h[0];
  a(n - 1, n - 3) = h[n - 2];
  a(n - 1, n - 2) = -(h[n - 3] + h[n - 2]);
  a(n - 1, n - 1) = h[n - 3];
  const Eigen::VectorXd m = a.fullPivLu().solve(rhs);

  T1Interpolant out;
  out.x_ = std::move(flux_ghz);
  out.y_ = std::move(t1_us);
  out.b_.resize(n - 1);
  out.c_.resize(n - 1);
  out.d_.resize(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    out.b_[i] = (out.y_[i + 1] - out.y_[i]) / h[i] - h[i] * (2.0 * m(i) + m(i + 1)) / 6.0;
    out.c_[i] = m(i) / 2.0;
    out.d_[i] = (m(i + 1) - m(i)) / (6.0 * h[i]);
  }
  return out;
}

T1Interpolant T1Interpolant::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("T1Interpolant: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("T1Interpolant: empty file " + path);
  if (line.find("flux_GHz") == std::string::npos || line.find("T1_us") == std::string::npos) {
    throw std::invalid_argument("T1Interpolant: expected header flux_GHz,T1_us in " + path);
  }
  std::vector<double> x, y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string fa, fb;
    if (!std::getline(row, fa, ',') || !std::getline(row, fb)) {
      throw std::invalid_argument("T1Interpolant: malformed row `" + line + "` in " + path);
    }
    x.push_back(std::stod(fa));
    y.push_back(std::stod(fb));
  }
  return fit(std::move(x), std::move(y));
}

double T1Interpolant::t1_us(double flux) const {
  if (empty()) throw std::logic_error("T1Interpolant: not fitted");
  const int n = static_cast<int>(x_.size());
  if (flux <= x_.front()) return y_.front();
  if (flux >= x_.back()) return y_.back();
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (x_[mid] <= flux ? lo : hi) = mid;
  }
  const double dx = flux - x_[lo];
  return y_[lo] + dx * (b_[lo] + dx * (c_[lo] + dx * d_[lo]));
}

double T1Interpolant::t1_ns_derivative(double flux) const {
  if (empty()) throw std::logic_error("T1Interpolant: not fitted");
  const int n = static_cast<int>(x_.size());
  if (flux <= x_.front() || flux >= x_.back()) return 0.0;
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (x_[mid] <= flux ? lo : hi) = mid;
  }
  const double dx = flux - x_[lo];
  return 1e3 * (b_[lo] + dx * (2.0 * c_[lo] + dx * 3.0 * d_[lo]));
}

T1Interpolant synthetic_t1_curve() {
  // Qualitative stand-in for a measured T1-vs-flux dataset: shorter-lived
  // at the frustration point, longer-lived at large |a|.
  std::vector<double> flux = {-0.5, -0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> t1 = {700.0, 560.0, 400.0, 240.0, 140.0, 100.0, 140.0, 240.0, 400.0, 560.0, 700.0};
  return T1Interpolant::fit(std::move(flux), std::move(t1));
}

std::vector<double> pink_fir_taps(int order) {
  if (order < 3 || order % 2 == 0) {
    throw std::invalid_argument("pink_fir_taps: order must be odd and >= 3");
  }
  const int m = order;
  const double f_lo = 1.0 / m;
  // Linear-phase type-I frequency sampling of |H(f)| = 1/sqrt(max(f, f_lo)).
  std::vector<double> taps(m, 0.0);
  const double mid = (m - 1) / 2.0;
  const int half = (m - 1) / 2;
  for (int n = 0; n < m; ++n) {
    double acc = 1.0 / std::sqrt(f_lo);  // k = 0 term
    for (int k = 1; k <= half; ++k) {
      const double f = static_cast<double>(k) / m;
      const double amp = 1.0 / std::sqrt(std::max(f, f_lo));
      acc += 2.0 * amp * std::cos(kTwoPiLocal * k * (n - mid) / m);
    }
    taps[n] = acc / m;
  }
  return taps;
}

std::vector<double> pink_noise(const PinkNoiseSpec& spec) {
  if (spec.length <= 0) throw std::invalid_argument("pink_noise: length must be positive");
  if (spec.sigma_a < 0.0) throw std::invalid_argument("pink_noise: sigma_a must be >= 0");
  int order = spec.filter_order;
  if (order == 0) {
    order = std::min(4097, spec.length);
    if (order % 2 == 0) --order;
    if (order < 3) order = 3;
  }
  if (spec.length < order) {
    throw std::invalid_argument("pink_noise: length must be >= filter order");
  }
  if (spec.sigma_a == 0.0) return std::vector<double>(spec.length, 0.0);

  const std::vector<double> taps = pink_fir_taps(order);
  NormalSampler normal(mix_seed(spec.seed, 0x70696E6Bull));
  std::vector<double> white(spec.length + order - 1);
  for (double& w : white) w = normal();
  std::vector<double> y = convolve_valid(white, taps, spec.length);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= spec.length;
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= spec.length;
  const double scale = spec.sigma_a / std::sqrt(var);
  for (double& v : y) v *= scale;
  return y;
}

}  // namespace fluxtraj
