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

#include <cstdint>
#include <string>
#include <vector>

namespace fluxtraj {

/// Flux-dependent depolarization time. Knots are (flux GHz, T1 us) pairs
/// interpolated with a not-a-knot cubic spline (C2, reproduces cubics);
/// queries outside the knot range clamp to the endpoint values.
class T1Interpolant {
 public:
  T1Interpolant() = default;

  /// Requires >= 4 strictly increasing flux knots with positive T1;
  /// throws std::invalid_argument otherwise.
  static T1Interpolant fit(std::vector<double> flux_ghz, std::vector<double> t1_us);

  /// CSV with header `flux_GHz,T1_us`.
  static T1Interpolant from_csv(const std::string& path);

  bool empty() const { return x_.empty(); }
  double t1_us(double flux) const;
  double t1_ns(double flux) const { return 1e3 * t1_us(flux); }
  double t1_ns_derivative(double flux) const;  // d(T1_ns)/d(flux), 0 outside knots

  const std::vector<double>& knot_flux() const { return x_; }
  const std::vector<double>& knot_t1_us() const { return y_; }

 private:
  std::vector<double> x_, y_;
  std::vector<double> b_, c_, d_;  // S(x) = y + b dx + c dx^2 + d dx^3 per interval
};

/// The synthetic stand-in T1 curve shipped with the toolkit: 100 us at the
/// frustration point rising to 700 us at |a| = 0.5 GHz.
T1Interpolant synthetic_t1_curve();

struct PinkNoiseSpec {
  double sigma_a = 2.5e-5;  // RMS amplitude, GHz
  double dt = 0.1;          // sample spacing, ns
  int length = 0;
  std::uint64_t seed = 0;
  /// FIR taps; 0 selects the default: the largest odd value <= min(4097, length).
  int filter_order = 0;
};

/// 1/f flux-noise sequence: white Gaussian noise shaped by a linear-phase
/// FIR filter with 1/sqrt(f) magnitude, then rescaled so the sample
/// standard deviation equals sigma_a exactly. Deterministic in the seed.
std::vector<double> pink_noise(const PinkNoiseSpec& spec);

/// Frequency-sampling design of the shaping filter; magnitude 1/sqrt(f)
/// down to the cutoff 1/order, flat below. Order must be odd and >= 3.
std::vector<double> pink_fir_taps(int order);

}  // namespace fluxtraj
