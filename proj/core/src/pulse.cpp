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

#include "fluxtraj/pulse.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fluxtraj {

Pulse pulse_from_trajectory(const StateLayout& layout, const Trajectory& traj, double dt,
                            bool time_optimal) {
  Pulse p;
  const int rows = static_cast<int>(traj.x.size());
  p.t.resize(rows);
  p.flux.resize(rows);
  p.flux_deriv.resize(rows);
  p.flux_accel.assign(rows, 0.0);
  p.dt.assign(rows, 0.0);
  double t = 0.0;
  for (int k = 0; k < rows; ++k) {
    p.t[k] = t;
    p.flux[k] = traj.x[k](layout.flux());
    p.flux_deriv[k] = traj.x[k](layout.flux_deriv());
    if (k + 1 < rows) {
      p.flux_accel[k] = traj.u[k](0);
      p.dt[k] = time_optimal ? traj.u[k](1) * traj.u[k](1) : dt;
      t += p.dt[k];
    }
  }
  return p;
}

void write_pulse_csv(const std::string& path, const Pulse& pulse) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_pulse_csv: cannot open " + path);
  out << "t_ns,a_GHz,da_GHz_ns,d2a_GHz_ns2,dt_ns\n";
  char buf[160];
  for (int k = 0; k < pulse.rows(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", pulse.t[k], pulse.flux[k],
                  pulse.flux_deriv[k], pulse.flux_accel[k], pulse.dt[k]);
    out << buf;
  }
}

Pulse read_pulse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_pulse_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_ns,", 0) != 0) {
    throw std::runtime_error("read_pulse_csv: missing header in " + path);
  }
  Pulse p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    double vals[5];
    for (int c = 0; c < 5; ++c) {
      if (!std::getline(row, field, ',')) {
        throw std::runtime_error("read_pulse_csv: malformed row `" + line + "`");
      }
      vals[c] = std::stod(field);
    }
    p.t.push_back(vals[0]);
    p.flux.push_back(vals[1]);
    p.flux_deriv.push_back(vals[2]);
    p.flux_accel.push_back(vals[3]);
    p.dt.push_back(vals[4]);
  }
  if (p.rows() < 2) throw std::runtime_error("read_pulse_csv: pulse needs at least two rows");
  return p;
}

namespace {

void append_segment(Pulse& p, double flux, double duration, double dt_hint) {
  const int pieces = std::max(1, static_cast<int>(std::ceil(duration / dt_hint)));
  const double dt = duration / pieces;
  for (int i = 0; i < pieces; ++i) {
    p.t.push_back(p.t.empty() ? 0.0 : p.t.back() + p.dt.back());
    p.flux.push_back(flux);
    p.flux_deriv.push_back(0.0);
    p.flux_accel.push_back(0.0);
    p.dt.push_back(dt);
  }
}

void close_pulse(Pulse& p) {
  p.t.push_back(p.t.back() + p.dt.back());
  p.flux.push_back(0.0);
  p.flux_deriv.push_back(0.0);
  p.flux_accel.push_back(0.0);
  p.dt.push_back(0.0);
}

}  // namespace

Pulse analytic_pulse(GateKind kind, const FluxoniumParams& p, double amplitude, double dt_hint) {
  Pulse pulse;
  if (kind == GateKind::kZHalf) {
    append_segment(pulse, 0.0, 1.0 / (4.0 * p.f_q), dt_hint);
    close_pulse(pulse);
    return pulse;
  }
  if (kind == GateKind::kCustom) {
    throw std::invalid_argument("analytic_pulse: no closed form for custom gates");
  }
  // X/2 (and Y/2 by shifting the idle phases): Z(phi2) R(alpha, theta) Z(phi1)
  // with the rotation axis tilted by alpha = atan(A / f_q) from z. The exact
  // solution takes sin(theta/2) = 1/(sqrt(2) sin(alpha)) on the long branch,
  // which makes both idle phases positive.
  if (!(amplitude > p.f_q)) {
    throw std::invalid_argument("analytic_pulse: amplitude must exceed f_q");
  }
  const double r = std::hypot(amplitude, p.f_q);
  const double alpha = std::atan2(amplitude, p.f_q);
  const double x = std::asin(1.0 / (std::sqrt(2.0) * std::sin(alpha)));
  const double theta = 2.0 * (kPi - x);
  const double phi = kPi + std::atan(std::tan(x) * std::cos(alpha));
  const double tau = theta / (kTwoPi * r);
  double phi_in = phi, phi_out = phi;
  if (kind == GateKind::kYHalf) {
    phi_in = phi - kPi / 2.0;
    phi_out = phi + kPi / 2.0;
  }
  append_segment(pulse, 0.0, phi_in / (kTwoPi * p.f_q), dt_hint);
  append_segment(pulse, amplitude, tau, dt_hint);
  append_segment(pulse, 0.0, phi_out / (kTwoPi * p.f_q), dt_hint);
  close_pulse(pulse);
  return pulse;
}

}  // namespace fluxtraj
