#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "doctest.h"
#include "fluxtraj/noise.hpp"

using namespace fluxtraj;

namespace {

double psd_slope(const std::vector<double>& seq, double f_lo, double f_hi) {
  const int n = static_cast<int>(seq.size());
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  std::vector<double> copy = seq;
  fft.fwd(spec, copy);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) / n;
    if (f < f_lo || f > f_hi) continue;
    const double p = std::norm(spec[k]) / n;
    const double lx = std::log10(f);
    const double ly = std::log10(p);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace

TEST_SUITE_BEGIN("noise");

TEST_CASE("spline fit passes through the knots") {
  std::vector<double> x = {-0.5, -0.2, 0.0, 0.2, 0.5};
  std::vector<double> y = {700.0, 240.0, 100.0, 240.0, 700.0};
  const T1Interpolant t1 = T1Interpolant::fit(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(t1.t1_us(x[i]) == doctest::Approx(y[i]).epsilon(1e-9));
  }
}

TEST_CASE("flat data stays flat between knots") {
  const T1Interpolant t1 = T1Interpolant::fit({0.0, 0.1, 0.2, 0.3}, {5.0, 5.0, 5.0, 5.0});
  CHECK(t1.t1_us(0.15) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(t1.t1_us(0.05) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("not-a-knot spline reproduces cubics between knots") {
  auto cubic = [](double x) { return 2.0 + 0.5 * x + 3.0 * x * x - 1.2 * x * x * x; };
  std::vector<double> x, y;
  for (double v = -1.0; v <= 1.01; v += 0.4) {
    x.push_back(v);
    y.push_back(cubic(v));
  }
  const T1Interpolant t1 = T1Interpolant::fit(x, y);
  for (double q = -0.99; q < 0.99; q += 0.037) {
    CHECK(std::abs(t1.t1_us(q) - cubic(q)) < 1e-10);
  }
}

TEST_CASE("extrapolation clamps to the endpoint values") {
  const T1Interpolant t1 = T1Interpolant::fit({-0.4, -0.1, 0.1, 0.4}, {9.0, 4.0, 4.0, 9.0});
  CHECK(t1.t1_us(-2.0) == doctest::Approx(9.0));
  CHECK(t1.t1_us(2.0) == doctest::Approx(9.0));
  CHECK(t1.t1_ns_derivative(2.0) == doctest::Approx(0.0));
}

TEST_CASE("spline rejects bad knot sets") {
  CHECK_THROWS_AS(T1Interpolant::fit({0.0, 0.1, 0.1, 0.2}, {1.0, 1.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(T1Interpolant::fit({0.0, 0.1, 0.2}, {1.0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(T1Interpolant::fit({0.0, 0.1, 0.2, 0.3}, {1.0, -1.0, 1.0, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("synthetic curve is positive over the full flux range") {
  const T1Interpolant t1 = synthetic_t1_curve();
  for (double a = -0.5; a <= 0.5001; a += 0.001) {
    CHECK(t1.t1_us(a) > 0.0);
  }
}

TEST_CASE("zero amplitude gives the zero sequence") {
  PinkNoiseSpec spec;
  spec.sigma_a = 0.0;
  spec.length = 512;
  spec.seed = 4;
  const auto seq = pink_noise(spec);
  for (double v : seq) CHECK(v == 0.0);
}

TEST_CASE("pink noise is deterministic in the seed") {
  PinkNoiseSpec spec;
  spec.length = 1024;
  spec.seed = 42;
  const auto a = pink_noise(spec);
  const auto b = pink_noise(spec);
  CHECK(a == b);
  spec.seed = 43;
  const auto c = pink_noise(spec);
  CHECK(a != c);
}

TEST_CASE("pink noise scales linearly with sigma") {
  PinkNoiseSpec spec;
  spec.length = 2048;
  spec.seed = 7;
  const auto one = pink_noise(spec);
  spec.sigma_a *= 2.0;
  const auto two = pink_noise(spec);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(two[i] == doctest::Approx(2.0 * one[i]).epsilon(1e-12));
  }
}

TEST_CASE("sample standard deviation equals sigma_a exactly after scaling") {
  PinkNoiseSpec spec;
  spec.length = 4096;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto seq = pink_noise(spec);
    const double mean = std::accumulate(seq.begin(), seq.end(), 0.0) / seq.size();
    double var = 0.0;
    for (double v : seq) var += (v - mean) * (v - mean);
    var /= seq.size();
    CHECK(std::sqrt(var) == doctest::Approx(spec.sigma_a).epsilon(1e-12));
  }
}

TEST_CASE("log-log PSD slope is -1 over the central two decades") {
  PinkNoiseSpec spec;
  spec.length = 1 << 16;
  spec.seed = 20260810;
  const auto seq = pink_noise(spec);
  // Resolvable band [1/N, 1/2] spans ~4.5 decades; fit over the central two.
  const double lo = std::log10(1.0 / spec.length);
  const double hi = std::log10(0.5);
  const double mid = 0.5 * (lo + hi);
  const double slope = psd_slope(seq, std::pow(10.0, mid - 1.0), std::pow(10.0, mid + 1.0));
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("short sequences reject oversized filters") {
  PinkNoiseSpec spec;
  spec.length = 64;
  spec.filter_order = 129;
  CHECK_THROWS_AS(pink_noise(spec), std::invalid_argument);
}

TEST_SUITE_END();
