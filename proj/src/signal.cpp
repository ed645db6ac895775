#include "srmd/signal.hpp"

#include "srmd/error.hpp"
#include "srmd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace srmd {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd linspace_closed(Eigen::Index m, double duration) {
  Eigen::VectorXd t(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t[i] = duration * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  return t;
}

}  // namespace

Eigen::VectorXd sample_noise(const SignalSamples& signal, const NoiseSpec& noise) {
  if (noise.level < 0.0) invalid_argument("noise level must be non-negative");
  const Eigen::Index m = signal.size();
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(m);
  if (noise.kind == NoiseKind::None || noise.level == 0.0) return eps;
  double stddev = noise.level;
  if (noise.kind == NoiseKind::GaussianRelative) {
    stddev = noise.level * signal.values.norm() / std::sqrt(static_cast<double>(m));
  }
  Rng rng(noise.seed);
  for (Eigen::Index i = 0; i < m; ++i) eps[i] = stddev * rng.normal();
  return eps;
}

void validate(const SignalSamples& signal) {
  if (signal.times.size() != signal.values.size()) {
    invalid_argument("signal: times and values differ in length");
  }
  if (signal.times.size() == 0) invalid_argument("signal: no samples");
  if (!signal.times.allFinite() || !signal.values.allFinite()) {
    invalid_argument("signal: non-finite time or value");
  }
  if (!(signal.duration >= 0.0) || !std::isfinite(signal.duration)) {
    invalid_argument("signal: duration must be finite and non-negative");
  }
  std::vector<double> sorted(signal.times.begin(), signal.times.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    invalid_argument("signal: duplicate sample times");
  }
}

SignalSamples add_noise(const SignalSamples& signal, const NoiseSpec& noise) {
  SignalSamples out = signal;
  out.values = signal.values + sample_noise(signal, noise);
  return out;
}

BenchmarkId parse_benchmark_id(std::string_view name) {
  for (BenchmarkId id : all_benchmarks()) {
    if (to_string(id) == name) return id;
  }
  invalid_argument("unknown benchmark '" + std::string(name) + "'");
}

std::string_view to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Discontinuous: return "discontinuous";
    case BenchmarkId::Intersecting: return "intersecting";
    case BenchmarkId::Overlapping: return "overlapping";
    case BenchmarkId::ThreeSinusoids: return "three-sinusoids";
  }
  return "unknown";
}

const std::vector<BenchmarkId>& all_benchmarks() {
  static const std::vector<BenchmarkId> ids = {
      BenchmarkId::Discontinuous, BenchmarkId::Intersecting, BenchmarkId::Overlapping,
      BenchmarkId::ThreeSinusoids};
  return ids;
}

double benchmark_duration(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::Discontinuous: return 2.0;
    case BenchmarkId::Intersecting: return 10.0;
    case BenchmarkId::Overlapping: return 1.0;
    case BenchmarkId::ThreeSinusoids: return 1.0;
  }
  return 0.0;
}

std::vector<double> benchmark_modes_at(BenchmarkId id, double t) {
  switch (id) {
    case BenchmarkId::Discontinuous: {
      // y1, y2 on [0, 5/4); y3 on (1, 2]
      const bool early = t >= 0.0 && t < 1.25;
      const bool late = t > 1.0 && t <= 2.0;
      const double y1 = early ? kPi * t : 0.0;
      const double y2 = early ? std::cos(40.0 * kPi * t) : 0.0;
      double y3 = 0.0;
      if (late) {
        const double a = 2.0 * kPi * t - 10.0;
        const double b = 2.0 * kPi - 10.0;
        y3 = std::cos(4.0 / 3.0 * (a * a * a - b * b * b) + 20.0 * kPi * (t - 1.0));
      }
      return {y1, y2, y3};
    }
    case BenchmarkId::Intersecting:
      return {std::cos(t * t + t + std::cos(t)), std::cos(8.0 * t)};
    case BenchmarkId::ThreeSinusoids:
      return {std::cos(4.0 * kPi * t), 0.25 * std::cos(48.0 * kPi * t),
              0.0625 * std::cos(576.0 * kPi * t)};
    case BenchmarkId::Overlapping:
      break;
  }
  invalid_argument("benchmark has no closed-form pointwise modes");
}

std::vector<Eigen::VectorXd> overlapping_modes(Eigen::Index m) {
  const auto bump = [](double x) { return std::exp(-9.0 * x * x / 32.0); };
  std::vector<Eigen::VectorXd> modes;
  for (const double center : {16.0, 20.0}) {
    Eigen::VectorXd y(m);
    for (Eigen::Index l = 0; l < m; ++l) {
      std::complex<double> acc{0.0, 0.0};
      for (Eigen::Index k = -m / 2; k < m - m / 2; ++k) {
        const double kd = static_cast<double>(k);
        const double spectrum_sign = (k % 2 == 0) ? 1.0 : -1.0;  // e^{-i pi k}
        const double amplitude =
            static_cast<double>(m) * spectrum_sign * (bump(kd - center) - bump(kd + center));
        const double angle =
            2.0 * kPi * kd * static_cast<double>(l) / static_cast<double>(m);
        acc += amplitude * std::complex<double>(std::cos(angle), std::sin(angle));
      }
      y[l] = acc.imag() / static_cast<double>(m);
    }
    modes.push_back(std::move(y));
  }
  return modes;
}

Benchmark generate_benchmark(BenchmarkId id, Eigen::Index m, const NoiseSpec& noise) {
  if (m < 2) invalid_argument("benchmark needs at least 2 samples");
  const double duration = benchmark_duration(id);

  Eigen::VectorXd times;
  std::vector<Eigen::VectorXd> mode_values;
  if (id == BenchmarkId::Overlapping) {
    times.resize(m);
    for (Eigen::Index l = 0; l < m; ++l) {
      times[l] = static_cast<double>(l) / static_cast<double>(m);
    }
    mode_values = overlapping_modes(m);
  } else {
    times = linspace_closed(m, duration);
    const std::size_t count = benchmark_modes_at(id, 0.0).size();
    mode_values.assign(count, Eigen::VectorXd(m));
    for (Eigen::Index l = 0; l < m; ++l) {
      const auto ys = benchmark_modes_at(id, times[l]);
      for (std::size_t k = 0; k < count; ++k) mode_values[k][l] = ys[k];
    }
  }

  Benchmark bench{id, {}, {}, {}};
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  for (auto& v : mode_values) {
    sum += v;
    bench.modes.push_back(SignalSamples{times, std::move(v), duration});
  }
  bench.clean = SignalSamples{times, sum, duration};
  bench.composite = add_noise(bench.clean, noise);
  return bench;
}

ExtendedSignal extend_even_periodic(const SignalSamples& signal) {
  validate(signal);
  const double T = signal.duration;
  const Eigen::Index m = signal.size();

  std::vector<double> times;
  std::vector<double> values;
  times.reserve(3 * m);
  values.reserve(3 * m);
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    if (signal.times[i] != 0.0) {
      times.push_back(-signal.times[i]);
      values.push_back(signal.values[i]);
    }
  }
  const auto offset = static_cast<Eigen::Index>(times.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    times.push_back(signal.times[i]);
    values.push_back(signal.values[i]);
  }
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    if (signal.times[i] != T) {
      times.push_back(2.0 * T - signal.times[i]);
      values.push_back(signal.values[i]);
    }
  }

  ExtendedSignal out;
  out.samples.times = Eigen::Map<Eigen::VectorXd>(times.data(), std::ssize(times));
  out.samples.values = Eigen::Map<Eigen::VectorXd>(values.data(), std::ssize(values));
  out.samples.duration = 3.0 * T;
  out.window = ExtensionWindow{offset, m, 0.0, T};
  out.domain_lo = -T;
  out.domain_hi = 2.0 * T;
  return out;
}

Eigen::VectorXd restrict_to_window(const Eigen::VectorXd& extended,
                                   const ExtensionWindow& window) {
  if (window.offset + window.count > extended.size()) {
    invalid_argument("extension window exceeds vector length");
  }
  return extended.segment(window.offset, window.count);
}

double relative_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) invalid_argument("relative_l2_error: length mismatch");
  const double diff = (a - b).norm();
  const double ref = b.norm();
  return ref > 0.0 ? diff / ref : diff;
}

double relative_l2_error(const SignalSamples& a, const SignalSamples& b) {
  if (a.times.size() != b.times.size() || a.times != b.times) {
    invalid_argument("relative_l2_error: time grids differ");
  }
  return relative_l2_error(a.values, b.values);
}

SignalSamples uniform_downsample(const SignalSamples& signal, Eigen::Index factor) {
  if (factor < 1) invalid_argument("downsample factor must be >= 1");
  const Eigen::Index count = (signal.size() + factor - 1) / factor;
  SignalSamples out{Eigen::VectorXd(count), Eigen::VectorXd(count), signal.duration};
  for (Eigen::Index i = 0; i < count; ++i) {
    out.times[i] = signal.times[i * factor];
    out.values[i] = signal.values[i * factor];
  }
  return out;
}

SignalSamples random_downsample(const SignalSamples& signal, Eigen::Index factor,
                                std::uint64_t seed) {
  if (factor < 1) invalid_argument("downsample factor must be >= 1");
  const Eigen::Index m = signal.size();
  const Eigen::Index count = (m + factor - 1) / factor;
  std::vector<Eigen::Index> index(static_cast<std::size_t>(m));
  std::iota(index.begin(), index.end(), Eigen::Index{0});
  Rng rng(seed);
  // partial Fisher-Yates
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(index[i], index[j]);
  }
  index.resize(static_cast<std::size_t>(count));
  std::sort(index.begin(), index.end(), [&](Eigen::Index a, Eigen::Index b) {
    return signal.times[a] < signal.times[b];
  });
  SignalSamples out{Eigen::VectorXd(count), Eigen::VectorXd(count), signal.duration};
  for (Eigen::Index i = 0; i < count; ++i) {
    out.times[i] = signal.times[index[i]];
    out.values[i] = signal.values[index[i]];
  }
  return out;
}

SignalSamples normalize_max(const SignalSamples& signal) {
  SignalSamples out = signal;
  const double peak = signal.values.size() ? signal.values.cwiseAbs().maxCoeff() : 0.0;
  if (peak > 0.0) out.values /= peak;
  return out;
}

}  // namespace srmd
