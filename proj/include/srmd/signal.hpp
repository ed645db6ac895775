#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace srmd {

/// Samples (t_l, y_l) of a 1-D signal on the nominal domain [0, duration].
/// Times need not be uniform but must be distinct.
struct SignalSamples {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
  double duration = 0.0;

  Eigen::Index size() const { return times.size(); }
};

/// Throws if the container breaks its invariants (length mismatch, empty,
/// non-finite or repeated times).
void validate(const SignalSamples& signal);

enum class NoiseKind { None, GaussianRelative, GaussianAbsolute };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  // relative ratio r, or the absolute standard deviation
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// The noise vector add_noise would add; deterministic given the seed.
Eigen::VectorXd sample_noise(const SignalSamples& signal, const NoiseSpec& noise);

/// Gaussian-relative noise has standard deviation r * ||y||_2 / sqrt(m).
SignalSamples add_noise(const SignalSamples& signal, const NoiseSpec& noise);

enum class BenchmarkId { Discontinuous, Intersecting, Overlapping, ThreeSinusoids };

BenchmarkId parse_benchmark_id(std::string_view name);
std::string_view to_string(BenchmarkId id);
const std::vector<BenchmarkId>& all_benchmarks();

struct Benchmark {
  BenchmarkId id;
  /// true modes plus noise
  SignalSamples composite;
  /// noiseless sum of modes
  SignalSamples clean;
  std::vector<SignalSamples> modes;
};

/// Nominal domain length of each benchmark.
double benchmark_duration(BenchmarkId id);

/// Noiseless closed-form modes evaluated at arbitrary times. Not available for
/// the overlapping benchmark, which is defined through a length-m inverse DFT
/// (see overlapping_modes).
std::vector<double> benchmark_modes_at(BenchmarkId id, double t);

/// The two wave packets of the overlapping benchmark on t_l = l / m. Each is
/// the imaginary part of the inverse DFT of m e^{-i pi k} (g(k - k0) - g(k + k0))
/// over k in [-m/2, m/2), with g(x) = exp(-9 x^2 / 32) and k0 = 16, 20.
std::vector<Eigen::VectorXd> overlapping_modes(Eigen::Index m);

Benchmark generate_benchmark(BenchmarkId id, Eigen::Index m, const NoiseSpec& noise);

/// Window of the original samples inside an extended signal.
struct ExtensionWindow {
  Eigen::Index offset = 0;
  Eigen::Index count = 0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ExtendedSignal {
  SignalSamples samples;
  ExtensionWindow window;
  // extended domain [domain_lo, domain_hi]
  double domain_lo = 0.0;
  double domain_hi = 0.0;
};

/// Even periodic extension of samples on [0, T] to [-T, 2T]: the value at -t
/// equals the value at t and the value at T + t equals the value at T - t.
/// Mirror images that coincide with an original time (t = 0, t = T) are
/// dropped, so times stay distinct. The original samples keep their order
/// and occupy the contiguous block described by the returned window.
ExtendedSignal extend_even_periodic(const SignalSamples& signal);

/// Restricts a vector aligned with an extended signal back to its window.
Eigen::VectorXd restrict_to_window(const Eigen::VectorXd& extended,
                                   const ExtensionWindow& window);

/// ||a - b||_2 / ||b||_2, or ||a - b||_2 when b is zero. Grids must match.
double relative_l2_error(const SignalSamples& a, const SignalSamples& b);
double relative_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Keeps every factor-th sample, starting with the first.
SignalSamples uniform_downsample(const SignalSamples& signal, Eigen::Index factor);

/// Keeps a uniformly random subset of ceil(m / factor) samples (drawn without
/// replacement, i.e. i.i.d. uniform times with duplicate rejection on the
/// source grid), returned in time order.
SignalSamples random_downsample(const SignalSamples& signal, Eigen::Index factor,
                                std::uint64_t seed);

/// Divides values by max |y|. A zero signal is returned unchanged.
SignalSamples normalize_max(const SignalSamples& signal);

}  // namespace srmd
