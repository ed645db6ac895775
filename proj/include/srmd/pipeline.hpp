#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "srmd/clustering.hpp"
#include "srmd/dictionary.hpp"
#include "srmd/signal.hpp"
#include "srmd/solver.hpp"

namespace srmd {

enum class Extension { None, EvenPeriodic };

Extension parse_extension(std::string_view name);
std::string_view to_string(Extension e);

inline constexpr std::uint64_t kDefaultSeed = 20221;

/// Hyperparameters of a decomposition run. Unset optionals take
/// data-dependent defaults when resolved against the input samples:
///   n_features = 10 m, omega_max = m / (2T) (the Nyquist rate),
///   frqscale = T / omega_max, eps = 0.2 T.
/// Counts and domain lengths refer to the input before any extension.
struct SrmdConfig {
  std::optional<Eigen::Index> n_features;
  std::optional<double> omega_max;
  double delta = 0.1;
  double r = 0.06;
  std::optional<double> frqscale;
  std::optional<double> eps;
  int min_samples = 4;
  double threshold = 0.0;
  std::uint64_t seed = kDefaultSeed;
  /// Formulation and tolerances; sigma is always derived from r.
  SolveSpec solver;
  Extension extension = Extension::None;
  std::optional<int> target_modes;
  /// Replaces DBSCAN by a two-way split at this frequency (Hz).
  std::optional<double> split_frequency;
};

/// Every field concrete; n_features already includes the extension factor.
struct ResolvedConfig {
  Eigen::Index n_features = 0;
  double omega_max = 0.0;
  double delta = 0.0;
  double r = 0.0;
  double frqscale = 0.0;
  double eps = 0.0;
  int min_samples = 0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  SolveSpec solver;
  Extension extension = Extension::None;
  std::optional<int> target_modes;
  std::optional<double> split_frequency;
};

ResolvedConfig resolve(const SrmdConfig& cfg, const SignalSamples& samples);

struct Representation {
  Dictionary dictionary;
  SparseCoefficients coeffs;
  /// f#(t) on the input grid
  SignalSamples reconstruction;
  /// samples the solver was fitted to (extended when requested)
  SignalSamples training;
  ExtensionWindow window;
  double sigma = 0.0;
  ResolvedConfig config;
};

/// Draws the dictionary, builds the feature matrix on the (possibly extended)
/// samples and solves for the sparse coefficients. sigma = r ||y_train||.
Representation represent(const SignalSamples& samples, const SrmdConfig& cfg);

struct Mode {
  /// ascending dictionary indices
  std::vector<Eigen::Index> atom_indices;
  SignalSamples samples;
  double l2_norm = 0.0;
};

struct Diagnostics {
  double sigma = 0.0;
  double residual_norm = 0.0;
  double data_norm = 0.0;
  Eigen::Index support_size = 0;
  int iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  int raw_clusters = 0;
  std::size_t relabelled_noise = 0;
};

struct DecompositionResult {
  Representation representation;
  /// sum over the support atoms on the input grid
  SignalSamples reconstruction;
  std::vector<Mode> modes;
  std::vector<SupportAtom> support;
  /// final label of each support atom, aligned with support
  std::vector<int> labels;
  /// DBSCAN labels before noise relabelling (-1 = noise)
  std::vector<int> raw_labels;
  Diagnostics diagnostics;

  /// Re-evaluates mode k at arbitrary times.
  Eigen::VectorXd evaluate_mode(std::size_t k, const Eigen::VectorXd& times) const;
  /// Median omega (Hz) of the atoms in mode k.
  double median_frequency(std::size_t k) const;
};

/// Represents, clusters the support in (tau, frqscale * omega) space and sums
/// the atoms of each cluster into a mode. Throws ErrorKind::Degenerate when
/// no coefficient exceeds the threshold or every support point is noise.
DecompositionResult decompose(const SignalSamples& samples, const SrmdConfig& cfg);

/// Same, starting from an existing representation.
DecompositionResult decompose(Representation rep);

/// Keeps the (target - 1) modes of largest l2 norm and merges all others
/// into one. Identity when there are at most target modes.
std::vector<Mode> reduce_modes(const std::vector<Mode>& modes, int target);

struct Pairing {
  /// learned mode paired with each true mode, extras already merged in;
  /// an all-zero mode stands in when no learned mode is left
  std::vector<Mode> paired;
  /// index of the learned mode chosen for each true mode
  std::vector<std::optional<std::size_t>> assignment;
  /// learned modes left unpaired
  std::vector<std::size_t> extras;
  /// true-mode index that absorbed the extras, if any
  std::optional<std::size_t> merged_into;
  /// relative l2 error of each paired mode after merging
  std::vector<double> errors;
  bool partial = false;
};

/// Greedy pairing: each true mode in order takes the unassigned learned mode
/// nearest in l2; leftovers are merged into the paired mode whose l2
/// distance to its true mode is largest.
Pairing pair_modes(const std::vector<Mode>& learned, const std::vector<SignalSamples>& truth);

/// The ceil(fraction * |S|) support atoms of largest |coeff|, lowest atom
/// index first among equal magnitudes, in descending magnitude order.
std::vector<SupportAtom> top_fraction_support(const std::vector<SupportAtom>& support,
                                              double fraction);
std::vector<SupportAtom> top_fraction_support(const DecompositionResult& result,
                                              double fraction);

/// Flips every negative coefficient and shifts its phase by pi, leaving the
/// model unchanged.
std::pair<Dictionary, SparseCoefficients> canonicalize_signs(const Dictionary& dict,
                                                             const SparseCoefficients& coeffs);

/// Benchmark reproduction settings.
struct BenchmarkCase {
  BenchmarkId id;
  Eigen::Index m = 0;
  NoiseSpec noise;
  SrmdConfig config;
  int true_modes = 0;
};

/// The reference per-benchmark configuration. noise_ratio only affects the
/// overlapping benchmark (default 0.05); it sets both the injected noise and r.
BenchmarkCase benchmark_case(BenchmarkId id, std::uint64_t seed,
                             std::optional<double> noise_ratio = std::nullopt);

/// One benchmark run scored against its ground truth.
struct BenchmarkReport {
  BenchmarkCase spec;
  Benchmark data;
  DecompositionResult result;
  Pairing pairing;
  /// ||f# - clean|| / ||clean|| on the input grid
  double reconstruction_error = 0.0;
  /// training residual over sigma
  double residual_ratio = 0.0;
};

/// Generates the benchmark signal, decomposes it with the case's config and
/// pairs the learned modes against the true ones.
BenchmarkReport run_benchmark(const BenchmarkCase& bc);

}  // namespace srmd
