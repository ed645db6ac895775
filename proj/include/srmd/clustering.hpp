#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace srmd {

using Point2 = std::array<double, 2>;

/// A retained dictionary atom: one point of the sparse spectrogram.
struct SupportAtom {
  double tau = 0.0;
  double omega = 0.0;
  double omega_scaled = 0.0;
  double coeff = 0.0;
  Eigen::Index atom_index = 0;
};

inline constexpr int kNoiseLabel = -1;

struct ClusterLabeling {
  std::vector<int> labels;
  std::vector<bool> core;
  int k = 0;
  double eps = 0.0;
  int min_samples = 0;

  /// Number of points with each label in [0, k).
  std::vector<std::size_t> cluster_sizes() const;
  std::size_t noise_count() const;
};

/// Density-based clustering with the Euclidean metric.
///
/// A point is core when its closed eps-ball (itself included) holds at least
/// min_samples points. Clusters are the connected components of core points
/// under eps-reachability. Every non-core point within eps of a core point
/// joins the cluster of its nearest such core point (lower index on ties);
/// the rest are labelled kNoiseLabel. Clusters are numbered in ascending
/// order of their smallest point index, so the output does not depend on
/// traversal order.
ClusterLabeling dbscan(const std::vector<Point2>& points, double eps, int min_samples);

/// (tau_j, frqscale * omega_j) for each support atom.
std::vector<Point2> scale_support(const std::vector<SupportAtom>& support, double frqscale);

/// Gives every noise point the label of its nearest labelled point (lower index
/// on ties). Throws ErrorKind::Degenerate when every point is noise.
ClusterLabeling relabel_noise(const ClusterLabeling& labeling,
                              const std::vector<Point2>& points);

/// Two-way split by frequency: label 0 below cutoff_hz, 1 at or above it.
/// Empty groups are dropped and the remaining labels renumbered.
ClusterLabeling split_by_frequency(const std::vector<SupportAtom>& support, double cutoff_hz);

}  // namespace srmd
