#include "srmd/clustering.hpp"

#include "srmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace srmd {

namespace {

double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

/// Renumbers labels >= 0 by the smallest point index carrying them.
int renumber_by_first_index(std::vector<int>& labels) {
  std::vector<int> mapping;
  int next = 0;
  for (int& label : labels) {
    if (label < 0) continue;
    if (static_cast<std::size_t>(label) >= mapping.size()) {
      mapping.resize(static_cast<std::size_t>(label) + 1, -1);
    }
    auto& target = mapping[static_cast<std::size_t>(label)];
    if (target < 0) target = next++;
    label = target;
  }
  return next;
}

}  // namespace

std::vector<std::size_t> ClusterLabeling::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : labels) {
    if (label >= 0) ++sizes[static_cast<std::size_t>(label)];
  }
  return sizes;
}

std::size_t ClusterLabeling::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoiseLabel));
}

ClusterLabeling dbscan(const std::vector<Point2>& points, double eps, int min_samples) {
  if (points.empty()) invalid_argument("dbscan: empty point set");
  if (!(eps > 0.0)) invalid_argument("dbscan: eps must be positive");
  if (min_samples < 1) invalid_argument("dbscan: min_samples must be >= 1");

  const std::size_t n = points.size();
  const double eps2 = eps * eps;

  // Closed-ball neighbour counts, self included. Distances are recomputed in
  // each pass instead of storing neighbour lists: O(n^2) time, O(n) memory.
  std::vector<int> counts(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (squared_distance(points[i], points[j]) <= eps2) {
        ++counts[i];
        ++counts[j];
      }
    }
  }

  ClusterLabeling out;
  out.eps = eps;
  out.min_samples = min_samples;
  out.labels.assign(n, kNoiseLabel);
  out.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) out.core[i] = counts[i] >= min_samples;

  // components of the core graph
  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!out.core[seed] || out.labels[seed] != kNoiseLabel) continue;
    out.labels[seed] = next;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (out.core[q] && out.labels[q] == kNoiseLabel &&
            squared_distance(points[p], points[q]) <= eps2) {
          out.labels[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
  }

  // border points join their nearest core point within eps, lowest index on ties
  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    int label = kNoiseLabel;
    for (std::size_t q = 0; q < n; ++q) {
      if (!out.core[q]) continue;
      const double d = squared_distance(points[i], points[q]);
      if (d <= eps2 && d < best) {
        best = d;
        label = out.labels[q];
      }
    }
    out.labels[i] = label;
  }

  out.k = renumber_by_first_index(out.labels);
  return out;
}

std::vector<Point2> scale_support(const std::vector<SupportAtom>& support, double frqscale) {
  if (!(frqscale > 0.0)) invalid_argument("frqscale must be positive");
  std::vector<Point2> points;
  points.reserve(support.size());
  for (const auto& atom : support) points.push_back({atom.tau, frqscale * atom.omega});
  return points;
}

ClusterLabeling relabel_noise(const ClusterLabeling& labeling,
                              const std::vector<Point2>& points) {
  if (labeling.labels.size() != points.size()) {
    invalid_argument("relabel_noise: labels and points differ in length");
  }
  std::vector<std::size_t> labelled;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labeling.labels[i] != kNoiseLabel) labelled.push_back(i);
  }
  if (labelled.empty()) {
    throw Error(ErrorKind::Degenerate,
                "clustering labelled every support point as noise; "
                "increase eps or lower min_samples");
  }

  ClusterLabeling out = labeling;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labeling.labels[i] != kNoiseLabel) continue;
    double best = std::numeric_limits<double>::infinity();
    int label = kNoiseLabel;
    for (const std::size_t q : labelled) {
      const double d = squared_distance(points[i], points[q]);
      if (d < best) {
        best = d;
        label = labeling.labels[q];
      }
    }
    out.labels[i] = label;
  }
  return out;
}

ClusterLabeling split_by_frequency(const std::vector<SupportAtom>& support, double cutoff_hz) {
  if (support.empty()) invalid_argument("split_by_frequency: empty support");
  ClusterLabeling out;
  out.labels.reserve(support.size());
  for (const auto& atom : support) out.labels.push_back(atom.omega < cutoff_hz ? 0 : 1);
  out.core.assign(support.size(), true);
  // keep "low" before "high" when both exist
  const bool has_low =
      std::any_of(out.labels.begin(), out.labels.end(), [](int l) { return l == 0; });
  if (!has_low) std::fill(out.labels.begin(), out.labels.end(), 0);
  out.k = has_low && std::any_of(out.labels.begin(), out.labels.end(),
                                 [](int l) { return l == 1; })
              ? 2
              : 1;
  return out;
}

}  // namespace srmd
