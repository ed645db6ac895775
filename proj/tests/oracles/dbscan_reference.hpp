#pragma once

// Textbook DBSCAN: explicit neighbour lists and queue-based cluster
// expansion in input order. Border points go to whichever cluster reaches
// them first, so only core points and the noise set are comparable with the
// library's deterministic variant.

#include <array>
#include <cstddef>
#include <deque>
#include <set>
#include <vector>

namespace oracle {

struct DbscanReference {
  std::vector<int> labels;  // -1 noise
  std::vector<bool> core;
};

inline DbscanReference reference_dbscan(const std::vector<std::array<double, 2>>& pts,
                                        double eps, int min_samples) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = pts[i][0] - pts[j][0];
      const double dy = pts[i][1] - pts[j][1];
      if (dx * dx + dy * dy <= eps * eps) nbrs[i].push_back(j);
    }
  }
  DbscanReference out;
  out.labels.assign(n, -2);  // -2 unvisited
  out.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    out.core[i] = static_cast<int>(nbrs[i].size()) >= min_samples;
  }
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != -2) continue;
    if (!out.core[i]) {
      out.labels[i] = -1;
      continue;
    }
    out.labels[i] = cluster;
    std::deque<std::size_t> queue(nbrs[i].begin(), nbrs[i].end());
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (out.labels[q] == -1) out.labels[q] = cluster;  // border point
      if (out.labels[q] != -2) continue;
      out.labels[q] = cluster;
      if (out.core[q]) queue.insert(queue.end(), nbrs[q].begin(), nbrs[q].end());
    }
    ++cluster;
  }
  return out;
}

/// Clusters as sets of core-point indices.
inline std::set<std::set<std::size_t>> core_partition(const std::vector<int>& labels,
                                                      const std::vector<bool>& core) {
  std::vector<std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!core[i] || labels[i] < 0) continue;
    const auto l = static_cast<std::size_t>(labels[i]);
    if (groups.size() <= l) groups.resize(l + 1);
    groups[l].insert(i);
  }
  std::set<std::set<std::size_t>> out;
  for (auto& g : groups) {
    if (!g.empty()) out.insert(std::move(g));
  }
  return out;
}

inline std::set<std::size_t> noise_set(const std::vector<int>& labels) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) out.insert(i);
  }
  return out;
}

}  // namespace oracle
