#include "srmd/dictionary.hpp"

#include "srmd/error.hpp"
#include "srmd/rng.hpp"

#include <cmath>
#include <numbers>

namespace srmd {

void validate(const Dictionary& dict) {
  if (dict.atoms.empty()) invalid_argument("dictionary: no atoms");
  if (!(dict.delta > 0.0)) invalid_argument("dictionary: window width must be positive");
  if (!(dict.domain.hi >= dict.domain.lo)) invalid_argument("dictionary: empty domain");
}

std::vector<FeatureAtom> draw_atoms(Eigen::Index count, Interval domain, double omega_max,
                                    std::uint64_t seed) {
  if (count < 1) invalid_argument("draw_atoms: need at least one atom");
  if (!(omega_max > 0.0)) invalid_argument("draw_atoms: omega_max must be positive");
  if (!(domain.hi >= domain.lo)) invalid_argument("draw_atoms: empty domain");

  Rng rng(seed);
  std::vector<FeatureAtom> atoms(static_cast<std::size_t>(count));
  for (auto& atom : atoms) {
    atom.tau = rng.uniform(domain.lo, domain.hi);
    atom.omega = rng.uniform(0.0, omega_max);
    atom.psi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  return atoms;
}

Dictionary make_dictionary(Eigen::Index count, Interval domain, double omega_max,
                           double delta, std::uint64_t seed) {
  if (!(delta > 0.0)) invalid_argument("window width must be positive");
  return Dictionary{draw_atoms(count, domain, omega_max, seed), delta, domain, omega_max,
                    seed};
}

Eigen::MatrixXd assemble_matrix(const Eigen::VectorXd& times, const Dictionary& dict) {
  validate(dict);
  if (times.size() == 0) invalid_argument("assemble_matrix: no samples");
  const Eigen::Index m = times.size();
  const Eigen::Index n = dict.size();
  Eigen::MatrixXd a(m, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    const FeatureAtom& atom = dict.atoms[static_cast<std::size_t>(j)];
    double* column = a.col(j).data();
    for (Eigen::Index l = 0; l < m; ++l) {
      column[l] = evaluate_feature(atom, dict.delta, times[l]);
    }
  }
  return a;
}

Eigen::MatrixXd assemble_matrix(const SignalSamples& samples, const Dictionary& dict) {
  validate(samples);
  return assemble_matrix(samples.times, dict);
}

Eigen::VectorXd evaluate_atoms(const Dictionary& dict, const Eigen::VectorXd& coeffs,
                               const Eigen::VectorXd& times,
                               const std::vector<Eigen::Index>& indices) {
  if (coeffs.size() != dict.size()) invalid_argument("coefficient length != atom count");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(times.size());
  for (const Eigen::Index j : indices) {
    const FeatureAtom& atom = dict.atoms[static_cast<std::size_t>(j)];
    const double c = coeffs[j];
    for (Eigen::Index l = 0; l < times.size(); ++l) {
      out[l] += c * evaluate_feature(atom, dict.delta, times[l]);
    }
  }
  return out;
}

Eigen::VectorXd evaluate_model(const Dictionary& dict, const Eigen::VectorXd& coeffs,
                               const Eigen::VectorXd& times) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] != 0.0) active.push_back(j);
  }
  return evaluate_atoms(dict, coeffs, times, active);
}

}  // namespace srmd
