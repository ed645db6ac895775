#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "srmd/signal.hpp"

namespace srmd {

/// Parameters of one Gaussian-windowed sinusoid
///   phi(t) = exp(-(t - tau)^2 / (2 delta^2)) * sin(2 pi omega t + psi).
/// omega is in Hz; the 2 pi lives inside the sine.
struct FeatureAtom {
  double tau = 0.0;
  double omega = 0.0;
  double psi = 0.0;

  friend bool operator==(const FeatureAtom&, const FeatureAtom&) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct Dictionary {
  std::vector<FeatureAtom> atoms;
  double delta = 0.1;
  Interval domain;
  double omega_max = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(atoms.size()); }
};

void validate(const Dictionary& dict);

/// N i.i.d. atoms with tau ~ U[domain], omega ~ U[0, omega_max],
/// psi ~ U[0, 2 pi). Each atom consumes three consecutive variates in the
/// order tau, omega, psi.
std::vector<FeatureAtom> draw_atoms(Eigen::Index count, Interval domain, double omega_max,
                                    std::uint64_t seed);

Dictionary make_dictionary(Eigen::Index count, Interval domain, double omega_max,
                           double delta, std::uint64_t seed);

inline double evaluate_feature(const FeatureAtom& atom, double delta, double t) {
  const double d = t - atom.tau;
  return std::exp(-d * d / (2.0 * delta * delta)) *
         std::sin(2.0 * std::numbers::pi * atom.omega * t + atom.psi);
}

/// Dense m x N feature matrix; A(l, j) = evaluate_feature(atom_j, delta, t_l)
/// bit for bit.
Eigen::MatrixXd assemble_matrix(const Eigen::VectorXd& times, const Dictionary& dict);
Eigen::MatrixXd assemble_matrix(const SignalSamples& samples, const Dictionary& dict);

/// sum_j coeffs[j] * phi_j(t) over every atom with a non-zero coefficient.
Eigen::VectorXd evaluate_model(const Dictionary& dict, const Eigen::VectorXd& coeffs,
                               const Eigen::VectorXd& times);

/// Same sum restricted to the listed atoms, accumulated in list order.
Eigen::VectorXd evaluate_atoms(const Dictionary& dict, const Eigen::VectorXd& coeffs,
                               const Eigen::VectorXd& times,
                               const std::vector<Eigen::Index>& indices);

}  // namespace srmd
