#include "srmd/pipeline.hpp"

#include "srmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace srmd {

namespace {

double positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    invalid_argument(std::string(name) + " must be positive and finite");
  }
  return v;
}

Mode make_mode(std::vector<Eigen::Index> indices, const Dictionary& dict,
               const Eigen::VectorXd& coeffs, const SignalSamples& grid) {
  Mode mode;
  mode.samples.times = grid.times;
  mode.samples.duration = grid.duration;
  mode.samples.values = evaluate_atoms(dict, coeffs, grid.times, indices);
  mode.l2_norm = mode.samples.values.norm();
  mode.atom_indices = std::move(indices);
  return mode;
}

Mode merge_into(const Mode& base, const Mode& extra) {
  Mode out = base;
  out.atom_indices.insert(out.atom_indices.end(), extra.atom_indices.begin(),
                          extra.atom_indices.end());
  std::sort(out.atom_indices.begin(), out.atom_indices.end());
  out.samples.values = base.samples.values + extra.samples.values;
  out.l2_norm = out.samples.values.norm();
  return out;
}

}  // namespace

Extension parse_extension(std::string_view name) {
  if (name == "none") return Extension::None;
  if (name == "even-periodic") return Extension::EvenPeriodic;
  invalid_argument("unknown extension '" + std::string(name) + "'");
}

std::string_view to_string(Extension e) {
  return e == Extension::EvenPeriodic ? "even-periodic" : "none";
}

ResolvedConfig resolve(const SrmdConfig& cfg, const SignalSamples& samples) {
  validate(samples);
  const double T = positive(samples.duration, "signal duration");
  const auto m = static_cast<double>(samples.size());

  ResolvedConfig out;
  out.omega_max = positive(cfg.omega_max.value_or(m / (2.0 * T)), "omega_max");
  out.delta = positive(cfg.delta, "delta");
  if (!(cfg.r >= 0.0 && cfg.r <= 1.0)) invalid_argument("r must lie in [0, 1]");
  out.r = cfg.r;
  out.frqscale = positive(cfg.frqscale.value_or(T / out.omega_max), "frqscale");
  out.eps = positive(cfg.eps.value_or(0.2 * T), "eps");
  if (cfg.min_samples < 1) invalid_argument("min_samples must be >= 1");
  out.min_samples = cfg.min_samples;
  if (!(cfg.threshold >= 0.0)) invalid_argument("threshold must be non-negative");
  out.threshold = cfg.threshold;
  out.seed = cfg.seed;
  out.solver = cfg.solver;
  out.extension = cfg.extension;
  out.target_modes = cfg.target_modes;
  if (out.target_modes && *out.target_modes < 1) invalid_argument("target_modes must be >= 1");
  out.split_frequency = cfg.split_frequency;
  if (out.split_frequency) positive(*out.split_frequency, "split_frequency");

  const Eigen::Index base = cfg.n_features.value_or(10 * samples.size());
  if (base < 1) invalid_argument("n_features must be >= 1");
  out.n_features = cfg.extension == Extension::EvenPeriodic ? 3 * base : base;
  return out;
}

Representation represent(const SignalSamples& samples, const SrmdConfig& cfg) {
  Representation rep;
  rep.config = resolve(cfg, samples);
  const ResolvedConfig& rc = rep.config;

  Interval domain{0.0, samples.duration};
  if (rc.extension == Extension::EvenPeriodic) {
    ExtendedSignal ext = extend_even_periodic(samples);
    rep.training = std::move(ext.samples);
    rep.window = ext.window;
    domain = Interval{ext.domain_lo, ext.domain_hi};
  } else {
    rep.training = samples;
    rep.window = ExtensionWindow{0, samples.size(), 0.0, samples.duration};
  }

  rep.dictionary = make_dictionary(rc.n_features, domain, rc.omega_max, rc.delta, rc.seed);
  const Eigen::MatrixXd a = assemble_matrix(rep.training.times, rep.dictionary);
  const Eigen::VectorXd& y = rep.training.values;

  SolveSpec spec = rc.solver;
  switch (spec.formulation) {
    case Formulation::ResidualConstrained:
      rep.sigma = rc.r * y.norm();
      spec.sigma = rep.sigma;
      break;
    case Formulation::Penalized:
    case Formulation::L1Ball:
      spec.sigma.reset();
      break;
  }
  rep.coeffs = solve(a, y, spec);

  rep.reconstruction.times = samples.times;
  rep.reconstruction.duration = samples.duration;
  rep.reconstruction.values =
      restrict_to_window(a * rep.coeffs.values, rep.window);
  return rep;
}

DecompositionResult decompose(const SignalSamples& samples, const SrmdConfig& cfg) {
  return decompose(represent(samples, cfg));
}

DecompositionResult decompose(Representation rep) {
  DecompositionResult out;
  const ResolvedConfig& rc = rep.config;
  const Dictionary& dict = rep.dictionary;
  const Eigen::VectorXd& c = rep.coeffs.values;

  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (std::abs(c[j]) > rc.threshold) {
      const FeatureAtom& atom = dict.atoms[static_cast<std::size_t>(j)];
      out.support.push_back(
          SupportAtom{atom.tau, atom.omega, rc.frqscale * atom.omega, c[j], j});
    }
  }
  if (out.support.empty()) {
    throw Error(ErrorKind::Degenerate,
                "no coefficient exceeds the threshold; lower r or threshold");
  }

  ClusterLabeling labeling;
  if (rc.split_frequency) {
    labeling = split_by_frequency(out.support, *rc.split_frequency);
    out.raw_labels = labeling.labels;
  } else {
    const std::vector<Point2> points = scale_support(out.support, rc.frqscale);
    const ClusterLabeling raw = dbscan(points, rc.eps, rc.min_samples);
    out.raw_labels = raw.labels;
    out.diagnostics.relabelled_noise = raw.noise_count();
    labeling = relabel_noise(raw, points);
  }
  out.labels = labeling.labels;
  out.diagnostics.raw_clusters = labeling.k;

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(labeling.k));
  std::vector<Eigen::Index> all;
  for (std::size_t i = 0; i < out.support.size(); ++i) {
    members[static_cast<std::size_t>(out.labels[i])].push_back(out.support[i].atom_index);
    all.push_back(out.support[i].atom_index);
  }

  const SignalSamples& grid = rep.reconstruction;
  out.reconstruction = grid;
  out.reconstruction.values = evaluate_atoms(dict, c, grid.times, all);
  for (auto& indices : members) {
    out.modes.push_back(make_mode(std::move(indices), dict, c, grid));
  }
  if (rc.target_modes && std::ssize(out.modes) > *rc.target_modes) {
    out.modes = reduce_modes(out.modes, *rc.target_modes);
    // support is in ascending atom order
    for (std::size_t k = 0; k < out.modes.size(); ++k) {
      for (const Eigen::Index j : out.modes[k].atom_indices) {
        const auto it = std::lower_bound(
            out.support.begin(), out.support.end(), j,
            [](const SupportAtom& a, Eigen::Index idx) { return a.atom_index < idx; });
        out.labels[static_cast<std::size_t>(it - out.support.begin())] = static_cast<int>(k);
      }
    }
  }

  auto& d = out.diagnostics;
  d.sigma = rep.sigma;
  d.residual_norm = rep.coeffs.residual_norm;
  d.data_norm = rep.training.values.norm();
  d.support_size = static_cast<Eigen::Index>(out.support.size());
  d.iterations = rep.coeffs.iterations;
  d.outer_iterations = rep.coeffs.outer_iterations;
  d.converged = rep.coeffs.converged;

  out.representation = std::move(rep);
  return out;
}

Eigen::VectorXd DecompositionResult::evaluate_mode(std::size_t k,
                                                   const Eigen::VectorXd& times) const {
  return evaluate_atoms(representation.dictionary, representation.coeffs.values, times,
                        modes.at(k).atom_indices);
}

double DecompositionResult::median_frequency(std::size_t k) const {
  std::vector<double> omegas;
  for (const Eigen::Index j : modes.at(k).atom_indices) {
    omegas.push_back(representation.dictionary.atoms[static_cast<std::size_t>(j)].omega);
  }
  if (omegas.empty()) return 0.0;
  std::sort(omegas.begin(), omegas.end());
  const std::size_t n = omegas.size();
  return n % 2 == 1 ? omegas[n / 2] : 0.5 * (omegas[n / 2 - 1] + omegas[n / 2]);
}

std::vector<Mode> reduce_modes(const std::vector<Mode>& modes, int target) {
  if (target < 1) invalid_argument("reduce_modes: target must be >= 1");
  if (std::ssize(modes) <= target) return modes;

  std::vector<std::size_t> order(modes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return modes[a].l2_norm > modes[b].l2_norm;
  });

  const auto keep = static_cast<std::size_t>(target - 1);
  std::vector<Mode> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(modes[order[i]]);
  Mode merged = modes[order[keep]];
  for (std::size_t i = keep + 1; i < order.size(); ++i) merged = merge_into(merged, modes[order[i]]);
  out.push_back(std::move(merged));
  return out;
}

Pairing pair_modes(const std::vector<Mode>& learned, const std::vector<SignalSamples>& truth) {
  for (const auto& mode : learned) {
    for (const auto& t : truth) {
      if (mode.samples.times.size() != t.times.size() || mode.samples.times != t.times) {
        invalid_argument("pair_modes: learned and true modes use different grids");
      }
    }
  }

  Pairing out;
  out.partial = learned.size() < truth.size();
  std::vector<bool> used(learned.size(), false);
  for (const auto& t : truth) {
    std::optional<std::size_t> best;
    double best_dist = 0.0;
    for (std::size_t j = 0; j < learned.size(); ++j) {
      if (used[j]) continue;
      const double dist = (learned[j].samples.values - t.values).norm();
      if (!best || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    if (best) {
      used[*best] = true;
      out.paired.push_back(learned[*best]);
    } else {
      Mode empty;
      empty.samples = t;
      empty.samples.values.setZero();
      out.paired.push_back(std::move(empty));
    }
    out.assignment.push_back(best);
  }
  for (std::size_t j = 0; j < learned.size(); ++j) {
    if (!used[j]) out.extras.push_back(j);
  }

  if (!out.extras.empty() && !truth.empty()) {
    std::size_t worst = 0;
    double worst_dist = -1.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const double dist = (out.paired[k].samples.values - truth[k].values).norm();
      if (dist > worst_dist) {
        worst = k;
        worst_dist = dist;
      }
    }
    for (const std::size_t j : out.extras) out.paired[worst] = merge_into(out.paired[worst], learned[j]);
    out.merged_into = worst;
  }

  for (std::size_t k = 0; k < truth.size(); ++k) {
    out.errors.push_back(relative_l2_error(out.paired[k].samples.values, truth[k].values));
  }
  return out;
}

std::vector<SupportAtom> top_fraction_support(const std::vector<SupportAtom>& support,
                                              double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) invalid_argument("fraction must lie in (0, 1]");
  if (support.empty()) invalid_argument("top_fraction_support: empty support");
  const auto n = static_cast<double>(support.size());
  // the small offset keeps products such as 0.03 * 100 from rounding up
  auto count = static_cast<std::size_t>(std::ceil(fraction * n - 1e-9));
  count = std::clamp<std::size_t>(count, 1, support.size());

  std::vector<SupportAtom> sorted = support;
  std::stable_sort(sorted.begin(), sorted.end(), [](const SupportAtom& a, const SupportAtom& b) {
    const double ma = std::abs(a.coeff);
    const double mb = std::abs(b.coeff);
    if (ma != mb) return ma > mb;
    return a.atom_index < b.atom_index;
  });
  sorted.resize(count);
  return sorted;
}

std::vector<SupportAtom> top_fraction_support(const DecompositionResult& result,
                                              double fraction) {
  return top_fraction_support(result.support, fraction);
}

std::pair<Dictionary, SparseCoefficients> canonicalize_signs(const Dictionary& dict,
                                                             const SparseCoefficients& coeffs) {
  if (coeffs.values.size() != dict.size()) {
    invalid_argument("canonicalize_signs: coefficient length != atom count");
  }
  Dictionary d = dict;
  SparseCoefficients c = coeffs;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (Eigen::Index j = 0; j < c.values.size(); ++j) {
    if (c.values[j] < 0.0) {
      c.values[j] = -c.values[j];
      auto& psi = d.atoms[static_cast<std::size_t>(j)].psi;
      psi = std::fmod(psi + std::numbers::pi, two_pi);
    }
  }
  return {std::move(d), std::move(c)};
}

BenchmarkCase benchmark_case(BenchmarkId id, std::uint64_t seed,
                             std::optional<double> noise_ratio) {
  BenchmarkCase bc{id, 0, {}, {}, 0};
  bc.config.seed = seed;
  const std::uint64_t noise_seed = seed ^ 0x9E3779B97F4A7C15ULL;
  SrmdConfig& cfg = bc.config;
  switch (id) {
    case BenchmarkId::Discontinuous:
      bc.m = 320;
      bc.true_modes = 3;
      cfg.n_features = 50 * bc.m;
      cfg.min_samples = 3;
      cfg.eps = 0.1;
      cfg.target_modes = 3;
      break;
    case BenchmarkId::Intersecting:
      bc.m = 1600;
      bc.true_modes = 2;
      cfg.n_features = 10 * bc.m;
      cfg.omega_max = 5.0;
      // window matched to the 0.75 s Gaussian used for the STFT comparison
      cfg.delta = 0.75;
      cfg.frqscale = 2.0 * std::numbers::pi;
      cfg.eps = 2.0;
      cfg.target_modes = 2;
      break;
    case BenchmarkId::Overlapping: {
      const double ratio = noise_ratio.value_or(0.05);
      bc.m = 160;
      bc.true_modes = 2;
      bc.noise = NoiseSpec{NoiseKind::GaussianRelative, ratio, noise_seed};
      cfg.n_features = 20 * bc.m;
      cfg.omega_max = 40.0;
      cfg.delta = 0.2;
      cfg.r = ratio;
      cfg.frqscale = 1.0;
      cfg.eps = 1.5;
      cfg.target_modes = 2;
      break;
    }
    case BenchmarkId::ThreeSinusoids:
      bc.m = 1000;
      bc.true_modes = 3;
      bc.noise = NoiseSpec{NoiseKind::GaussianAbsolute, 0.1, noise_seed};
      cfg.n_features = 50 * bc.m;
      cfg.omega_max = 500.0;
      cfg.delta = 2.0;
      cfg.r = 0.15;
      cfg.threshold = 0.0;
      cfg.eps = 1.5;
      cfg.min_samples = 4;
      cfg.frqscale = 1.0;
      cfg.extension = Extension::EvenPeriodic;
      cfg.target_modes = 3;
      break;
  }
  return bc;
}

BenchmarkReport run_benchmark(const BenchmarkCase& bc) {
  BenchmarkReport out{bc, generate_benchmark(bc.id, bc.m, bc.noise), {}, {}, 0.0, 0.0};
  out.result = decompose(out.data.composite, bc.config);
  out.pairing = pair_modes(out.result.modes, out.data.modes);
  out.reconstruction_error =
      relative_l2_error(out.result.representation.reconstruction, out.data.clean);
  const auto& d = out.result.diagnostics;
  out.residual_ratio = d.sigma > 0.0 ? d.residual_norm / d.sigma : 0.0;
  return out;
}

}  // namespace srmd
