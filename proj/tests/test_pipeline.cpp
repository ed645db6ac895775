#include <doctest.h>

#include "srmd/error.hpp"
#include "srmd/pipeline.hpp"
#include "srmd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace srmd;

namespace {

constexpr double kPi = std::numbers::pi;

SignalSamples sine(Eigen::Index m, double hz, double duration = 1.0) {
  SignalSamples s;
  s.times = Eigen::VectorXd::LinSpaced(m, 0.0, duration);
  s.values = (2.0 * kPi * hz * s.times.array()).sin();
  s.duration = duration;
  return s;
}

SignalSamples two_tones(Eigen::Index m) {
  SignalSamples s;
  s.times = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  s.values = (2.0 * kPi * 3.0 * s.times.array()).sin() +
             0.7 * (2.0 * kPi * 25.0 * s.times.array()).cos();
  s.duration = 1.0;
  return s;
}

Mode const_mode(double value, Eigen::Index n, std::vector<Eigen::Index> idx) {
  Mode m;
  m.samples.times = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  m.samples.values = Eigen::VectorXd::Constant(n, value);
  m.samples.duration = 1.0;
  m.l2_norm = m.samples.values.norm();
  m.atom_indices = std::move(idx);
  return m;
}

SrmdConfig small_config() {
  SrmdConfig cfg;
  cfg.n_features = 2000;
  cfg.r = 0.05;
  return cfg;
}

Eigen::VectorXd mode_sum(const DecompositionResult& r) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(r.reconstruction.size());
  for (const auto& m : r.modes) sum += m.samples.values;
  return sum;
}

}  // namespace

TEST_CASE("config defaults resolve against the samples") {
  const SignalSamples s = sine(200, 2.0, 2.0);
  const ResolvedConfig rc = resolve(SrmdConfig{}, s);
  CHECK(rc.n_features == 2000);
  CHECK(rc.omega_max == 50.0);
  CHECK(rc.frqscale == doctest::Approx(2.0 / 50.0));
  CHECK(rc.eps == doctest::Approx(0.4));
  CHECK(rc.delta == 0.1);
  CHECK(rc.r == 0.06);
  CHECK(rc.min_samples == 4);
  CHECK(rc.threshold == 0.0);
  CHECK(rc.seed == kDefaultSeed);

  SrmdConfig ext;
  ext.extension = Extension::EvenPeriodic;
  CHECK(resolve(ext, s).n_features == 6000);

  SrmdConfig bad;
  bad.r = 1.5;
  CHECK_THROWS_AS(resolve(bad, s), Error);
  bad = {};
  bad.delta = -1.0;
  CHECK_THROWS_AS(resolve(bad, s), Error);
  bad = {};
  bad.target_modes = 0;
  CHECK_THROWS_AS(resolve(bad, s), Error);

  CHECK(parse_extension(to_string(Extension::EvenPeriodic)) == Extension::EvenPeriodic);
  CHECK(parse_extension(to_string(Extension::None)) == Extension::None);
  CHECK_THROWS_AS(parse_extension("odd"), Error);
}

TEST_CASE("zero signal gives zero coefficients and a degenerate decomposition") {
  SignalSamples s = sine(50, 2.0);
  s.values.setZero();
  const Representation rep = represent(s, small_config());
  CHECK(rep.coeffs.values.isZero());
  CHECK(rep.reconstruction.values.isZero());
  try {
    decompose(s, small_config());
    FAIL("expected degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("pure sine concentrates near its frequency") {
  const SignalSamples s = sine(200, 2.0);
  SrmdConfig cfg = small_config();
  cfg.eps = 10.0;  // one cluster
  // a 0.1 s window is short against a 0.5 s period, so single draws scatter;
  // the check is on the typical draw
  std::vector<double> medians;
  for (std::uint64_t seed : std::vector<std::uint64_t>{kDefaultSeed, 1, 2, 3, 4, 5, 6, 7}) {
    cfg.seed = seed;
    const DecompositionResult r = decompose(s, cfg);
    CHECK(r.diagnostics.converged);
    CHECK(r.diagnostics.residual_norm <= 0.05 * s.values.norm() * (1 + 1e-3));
    // recompute the residual from the dictionary
    const Eigen::MatrixXd a = assemble_matrix(s.times, r.representation.dictionary);
    CHECK((a * r.representation.coeffs.values - s.values).norm() <=
          0.05 * s.values.norm() * (1 + 1e-3));
    REQUIRE(r.modes.size() == 1);
    CHECK((r.modes[0].samples.values - r.reconstruction.values).cwiseAbs().maxCoeff() <= 1e-10);
    medians.push_back(r.median_frequency(0));
  }
  const auto inside = std::count_if(medians.begin(), medians.end(),
                                    [](double m) { return m >= 1.5 && m <= 2.5; });
  CHECK(inside >= 6);
  std::sort(medians.begin(), medians.end());
  const double mid = 0.5 * (medians[3] + medians[4]);
  CHECK(mid >= 1.5);
  CHECK(mid <= 2.5);
}

TEST_CASE("modes partition the reconstruction") {
  const SignalSamples s = two_tones(200);
  SrmdConfig cfg = small_config();
  cfg.eps = 0.05;
  const DecompositionResult r = decompose(s, cfg);
  CHECK(r.modes.size() >= 2);
  CHECK((mode_sum(r) - r.reconstruction.values).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((r.reconstruction.values - r.representation.reconstruction.values)
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(r.labels.size() == r.support.size());
  CHECK(r.raw_labels.size() == r.support.size());
  for (int l : r.labels) CHECK(l >= 0);

  std::size_t atoms = 0;
  for (std::size_t k = 0; k < r.modes.size(); ++k) {
    atoms += r.modes[k].atom_indices.size();
    const Eigen::VectorXd again = r.evaluate_mode(k, s.times);
    CHECK((again - r.modes[k].samples.values).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(atoms == r.support.size());

  // with a threshold the excluded atoms leave both sides
  cfg.threshold = 0.05;
  const DecompositionResult t = decompose(s, cfg);
  for (const auto& a : t.support) CHECK(std::abs(a.coeff) > 0.05);
  CHECK((mode_sum(t) - t.reconstruction.values).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("target mode count reduces and relabels") {
  const SignalSamples s = two_tones(200);
  SrmdConfig cfg = small_config();
  cfg.eps = 0.05;
  cfg.min_samples = 2;
  const DecompositionResult many = decompose(s, cfg);
  REQUIRE(many.modes.size() > 1);
  cfg.target_modes = 1;
  const DecompositionResult one = decompose(s, cfg);
  REQUIRE(one.modes.size() == 1);
  CHECK((one.modes[0].samples.values - one.reconstruction.values).cwiseAbs().maxCoeff() <= 1e-10);
  for (int l : one.labels) CHECK(l == 0);
  CHECK(one.diagnostics.raw_clusters == many.diagnostics.raw_clusters);
}

TEST_CASE("frequency split replaces dbscan") {
  const SignalSamples s = two_tones(200);
  SrmdConfig cfg = small_config();
  cfg.split_frequency = 14.0;
  const DecompositionResult r = decompose(s, cfg);
  REQUIRE(r.modes.size() == 2);
  for (std::size_t i = 0; i < r.support.size(); ++i) {
    CHECK(r.labels[i] == (r.support[i].omega >= 14.0 ? 1 : 0));
  }
  CHECK(r.median_frequency(0) < 14.0);
  CHECK(r.median_frequency(1) >= 14.0);
  CHECK(r.median_frequency(1) == doctest::Approx(25.0).epsilon(0.1));
}

TEST_CASE("identical inputs give bit-identical results") {
  const SignalSamples s = two_tones(120);
  const DecompositionResult a = decompose(s, small_config());
  const DecompositionResult b = decompose(s, small_config());
  CHECK(a.representation.coeffs.values == b.representation.coeffs.values);
  CHECK(a.labels == b.labels);
  REQUIRE(a.modes.size() == b.modes.size());
  for (std::size_t k = 0; k < a.modes.size(); ++k) {
    CHECK(a.modes[k].samples.values == b.modes[k].samples.values);
  }
  SrmdConfig other = small_config();
  other.seed = 5;
  CHECK(decompose(s, other).representation.coeffs.values != a.representation.coeffs.values);
}

TEST_CASE("random and uniform sampling both recover a pure tone") {
  const SignalSamples dense = sine(3200, 4.0);
  const SignalSamples uniform = uniform_downsample(dense, 16);
  const SignalSamples random = random_downsample(dense, 16, 3);
  for (const SignalSamples* s : {&uniform, &random}) {
    SrmdConfig cfg;
    cfg.n_features = 2000;
    cfg.r = 0.05;
    cfg.eps = 10.0;
    const DecompositionResult r = decompose(*s, cfg);
    CHECK(r.diagnostics.converged);
    CHECK(r.diagnostics.residual_norm <= 0.05 * s->values.norm() * (1 + 1e-3));
    REQUIRE(r.modes.size() == 1);
    CHECK(std::abs(r.median_frequency(0) - 4.0) <= 0.5);
  }
}

TEST_CASE("even extension trains on three periods and reports on the window") {
  const SignalSamples s = sine(100, 3.0);
  SrmdConfig cfg = small_config();
  cfg.n_features = 1000;
  cfg.extension = Extension::EvenPeriodic;
  const Representation rep = represent(s, cfg);
  CHECK(rep.training.size() == 298);
  CHECK(rep.config.n_features == 3000);
  CHECK(rep.reconstruction.size() == 100);
  CHECK(rep.reconstruction.times == s.times);
  CHECK(rep.sigma == doctest::Approx(0.05 * rep.training.values.norm()));
  CHECK(rep.dictionary.domain == Interval{-1.0, 2.0});
}

TEST_CASE("other formulations run through the pipeline") {
  const SignalSamples s = sine(100, 3.0);
  SrmdConfig cfg = small_config();
  cfg.n_features = 500;
  cfg.solver.formulation = Formulation::Penalized;
  cfg.solver.lambda = 1e-3;
  const Representation pen = represent(s, cfg);
  CHECK(pen.sigma == 0.0);
  CHECK(pen.coeffs.nonzeros() > 0);

  cfg.solver.formulation = Formulation::L1Ball;
  cfg.solver.lambda.reset();
  cfg.solver.tau_ball = 2.0;
  const Representation ball = represent(s, cfg);
  CHECK(ball.coeffs.values.lpNorm<1>() <= 2.0 * (1 + 1e-9));
}

TEST_CASE("reduce modes keeps the largest and merges the rest") {
  const std::vector<Mode> modes = {const_mode(2.0, 4, {1}), const_mode(10.0, 4, {0, 5}),
                                   const_mode(1.0, 4, {3})};
  const auto two = reduce_modes(modes, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].samples.values == modes[1].samples.values);
  CHECK(two[1].samples.values == Eigen::VectorXd::Constant(4, 3.0));
  CHECK(two[1].atom_indices == std::vector<Eigen::Index>{1, 3});

  CHECK(reduce_modes(modes, 3).size() == 3);
  CHECK(reduce_modes(modes, 5).size() == 3);
  const auto one = reduce_modes(modes, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].samples.values == Eigen::VectorXd::Constant(4, 13.0));
  CHECK(one[0].atom_indices == std::vector<Eigen::Index>{0, 1, 3, 5});
  CHECK_THROWS_AS(reduce_modes(modes, 0), Error);
}

TEST_CASE("pairing") {
  const Mode a = const_mode(1.0, 4, {0});
  const Mode b = const_mode(-3.0, 4, {1});
  const std::vector<SignalSamples> truth = {a.samples, b.samples};

  const Pairing same = pair_modes({a, b}, truth);
  CHECK(same.errors == std::vector<double>{0.0, 0.0});
  CHECK(same.extras.empty());
  CHECK(!same.merged_into);

  const Pairing swapped = pair_modes({b, a}, truth);
  CHECK(swapped.assignment[0] == std::optional<std::size_t>(1));
  CHECK(swapped.assignment[1] == std::optional<std::size_t>(0));
  CHECK(swapped.errors == std::vector<double>{0.0, 0.0});

  // a spurious third mode goes to the worse-fitting pair
  Mode a_off = const_mode(0.5, 4, {0});
  const Mode spurious = const_mode(0.4, 4, {7});
  const Pairing extra = pair_modes({a_off, b, spurious}, truth);
  CHECK(extra.extras == std::vector<std::size_t>{2});
  CHECK(extra.merged_into == std::optional<std::size_t>(0));
  CHECK(extra.paired[0].samples.values == Eigen::VectorXd::Constant(4, 0.9));
  CHECK(extra.errors[0] == doctest::Approx(0.1));

  const Pairing partial = pair_modes({a}, truth);
  CHECK(partial.partial);
  CHECK(!partial.assignment[1]);
  CHECK(partial.errors[1] == 1.0);
}

TEST_CASE("top fraction") {
  std::vector<SupportAtom> s;
  for (int j = 0; j < 100; ++j) {
    s.push_back({0.0, 1.0, 1.0, (j % 7 == 0 ? -1.0 : 1.0) * (1.0 + j), j});
  }
  const auto top3 = top_fraction_support(s, 0.03);
  REQUIRE(top3.size() == 3);
  CHECK(top3[0].atom_index == 99);
  CHECK(top3[1].atom_index == 98);
  CHECK(top3[2].atom_index == 97);
  CHECK(top_fraction_support(s, 1.0).size() == 100);

  std::vector<SupportAtom> flat;
  for (int j = 0; j < 10; ++j) flat.push_back({0.0, 1.0, 1.0, j % 2 ? 2.0 : -2.0, 10 - j});
  const auto two = top_fraction_support(flat, 0.2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].atom_index == 1);
  CHECK(two[1].atom_index == 2);
  CHECK_THROWS_AS(top_fraction_support(std::vector<SupportAtom>{}, 0.5), Error);
  CHECK_THROWS_AS(top_fraction_support(s, 0.0), Error);
}

TEST_CASE("sign canonicalisation preserves the model") {
  Dictionary d = make_dictionary(60, {0.0, 1.0}, 20.0, 0.1, 8);
  SparseCoefficients c;
  c.values = Eigen::VectorXd::Zero(60);
  Rng rng(8);
  for (Eigen::Index j = 0; j < 60; j += 3) c.values[j] = rng.normal();
  const auto [d2, c2] = canonicalize_signs(d, c);
  CHECK((c2.values.array() >= 0.0).all());
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(100, -0.2, 1.2);
  CHECK((evaluate_model(d, c.values, t) - evaluate_model(d2, c2.values, t)).cwiseAbs().maxCoeff() <
        1e-12);
  for (std::size_t j = 0; j < 60; ++j) {
    CHECK(d2.atoms[j].tau == d.atoms[j].tau);
    CHECK(d2.atoms[j].omega == d.atoms[j].omega);
  }

  Dictionary single;
  single.atoms = {{0.0, 1.0, 0.3}};
  SparseCoefficients neg;
  neg.values = Eigen::VectorXd::Constant(1, -2.0);
  const auto [ds, cs] = canonicalize_signs(single, neg);
  CHECK(cs.values[0] == 2.0);
  CHECK(ds.atoms[0].psi == doctest::Approx(0.3 + kPi));

  SparseCoefficients pos;
  pos.values = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(canonicalize_signs(single, pos).first.atoms == single.atoms);
}

TEST_CASE("benchmark cases carry the reference settings") {
  const auto disc = benchmark_case(BenchmarkId::Discontinuous, 1);
  CHECK(disc.m == 320);
  CHECK(*disc.config.n_features == 16000);
  CHECK(disc.true_modes == 3);

  const auto inter = benchmark_case(BenchmarkId::Intersecting, 1);
  CHECK(*inter.config.frqscale == doctest::Approx(2.0 * kPi));
  CHECK(*inter.config.eps == 2.0);

  const auto three = benchmark_case(BenchmarkId::ThreeSinusoids, 1);
  CHECK(three.m == 1000);
  CHECK(*three.config.omega_max == 500.0);
  CHECK(three.config.delta == 2.0);
  CHECK(*three.config.n_features == 50000);
  CHECK(three.config.extension == Extension::EvenPeriodic);
  CHECK(three.noise.kind == NoiseKind::GaussianAbsolute);
  CHECK(three.noise.level == 0.1);

  const auto over = benchmark_case(BenchmarkId::Overlapping, 1, 0.25);
  CHECK(over.noise.level == 0.25);
  CHECK(over.config.r == 0.25);
  CHECK(benchmark_case(BenchmarkId::Overlapping, 1).config.r == 0.05);
  CHECK(benchmark_case(BenchmarkId::Overlapping, 2).config.seed == 2);
}

TEST_CASE("overlapping benchmark end to end") {
  const BenchmarkReport rep = run_benchmark(benchmark_case(BenchmarkId::Overlapping, kDefaultSeed));
  CHECK(rep.result.diagnostics.converged);
  CHECK(rep.residual_ratio <= 1.0 + 1e-3);
  CHECK(rep.pairing.errors.size() == 2);
  CHECK(rep.reconstruction_error < 0.1);
  CHECK((mode_sum(rep.result) - rep.result.reconstruction.values).cwiseAbs().maxCoeff() <= 1e-10);
}
