#include <doctest.h>

#include "srmd/dictionary.hpp"
#include "srmd/error.hpp"

#include <cmath>
#include <numbers>

using namespace srmd;

constexpr double kPi = std::numbers::pi;

TEST_CASE("feature evaluation") {
  CHECK(evaluate_feature({0.0, 0.0, kPi / 2}, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(std::abs(evaluate_feature({0.5, 1.0, 0.0}, 0.1, 0.5)) < 1e-15);
  CHECK(evaluate_feature({0.0, 0.0, kPi / 2}, 1.0, 1.0) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("atom draws cover their ranges") {
  const auto atoms = draw_atoms(100000, {0.0, 1.0}, 10.0, 5);
  double st = 0, so = 0, sp = 0;
  for (const auto& a : atoms) {
    CHECK(a.tau >= 0.0);
    CHECK(a.tau <= 1.0);
    CHECK(a.omega >= 0.0);
    CHECK(a.omega <= 10.0);
    CHECK(a.psi >= 0.0);
    CHECK(a.psi < 2.0 * kPi);
    st += a.tau;
    so += a.omega;
    sp += a.psi;
  }
  const double n = 100000.0;
  CHECK(st / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(so / n == doctest::Approx(5.0).epsilon(0.01));
  CHECK(sp / n == doctest::Approx(kPi).epsilon(0.01));
}

TEST_CASE("atom draws are deterministic") {
  CHECK(draw_atoms(1, {0.0, 1.0}, 3.0, 42) == draw_atoms(1, {0.0, 1.0}, 3.0, 42));
  CHECK(draw_atoms(50, {0.0, 1.0}, 3.0, 42) != draw_atoms(50, {0.0, 1.0}, 3.0, 43));
  // prefix property: atom j depends only on the first 3(j+1) variates
  const auto long_draw = draw_atoms(20, {-1.0, 2.0}, 3.0, 9);
  const auto short_draw = draw_atoms(10, {-1.0, 2.0}, 3.0, 9);
  for (std::size_t j = 0; j < 10; ++j) CHECK(long_draw[j] == short_draw[j]);

  const auto wide = draw_atoms(16000, {0.0, 2.0}, 160.0, 1);
  for (const auto& a : wide) {
    CHECK(a.tau >= 0.0);
    CHECK(a.tau <= 2.0);
  }
}

TEST_CASE("dictionary argument checks") {
  CHECK_THROWS_AS(draw_atoms(0, {0.0, 1.0}, 1.0, 1), Error);
  CHECK_THROWS_AS(draw_atoms(3, {0.0, 1.0}, 0.0, 1), Error);
  CHECK_THROWS_AS(draw_atoms(3, {1.0, 0.0}, 1.0, 1), Error);
  CHECK_THROWS_AS(make_dictionary(3, {0.0, 1.0}, 1.0, 0.0, 1), Error);
  Dictionary empty;
  CHECK_THROWS_AS(validate(empty), Error);
}

TEST_CASE("feature matrix matches pointwise evaluation bit for bit") {
  const Dictionary dict = make_dictionary(37, {0.0, 2.0}, 20.0, 0.3, 11);
  CHECK(dict.size() == 37);
  CHECK(dict.delta == 0.3);
  CHECK(dict.seed == 11);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(23, 0.0, 2.0);
  const Eigen::MatrixXd a = assemble_matrix(t, dict);
  REQUIRE(a.rows() == 23);
  REQUIRE(a.cols() == 37);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index l = 0; l < a.rows(); ++l) {
      CHECK(a(l, j) == evaluate_feature(dict.atoms[static_cast<std::size_t>(j)], 0.3, t[l]));
    }
  }
  CHECK(a.cwiseAbs().maxCoeff() <= 1.0);
  CHECK_THROWS_AS(assemble_matrix(Eigen::VectorXd(), dict), Error);
}

TEST_CASE("single row with zero frequency and phase is zero") {
  Dictionary dict;
  dict.atoms = {{0.2, 0.0, 0.0}};
  dict.domain = {0.0, 1.0};
  Eigen::VectorXd t(1);
  t << 0.7;
  CHECK(assemble_matrix(t, dict)(0, 0) == 0.0);
}

TEST_CASE("model evaluation agrees with the feature matrix") {
  const Dictionary dict = make_dictionary(40, {0.0, 1.0}, 15.0, 0.1, 3);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(50, 0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(40);
  c[3] = 1.5;
  c[17] = -0.25;
  c[39] = 2.0;
  const Eigen::VectorXd direct = assemble_matrix(t, dict) * c;
  CHECK((evaluate_model(dict, c, t) - direct).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd partial = evaluate_atoms(dict, c, t, {3, 39});
  Eigen::VectorXd c2 = c;
  c2[17] = 0.0;
  CHECK((partial - assemble_matrix(t, dict) * c2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(evaluate_model(dict, Eigen::VectorXd::Zero(3), t), Error);
}
