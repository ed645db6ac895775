#include "srmd/solver.hpp"

#include "srmd/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <string>

namespace srmd {

namespace {

constexpr double kStepMin = 1e-10;
constexpr double kStepMax = 1e10;
constexpr double kArmijo = 1e-4;
constexpr std::size_t kNonmonotoneMemory = 10;
constexpr int kMaxLineSearch = 30;
constexpr Eigen::Index kMaxPolishSupport = 2000;
// SPG steps with an unchanged support before an active-set polish is tried
constexpr int kPolishAfter = 5;
// ... or after this many steps regardless, since tiny entries can keep flickering
constexpr int kPolishEvery = 50;

void check_dims(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  if (a.rows() != y.size()) {
    invalid_argument("matrix has " + std::to_string(a.rows()) + " rows but data has " +
                     std::to_string(y.size()) + " entries");
  }
  if (a.cols() == 0) invalid_argument("matrix has no columns");
}

/// A * v, touching only the columns where v is non-zero when v is sparse.
Eigen::VectorXd apply_sparse(const Eigen::MatrixXd& a, const Eigen::VectorXd& v,
                             int& full_products) {
  std::vector<Eigen::Index> nz;
  nz.reserve(static_cast<std::size_t>(v.size() / 8 + 1));
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) nz.push_back(j);
  }
  if (std::ssize(nz) * 4 > v.size()) {
    ++full_products;
    return a * v;
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.rows());
  for (const Eigen::Index j : nz) out.noalias() += v[j] * a.col(j);
  return out;
}

/// Least-squares state f(x) = 1/2 ||y - Ax||^2 for x restricted to an l1 ball.
class L1BallLeastSquares {
 public:
  L1BallLeastSquares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) : a_(a), y_(y) {
    reset(Eigen::VectorXd::Zero(a.cols()));
  }

  void reset(Eigen::VectorXd x) {
    x_ = std::move(x);
    ax_ = apply_sparse(a_, x_, full_products_);
    refresh_gradient();
    history_.clear();
    polished_ = false;
  }

  const Eigen::VectorXd& x() const { return x_; }
  double f() const { return f_; }
  double residual_norm() const { return std::sqrt(2.0 * f_); }
  double gradient_inf_norm() const { return g_.lpNorm<Eigen::Infinity>(); }
  int full_products() const { return full_products_; }

  /// tau ||A^T r||_inf - r^T A x >= 0; zero exactly at the ball-constrained
  /// optimum.
  double duality_gap(double tau) const {
    return std::max(0.0, tau * gradient_inf_norm() - r_.dot(ax_));
  }

  /// One spectral projected-gradient step with a nonmonotone Armijo search
  /// along the feasible direction. Returns false when no descent is possible.
  bool step(double tau) {
    Eigen::VectorXd d = project_l1_ball(x_ - step_ * g_, tau) - x_;
    const double gtd = g_.dot(d);
    if (!(gtd < 0.0)) return false;

    history_.push_back(f_);
    if (history_.size() > kNonmonotoneMemory) history_.pop_front();
    const double f_ref = *std::max_element(history_.begin(), history_.end());

    const Eigen::VectorXd ad = apply_sparse(a_, d, full_products_);
    double t = 1.0;
    Eigen::VectorXd r_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < kMaxLineSearch; ++k) {
      r_new = r_ - t * ad;
      f_new = 0.5 * r_new.squaredNorm();
      if (f_new <= f_ref + kArmijo * t * gtd) {
        accepted = true;
        break;
      }
      // safeguarded quadratic interpolation
      const double curvature = f_new - f_ - t * gtd;
      double t_next = curvature > 0.0 ? -gtd * t * t / (2.0 * curvature) : 0.5 * t;
      if (!(t_next >= 0.1 * t && t_next <= 0.9 * t)) t_next = 0.5 * t;
      t = t_next;
    }
    if (!accepted) {
      step_ = std::max(kStepMin, 0.1 * step_);
      return false;
    }

    const Eigen::VectorXd s = t * d;
    bool same_pattern = true;
    for (Eigen::Index j = 0; j < x_.size() && same_pattern; ++j) {
      const double after = x_[j] + s[j];
      same_pattern = (x_[j] > 0.0) == (after > 0.0) && (x_[j] < 0.0) == (after < 0.0);
    }
    ++since_polish_;
    if (same_pattern) {
      ++stable_steps_;
    } else {
      stable_steps_ = 0;
      polished_ = false;
    }
    x_ += s;
    ax_ += t * ad;
    const Eigen::VectorXd g_old = g_;
    refresh_gradient();
    const Eigen::VectorXd yk = g_ - g_old;
    const double sty = s.dot(yk);
    step_ = sty > 0.0 ? std::clamp(s.squaredNorm() / sty, kStepMin, kStepMax) : kStepMax;
    return true;
  }

  void forget_history() {
    history_.clear();
    polished_ = false;
  }

  bool should_polish() const {
    return (stable_steps_ >= kPolishAfter && !polished_) || since_polish_ >= kPolishEvery;
  }

  /// Exact minimizer of f over the current support and sign pattern with
  /// ||x||_1 <= tau active, reached by stepping from x toward it until the
  /// first sign change. Accepted only if f decreases.
  bool polish(double tau) {
    polished_ = true;
    since_polish_ = 0;
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < x_.size(); ++j) {
      if (x_[j] != 0.0) support.push_back(j);
    }
    const auto k = std::ssize(support);
    if (k == 0 || k > std::min<Eigen::Index>(a_.rows(), kMaxPolishSupport)) return false;

    Eigen::MatrixXd b(a_.rows(), k);
    Eigen::VectorXd xs(k), signs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      b.col(i) = a_.col(support[static_cast<std::size_t>(i)]);
      xs[i] = x_[support[static_cast<std::size_t>(i)]];
      signs[i] = xs[i] > 0.0 ? 1.0 : -1.0;
    }
    Eigen::MatrixXd gram = b.transpose() * b;
    gram.diagonal().array() += 1e-12 * gram.diagonal().maxCoeff();
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd u = ldlt.solve(b.transpose() * y_);
    const Eigen::VectorXd v = ldlt.solve(signs);
    const double svv = signs.dot(v);
    if (!(svv > 0.0) || !u.allFinite() || !v.allFinite()) return false;
    const double mu = std::max(0.0, (signs.dot(u) - tau) / svv);
    const Eigen::VectorXd z = u - mu * v;

    // largest step that keeps every sign
    double t = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (z[i] * signs[i] <= 0.0) t = std::min(t, xs[i] / (xs[i] - z[i]));
    }
    Eigen::VectorXd next = xs + t * (z - xs);
    for (Eigen::Index i = 0; i < k; ++i) {
      if (next[i] * signs[i] <= 0.0 || (t < 1.0 && std::abs(next[i]) <= 1e-15 * std::abs(xs[i]))) {
        next[i] = 0.0;
      }
    }
    if (next.lpNorm<1>() > tau * (1.0 + 1e-12)) return false;
    const Eigen::VectorXd ax = b * next;
    const double f_next = 0.5 * (y_ - ax).squaredNorm();
    if (!(f_next < f_)) return false;

    for (Eigen::Index i = 0; i < k; ++i) x_[support[static_cast<std::size_t>(i)]] = next[i];
    ax_ = ax;
    refresh_gradient();
    history_.clear();
    return true;
  }

 private:
  void refresh_gradient() {
    r_ = y_ - ax_;
    f_ = 0.5 * r_.squaredNorm();
    g_.noalias() = -(a_.transpose() * r_);
    ++full_products_;
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& y_;
  Eigen::VectorXd x_, ax_, r_, g_;
  double f_ = 0.0;
  double step_ = 1.0;
  int full_products_ = 0;
  int stable_steps_ = 0;
  int since_polish_ = 0;
  bool polished_ = false;
  std::deque<double> history_;
};

SparseCoefficients finish(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                          Eigen::VectorXd x, int iterations, int outer, int products,
                          bool converged, std::vector<IterationRecord> trace) {
  SparseCoefficients out;
  out.residual_norm = (a * x - y).norm();
  out.l1_norm = x.lpNorm<1>();
  out.values = std::move(x);
  out.iterations = iterations;
  out.outer_iterations = outer;
  out.full_products = products + 1;
  out.converged = converged;
  out.trace = std::move(trace);
  return out;
}

SparseCoefficients zero_solution(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  return finish(a, y, Eigen::VectorXd::Zero(a.cols()), 0, 0, 0, true, {});
}

}  // namespace

Formulation parse_formulation(std::string_view name) {
  for (Formulation f :
       {Formulation::ResidualConstrained, Formulation::Penalized, Formulation::L1Ball}) {
    if (to_string(f) == name) return f;
  }
  invalid_argument("unknown formulation '" + std::string(name) + "'");
}

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::ResidualConstrained: return "residual-constrained";
    case Formulation::Penalized: return "penalized";
    case Formulation::L1Ball: return "l1-ball";
  }
  return "unknown";
}

void validate(const SolveSpec& spec) {
  if (!(spec.tol > 0.0)) invalid_argument("solver tol must be positive");
  if (!(spec.inner_tol > 0.0)) invalid_argument("solver inner_tol must be positive");
  if (spec.max_iters < 1 || spec.max_outer < 1) {
    invalid_argument("solver iteration limits must be positive");
  }
  const bool has_sigma = spec.sigma.has_value();
  const bool has_lambda = spec.lambda.has_value();
  const bool has_tau = spec.tau_ball.has_value();
  switch (spec.formulation) {
    case Formulation::ResidualConstrained:
      if (has_lambda || has_tau) invalid_argument("residual-constrained takes only sigma");
      break;
    case Formulation::Penalized:
      if (has_sigma || has_tau) invalid_argument("penalized takes only lambda");
      break;
    case Formulation::L1Ball:
      if (has_sigma || has_lambda) invalid_argument("l1-ball takes only tau_ball");
      break;
  }
}

Eigen::Index SparseCoefficients::nonzeros(double threshold) const {
  return (values.array().abs() > threshold).count();
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double threshold) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - threshold;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  if (!(radius > 0.0)) return Eigen::VectorXd::Zero(v.size());
  if (v.lpNorm<1>() <= radius) return v;

  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) mags.push_back(std::abs(v[i]));
  }
  std::sort(mags.begin(), mags.end(), std::greater<>());
  // threshold theta solves sum_i max(|v_i| - theta, 0) = radius
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (mags[k] - candidate <= 0.0) break;
    theta = candidate;
  }
  return soft_threshold(v, theta);
}

double estimate_lipschitz(const Eigen::MatrixXd& a, int iterations, double rtol) {
  if (a.size() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()) / std::sqrt(double(a.cols()));
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Eigen::VectorXd w = a.transpose() * (a * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = std::abs(next - lambda) <= rtol * next;
    lambda = next;
    if (done) break;
  }
  return lambda;
}

SparseCoefficients solve_bpdn(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                              double sigma, const SolveSpec& spec) {
  check_dims(a, y);
  if (!(sigma >= 0.0)) invalid_argument("sigma must be non-negative");
  if (!(spec.tol > 0.0)) invalid_argument("solver tol must be positive");

  const double y_norm = y.norm();
  if (sigma >= y_norm) return zero_solution(a, y);

  L1BallLeastSquares state(a, y);
  std::vector<IterationRecord> trace;
  double tau = 0.0;
  int outer = 0;
  int iter = 0;
  bool converged = false;
  bool force_update = true;  // tau = 0 is solved exactly by x = 0

  while (true) {
    const double phi = state.residual_norm();
    const double g_inf = state.gradient_inf_norm();
    const double gap = state.duality_gap(tau);
    const double scale = tau * g_inf;
    const double gap_rel = scale > 0.0 ? gap / scale : 0.0;
    if (spec.record_trace) {
      trace.push_back({iter, phi, state.x().lpNorm<1>(), tau, gap_rel});
    }

    const bool on_level = sigma > 0.0 ? std::abs(phi - sigma) <= spec.tol * sigma
                                      : phi <= spec.bp_tol * y_norm;
    if (on_level && gap_rel <= spec.tol) {
      converged = true;
      break;
    }
    if (iter >= spec.max_iters) break;

    // Solve each subproblem only as accurately as the distance to the root
    // warrants.
    const double phi_err = std::abs(phi - sigma) / std::max(phi, 1e-300);
    const double gap_target = std::max(spec.inner_tol, 0.1 * phi_err);
    if (force_update || gap_rel <= gap_target) {
      force_update = false;
      if (outer >= spec.max_outer) break;
      if (g_inf <= 0.0) break;  // A^T r = 0: no descent direction exists
      const double tau_next = std::max(0.0, tau + phi * (phi - sigma) / g_inf);
      ++outer;
      if (tau_next < tau) {
        state.reset(project_l1_ball(state.x(), tau_next));
      } else {
        state.forget_history();
      }
      tau = tau_next;
      continue;
    }

    ++iter;
    if (!state.step(tau)) force_update = true;
    if (state.should_polish()) state.polish(tau);
  }

  return finish(a, y, state.x(), iter, outer, state.full_products(), converged,
                std::move(trace));
}

SparseCoefficients solve_l1_ball(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                 double tau_ball, const SolveSpec& spec) {
  check_dims(a, y);
  if (!(tau_ball >= 0.0)) invalid_argument("tau_ball must be non-negative");
  if (!(spec.tol > 0.0)) invalid_argument("solver tol must be positive");
  if (tau_ball == 0.0 || y.norm() == 0.0) return zero_solution(a, y);

  L1BallLeastSquares state(a, y);
  std::vector<IterationRecord> trace;
  const double floor = 0.5 * y.squaredNorm() * spec.tol;
  int iter = 0;
  bool converged = false;
  int stalls = 0;
  while (true) {
    const double gap = state.duality_gap(tau_ball);
    if (spec.record_trace) {
      trace.push_back({iter, state.residual_norm(), state.x().lpNorm<1>(), tau_ball, gap});
    }
    if (gap <= spec.tol * std::max(state.f(), floor)) {
      converged = true;
      break;
    }
    if (iter >= spec.max_iters) break;
    ++iter;
    if (!state.step(tau_ball)) {
      if (++stalls > 3) break;
    } else {
      stalls = 0;
    }
    if (state.should_polish()) state.polish(tau_ball);
  }
  return finish(a, y, state.x(), iter, 1, state.full_products(), converged,
                std::move(trace));
}

SparseCoefficients solve_lasso_penalized(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                                         double lambda, const SolveSpec& spec) {
  check_dims(a, y);
  if (!(lambda >= 0.0)) invalid_argument("lambda must be non-negative");
  if (!(spec.tol > 0.0)) invalid_argument("solver tol must be positive");

  const auto m = static_cast<double>(a.rows());
  const Eigen::Index n = a.cols();
  int products = 0;

  const auto gradient = [&](const Eigen::VectorXd& x, Eigen::VectorXd& residual) {
    residual = a * x - y;
    products += 2;
    return Eigen::VectorXd((a.transpose() * residual) / m);
  };
  // largest violation of 0 in g + lambda * d||x||_1
  const auto stationarity = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = x[j] != 0.0 ? std::abs(g[j] + std::copysign(lambda, x[j]))
                                   : std::max(std::abs(g[j]) - lambda, 0.0);
      worst = std::max(worst, v);
    }
    return worst;
  };

  const double lambda_max = (a.transpose() * y).lpNorm<Eigen::Infinity>() / m;
  ++products;
  const double scale = std::max(lambda_max, std::numeric_limits<double>::min());

  double lip = estimate_lipschitz(a) / m;
  if (!(lip > 0.0)) return zero_solution(a, y);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = x;
  Eigen::VectorXd residual;
  double t = 1.0;
  int iter = 0;
  bool converged = false;
  std::vector<IterationRecord> trace;

  while (true) {
    const Eigen::VectorXd gx = gradient(x, residual);
    const double kkt = stationarity(x, gx);
    if (spec.record_trace) {
      trace.push_back({iter, residual.norm(), x.lpNorm<1>(), lambda, kkt});
    }
    if (kkt <= spec.tol * scale) {
      converged = true;
      break;
    }
    if (iter >= spec.max_iters) break;
    ++iter;

    Eigen::VectorXd rz;
    const Eigen::VectorXd gz = gradient(z, rz);
    const double fz = 0.5 * rz.squaredNorm() / m;
    Eigen::VectorXd x_next;
    for (int k = 0; k < 60; ++k) {
      x_next = soft_threshold(z - gz / lip, lambda / lip);
      const Eigen::VectorXd diff = x_next - z;
      const double f_next = 0.5 * (a * x_next - y).squaredNorm() / m;
      ++products;
      if (f_next <= fz + gz.dot(diff) + 0.5 * lip * diff.squaredNorm() * (1.0 + 1e-12)) break;
      lip *= 2.0;
    }
    // adaptive restart when momentum points uphill
    if ((z - x_next).dot(x_next - x) > 0.0) t = 1.0;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = x_next + ((t - 1.0) / t_next) * (x_next - x);
    x = std::move(x_next);
    t = t_next;
  }
  return finish(a, y, std::move(x), iter, 1, products, converged, std::move(trace));
}

SparseCoefficients solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                         const SolveSpec& spec) {
  validate(spec);
  switch (spec.formulation) {
    case Formulation::ResidualConstrained:
      if (!spec.sigma) invalid_argument("residual-constrained solve needs sigma");
      return solve_bpdn(a, y, *spec.sigma, spec);
    case Formulation::Penalized:
      if (!spec.lambda) invalid_argument("penalized solve needs lambda");
      return solve_lasso_penalized(a, y, *spec.lambda, spec);
    case Formulation::L1Ball:
      if (!spec.tau_ball) invalid_argument("l1-ball solve needs tau_ball");
      return solve_l1_ball(a, y, *spec.tau_ball, spec);
  }
  invalid_argument("unknown formulation");
}

}  // namespace srmd
