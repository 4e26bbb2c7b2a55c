#include "krig/penalized.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace krig {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ReducedProblem::ReducedProblem(const KrigingSystem& sys, Eigen::Index p)
    : sys_(&sys), p_(p) {
  if (p < 1 || p > sys.n())
    throw std::invalid_argument("ReducedProblem: p out of range");
  if (sys.X.cols() != p)
    throw std::invalid_argument("ReducedProblem: p must match design columns");

  const Eigen::MatrixXd xp = sys.X.topRows(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(xp, Eigen::ComputeThinU |
                                                Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 1e-12 * svd.singularValues().maxCoeff())
    throw std::runtime_error(
        "constraint elimination failed: X_p singular (permute rows)");
  xp_cond_ = svd.singularValues().maxCoeff() / smin;

  xp_inv_t_ = xp.transpose().partialPivLu().inverse();
  base_ = xp_inv_t_ * sys.x0;
  j_ = -xp_inv_t_ * sys.X.bottomRows(sys.n() - p).transpose();
}

Eigen::VectorXd ReducedProblem::reconstruct(
    const Eigen::VectorXd& lambda_minus_p) const {
  if (lambda_minus_p.size() != free_dim())
    throw std::invalid_argument("reconstruct: dimension mismatch");
  Eigen::VectorXd lambda(n());
  lambda.head(p_) = base_ + j_ * lambda_minus_p;
  lambda.tail(free_dim()) = lambda_minus_p;
  return lambda;
}

Eigen::VectorXd ReducedProblem::reduced_gradient(
    const Eigen::VectorXd& lambda_minus_p) const {
  const Eigen::VectorXd lambda = reconstruct(lambda_minus_p);
  const Eigen::VectorXd r = sys_->sigma * lambda - sys_->c0;
  return 2.0 * (j_.transpose() * r.head(p_) + r.tail(free_dim()));
}

double ReducedProblem::objective(const Eigen::VectorXd& lambda_minus_p) const {
  const Eigen::VectorXd lambda = reconstruct(lambda_minus_p);
  return lambda.dot(sys_->sigma * lambda) - 2.0 * lambda.dot(sys_->c0);
}

double ReducedProblem::hessian_bound() const {
  if (hessian_bound_ > 0.0) return hessian_bound_;
  const Eigen::Index m = free_dim();
  if (m == 0) return hessian_bound_ = 1.0;

  auto apply_h = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd full(n());
    full.head(p_) = j_ * v;
    full.tail(m) = v;
    const Eigen::VectorXd sv = sys_->sigma * full;
    return Eigen::VectorXd(2.0 * (j_.transpose() * sv.head(p_) + sv.tail(m)));
  };

  Eigen::VectorXd v = Eigen::VectorXd::Ones(m).normalized();
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd w = apply_h(v);
    const double nw = w.norm();
    if (nw == 0.0) break;
    lam = nw;
    v = w / nw;
  }
  return hessian_bound_ = std::max(lam * 1.05, 1e-300);
}

const Eigen::MatrixXd& ReducedProblem::reduced_hessian() const {
  if (!quad_ready_) {
    const Eigen::Index m = free_dim();
    const Eigen::MatrixXd spp = sys_->sigma.topLeftCorner(p_, p_);
    const Eigen::MatrixXd spm = sys_->sigma.topRightCorner(p_, m);
    const Eigen::MatrixXd js = j_.transpose() * spm;  // m x m
    a_ = sys_->sigma.bottomRightCorner(m, m) + js + js.transpose() +
         j_.transpose() * spp * j_;
    Eigen::VectorXd st0 = sys_->sigma.leftCols(p_) * base_;
    const Eigen::VectorXd v = sys_->c0 - st0;
    b_ = j_.transpose() * v.head(p_) + v.tail(m);
    quad_ready_ = true;
  }
  return a_;
}

const Eigen::VectorXd& ReducedProblem::reduced_rhs() const {
  reduced_hessian();
  return b_;
}

Eigen::VectorXd adaptive_weights(const Eigen::VectorXd& lambda_tilde,
                                 Eigen::Index p) {
  const Eigen::Index m = lambda_tilde.size() - p;
  if (m < 0) throw std::invalid_argument("adaptive_weights: p > N");
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = std::abs(lambda_tilde(p + i));
    w(i) = a < 1e-12 ? kInf : 1.0 / a;
  }
  return w;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v,
                               const Eigen::VectorXd& t) {
  if (v.size() != t.size())
    throw std::invalid_argument("soft_threshold: dimension mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (t(i) < 0.0)
      throw std::invalid_argument("soft_threshold: negative threshold");
    if (std::isinf(t(i))) {
      out(i) = 0.0;
      continue;
    }
    const double a = std::abs(v(i)) - t(i);
    out(i) = a > 0.0 ? (v(i) > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

double kkt_residual(const ReducedProblem& rp, const PenaltySpec& penalty,
                    const Eigen::VectorXd& lambda_minus_p) {
  const Eigen::VectorXd g = rp.reduced_gradient(lambda_minus_p);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double w = penalty.weight(i);
    if (std::isinf(w)) continue;  // pinned coordinate, no condition
    const double li = lambda_minus_p(i);
    double res;
    if (li != 0.0)
      res = std::abs(g(i) + penalty.eta * w * (li > 0.0 ? 1.0 : -1.0));
    else
      res = std::max(0.0, std::abs(g(i)) - penalty.eta * w);
    worst = std::max(worst, res);
  }
  return worst;
}

namespace {

double penalty_value(const PenaltySpec& penalty, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double w = penalty.weight(i);
    if (!std::isinf(w)) s += w * std::abs(v(i));
  }
  return penalty.eta * s;
}

std::vector<int> active_indices(const Eigen::VectorXd& lambda,
                                Eigen::Index p) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (i < p || lambda(i) != 0.0) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

PenalizedSolution solve_penalized(const ReducedProblem& rp,
                                  const PenaltySpec& penalty,
                                  const Eigen::VectorXd& init,
                                  const SolverOptions& opts) {
  const Eigen::Index m = rp.free_dim();
  if (penalty.eta < 0.0) throw std::invalid_argument("eta must be >= 0");
  if (penalty.weights.size() != 0 && penalty.weights.size() != m)
    throw std::invalid_argument("penalty weights: dimension mismatch");

  PenalizedSolution sol;
  sol.eta = penalty.eta;

  if (m == 0) {
    sol.weights = rp.reconstruct(Eigen::VectorXd());
    sol.variance = mse_of_weights(sol.weights, rp.system());
    sol.converged = true;
    sol.active_set = active_indices(sol.weights, rp.p());
    return sol;
  }

  if (penalty.eta > 0.0 && penalty.eta >= eta_max(rp, penalty)) {
    // The fully-sparse endpoint is stationary; return it exactly.
    sol.weights = rp.sparse_endpoint();
    sol.variance = mse_of_weights(sol.weights, rp.system());
    sol.converged = true;
    sol.active_set = active_indices(sol.weights, rp.p());
    return sol;
  }

  if (opts.algorithm == SolverOptions::Algorithm::coordinate) {
    const Eigen::MatrixXd& A = rp.reduced_hessian();
    const Eigen::VectorXd& b = rp.reduced_rhs();
    Eigen::VectorXd x = init.size() == 0 ? rp.zero_free() : init;
    if (x.size() != m)
      throw std::invalid_argument("init: dimension mismatch");
    for (Eigen::Index i = 0; i < m; ++i)
      if (std::isinf(penalty.weight(i))) x(i) = 0.0;

    const double kkt_scale =
        opts.kkt_tol * std::max({1.0, rp.system().sigma0_sq, penalty.eta});
    Eigen::VectorXd r = A * x - b;  // g(x) = 2r

    auto objective = [&](const Eigen::VectorXd& v) {
      return v.dot(A * v) - 2.0 * b.dot(v) + penalty_value(penalty, v);
    };
    auto kkt_from_r = [&]() {
      double worst = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double w = penalty.weight(i);
        if (std::isinf(w)) continue;
        const double g = 2.0 * r(i);
        const double res =
            x(i) != 0.0
                ? std::abs(g + penalty.eta * w * (x(i) > 0.0 ? 1.0 : -1.0))
                : std::max(0.0, std::abs(g) - penalty.eta * w);
        worst = std::max(worst, res);
      }
      return worst;
    };

    // The constraint elimination couples every coordinate through a
    // rank-one term, so plain cyclic descent converges slowly on dense
    // solutions. Interleave sweeps with an active-set equality solve
    // (restricted LLT with the signs frozen), accepted only when it
    // lowers the objective.
    int sweep = 0;
    bool done = false;
    for (; sweep < opts.max_iter && !done; ++sweep) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const double w = penalty.weight(i);
        if (std::isinf(w)) continue;
        const double aii = A(i, i);
        const double v = x(i) - r(i) / aii;
        const double t = penalty.eta * w / (2.0 * aii);
        const double a = std::abs(v) - t;
        const double xi = a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
        if (xi != x(i)) {
          r.noalias() += (xi - x(i)) * A.col(i);
          x(i) = xi;
        }
      }
      if ((sweep + 1) % 64 == 0) r.noalias() = A * x - b;  // drift refresh
      if (kkt_from_r() <= kkt_scale) {
        done = true;
        break;
      }

      if (sweep % 4 == 3) {
        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < m; ++i)
          if (x(i) != 0.0) act.push_back(i);
        if (!act.empty()) {
          const auto k = static_cast<Eigen::Index>(act.size());
          Eigen::MatrixXd as(k, k);
          Eigen::VectorXd bs(k);
          for (Eigen::Index a2 = 0; a2 < k; ++a2) {
            for (Eigen::Index b2 = 0; b2 < k; ++b2)
              as(a2, b2) = A(act[a2], act[b2]);
            const double w = penalty.weight(act[a2]);
            bs(a2) = b(act[a2]) -
                     0.5 * penalty.eta * w * (x(act[a2]) > 0.0 ? 1.0 : -1.0);
          }
          Eigen::LLT<Eigen::MatrixXd> llt(as);
          if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd zs = llt.solve(bs);
            Eigen::VectorXd cand = Eigen::VectorXd::Zero(m);
            for (Eigen::Index a2 = 0; a2 < k; ++a2) {
              // freeze the sign pattern; entries that flip are clipped out
              const double zi = zs(a2);
              cand(act[a2]) =
                  (zi * x(act[a2]) > 0.0 || zi == 0.0) ? zi : 0.0;
            }
            if (objective(cand) < objective(x) - 1e-15) {
              x = cand;
              r.noalias() = A * x - b;
              if (kkt_from_r() <= kkt_scale) done = true;
            }
          }
        }
      }
    }
    sol.iterations = sweep;
    sol.kkt_residual = kkt_residual(rp, penalty, x);
    sol.converged = sol.kkt_residual <= kkt_scale;
    sol.weights = rp.reconstruct(x);
    sol.variance = mse_of_weights(sol.weights, rp.system());
    sol.active_set = active_indices(sol.weights, rp.p());
    return sol;
  }

  const double step = opts.scale_step_by_hessian
                          ? 1.0 / rp.hessian_bound()
                          : opts.alpha;
  Eigen::VectorXd thresh(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = penalty.weight(i);
    thresh(i) = std::isinf(w) ? kInf : penalty.eta * step * w;
  }

  Eigen::VectorXd x = init.size() == 0 ? rp.zero_free() : init;
  if (x.size() != m) throw std::invalid_argument("init: dimension mismatch");
  for (Eigen::Index i = 0; i < m; ++i)
    if (std::isinf(thresh(i))) x(i) = 0.0;

  const double kkt_scale =
      opts.kkt_tol * std::max({1.0, rp.system().sigma0_sq, penalty.eta});

  const bool accel = opts.accelerate && opts.scale_step_by_hessian;
  Eigen::VectorXd y = x;
  double fx = rp.objective(x) + penalty_value(penalty, x);
  double tk = 1.0;
  int bad_steps = 0;
  int iter = 0;

  for (; iter < opts.max_iter; ++iter) {
    const Eigen::VectorXd g = rp.reduced_gradient(y);
    const Eigen::VectorXd z = soft_threshold(y - step * g, thresh);
    const double fz = rp.objective(z) + penalty_value(penalty, z);

    Eigen::VectorXd x_next;
    if (accel) {
      // Monotone variant: keep the better of the candidate and the current
      // iterate, momentum continues through the candidate.
      x_next = fz <= fx ? z : x;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      y = x_next + (tk / t_next) * (z - x_next) +
          ((tk - 1.0) / t_next) * (x_next - x);
      tk = t_next;
    } else {
      x_next = z;
      y = z;
      if (fz > fx + 1e-15 * std::abs(fx)) {
        if (++bad_steps >= 50)
          throw std::runtime_error(
              "penalized solver diverging: reduce the step size alpha");
      } else {
        bad_steps = 0;
      }
    }

    const double disp = (z - x).norm();
    const double f_next = std::min(fz, fx);
    x = std::move(x_next);
    fx = f_next;

    if (disp <= opts.eps) {
      sol.kkt_residual = kkt_residual(rp, penalty, x);
      if (sol.kkt_residual <= kkt_scale) {
        sol.converged = true;
        ++iter;
        break;
      }
      // Displacement stalled without optimality: restart momentum.
      y = x;
      tk = 1.0;
    }
  }

  if (!sol.converged) {
    sol.kkt_residual = kkt_residual(rp, penalty, x);
    sol.converged = sol.kkt_residual <= kkt_scale;
  }
  sol.iterations = iter;
  sol.weights = rp.reconstruct(x);
  sol.variance = mse_of_weights(sol.weights, rp.system());
  sol.active_set = active_indices(sol.weights, rp.p());
  return sol;
}

double eta_max(const ReducedProblem& rp, const PenaltySpec& penalty) {
  // Smallest eta at which the fully-sparse endpoint is stationary: zero is
  // a solution iff |g_i(0)| <= eta w_i for every penalized coordinate.
  const Eigen::VectorXd g = rp.reduced_gradient(rp.zero_free());
  double best = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double w =
        penalty.mode == PenaltyMode::adaptive ? penalty.weight(i) : 1.0;
    if (std::isinf(w)) continue;
    best = std::max(best, std::abs(g(i)) / w);
  }
  return best;
}

std::vector<PenalizedSolution> solution_path(const ReducedProblem& rp,
                                             PenaltySpec penalty,
                                             const std::vector<double>& etas,
                                             const SolverOptions& opts,
                                             const Eigen::VectorXd& init) {
  if (!std::is_sorted(etas.begin(), etas.end()))
    throw std::invalid_argument("solution_path: eta grid must be ascending");
  std::vector<PenalizedSolution> out;
  out.reserve(etas.size());
  Eigen::VectorXd warm = init.size() == 0 ? rp.zero_free() : init;
  for (double eta : etas) {
    penalty.eta = eta;
    out.push_back(solve_penalized(rp, penalty, warm, opts));
    warm = out.back().weights.tail(rp.free_dim());
  }
  return out;
}

}  // namespace krig
