#pragma once

#include <Eigen/Dense>
#include <vector>

#include "krig/kriging.hpp"

namespace krig {

// Constraint-eliminated form of the penalized kriging problem. The first p
// rows of the system (nearest neighbors under the distance ordering) carry
// the unbiasedness constraint: lambda_p = Xp^{-T}(x0 - X_{-p}^T lambda_{-p}),
// so the optimization runs unconstrained over lambda_{-p}.
class ReducedProblem {
 public:
  ReducedProblem(const KrigingSystem& sys, Eigen::Index p);

  Eigen::Index n() const { return sys_->n(); }
  Eigen::Index p() const { return p_; }
  Eigen::Index free_dim() const { return n() - p_; }
  const KrigingSystem& system() const { return *sys_; }
  double xp_condition() const { return xp_cond_; }

  // Full weight vector satisfying X' lambda = x0 exactly for any lambda_{-p}.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& lambda_minus_p) const;

  // Weights at the fully-sparse endpoint (lambda_{-p} = 0).
  Eigen::VectorXd sparse_endpoint() const { return reconstruct(zero_free()); }

  // Gradient of Q(lambda_{-p}) = lambda' Sigma lambda - 2 lambda' c0 under
  // the elimination map.
  Eigen::VectorXd reduced_gradient(const Eigen::VectorXd& lambda_minus_p) const;

  double objective(const Eigen::VectorXd& lambda_minus_p) const;

  // Upper bound on the largest eigenvalue of the reduced Hessian, via power
  // iteration with a safety factor. Cached after the first call.
  double hessian_bound() const;

  // Dense reduced quadratic: Q(x) = x'Ax - 2b'x + const, so the gradient is
  // 2(Ax - b). Materialized lazily and cached (m x m).
  const Eigen::MatrixXd& reduced_hessian() const;
  const Eigen::VectorXd& reduced_rhs() const;

  Eigen::VectorXd zero_free() const {
    return Eigen::VectorXd::Zero(free_dim());
  }

 private:
  const KrigingSystem* sys_;
  Eigen::Index p_;
  Eigen::MatrixXd xp_inv_t_;  // Xp^{-T}
  Eigen::VectorXd base_;      // Xp^{-T} x0
  Eigen::MatrixXd j_;         // -Xp^{-T} X_{-p}^T, p x (N-p)
  double xp_cond_ = 1.0;
  mutable double hessian_bound_ = 0.0;
  mutable bool quad_ready_ = false;
  mutable Eigen::MatrixXd a_;
  mutable Eigen::VectorXd b_;
};

enum class PenaltyMode { lasso, adaptive };

struct PenaltySpec {
  double eta = 0.0;
  PenaltyMode mode = PenaltyMode::lasso;
  // One weight per penalized coordinate (N-p). +inf excludes a coordinate
  // permanently. Empty means all ones (plain lasso).
  Eigen::VectorXd weights;

  double weight(Eigen::Index i) const {
    return weights.size() == 0 ? 1.0 : weights(i);
  }
};

// w_i = 1 / |lambda_tilde_i| for i > p; |lambda_tilde_i| < 1e-12 maps to
// +inf (coordinate excluded).
Eigen::VectorXd adaptive_weights(const Eigen::VectorXd& lambda_tilde,
                                 Eigen::Index p);

// sign(v_i) * max(|v_i| - t_i, 0); exact zeros, t_i = +inf forces 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v,
                               const Eigen::VectorXd& t);

struct SolverOptions {
  // Cyclic coordinate descent on the reduced quadratic is the default: it
  // warm-starts well along an eta grid and each sweep costs one dense
  // matrix column pass. The proximal-gradient path (soft-thresholded
  // gradient steps) is kept for cross-checking.
  enum class Algorithm { coordinate, proximal };
  Algorithm algorithm = Algorithm::coordinate;

  // Proximal path only. Literal fixed step alpha; when
  // scale_step_by_hessian is set, the effective step is 1/hessian_bound()
  // with Nesterov acceleration, which is guaranteed descent.
  double alpha = 0.01;
  bool scale_step_by_hessian = true;
  bool accelerate = true;
  double eps = 1e-8;          // iterate-displacement tolerance
  int max_iter = 20000;       // proximal iterations or coordinate sweeps
  double kkt_tol = 1e-6;
};

struct PenalizedSolution {
  Eigen::VectorXd weights;        // full N-vector
  std::vector<int> active_set;    // indices with nonzero weight
  double eta = 0.0;
  double variance = 0.0;          // mse_of_weights at the solution
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

// Proximal gradient with (weighted) soft-thresholding on the reduced problem.
PenalizedSolution solve_penalized(const ReducedProblem& rp,
                                  const PenaltySpec& penalty,
                                  const Eigen::VectorXd& init,
                                  const SolverOptions& opts = {});

// Smallest eta at which the solution collapses to the p-neighbor endpoint:
// the largest weighted gradient magnitude at the endpoint.
double eta_max(const ReducedProblem& rp, const PenaltySpec& penalty);

// Warm-started solves along an ascending eta grid. `init` seeds the first
// solve (zeros when empty); each later solve starts from its predecessor.
std::vector<PenalizedSolution> solution_path(
    const ReducedProblem& rp, PenaltySpec penalty,
    const std::vector<double>& etas, const SolverOptions& opts = {},
    const Eigen::VectorXd& init = Eigen::VectorXd());

// KKT certificate for a converged solution; returns the worst violation
// (<= tol scaled means optimal).
double kkt_residual(const ReducedProblem& rp, const PenaltySpec& penalty,
                    const Eigen::VectorXd& lambda_minus_p);

}  // namespace krig
