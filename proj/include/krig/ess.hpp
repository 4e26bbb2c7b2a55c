#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "krig/penalized.hpp"

namespace krig {

struct EssReport {
  int k = 0;          // active count
  double n_ess = 0.0; // effective sample size, in [1, k]
  double redundancy = 0.0;  // k - n_ess
  bool clamped = false;     // n_ess > k from negative correlations
};

// n_ess = k^2 / sum of R over the active subset.
EssReport ess(const Eigen::MatrixXd& R, const std::vector<int>& active);

// Harmonic mean 2sv/(s+v); 0 when s + v = 0.
double harmonic_score(double s, double v);

struct EtaRecord {
  double eta = 0.0;
  int nnz = 0;
  double n_ess = 0.0;
  double sparsity = 0.0;   // s_eta
  double variance_ratio = 0.0;  // v_eta
  double score = 0.0;
  double variance = 0.0;   // sigma^2_eta
};

struct EtaTrace {
  std::vector<EtaRecord> records;  // ascending eta
  double sigma_ref_low = 0.0;   // variance at eta_min (proxy for global)
  double sigma_ref_high = 0.0;  // variance at the p-neighbor endpoint
  double n_ess_base = 0.0;      // ESS of the full candidate set
  int evaluations = 0;          // grid points evaluated (budget contract)
  bool degenerate = false;

  std::string to_csv() const;  // columns: eta,nnz,n_ess,s,v,score
};

struct EtaSearchConfig {
  int coarse_points = 150;     // kappa_0
  int refine_candidates = 5;
  int refine_points = 10;      // kappa_1, per candidate
  double eta_min_factor = 1e-9;  // eta_min = factor * eta_max
  SolverOptions solver;
};

struct EtaSelection {
  double eta_star = 0.0;
  PenalizedSolution solution;
  EtaTrace trace;
};

// Two-stage log-grid search maximizing the harmonic mean of the normalized
// redundancy and variance measures. Exactly kappa_0 + 5 kappa_1 grid points
// are evaluated (duplicate eta values reuse cached solves).
EtaSelection select_eta(const ReducedProblem& rp, const Eigen::MatrixXd& R,
                        PenaltyMode mode, const Eigen::VectorXd& weights,
                        const EtaSearchConfig& cfg = {});

// Normalized redundancy s_eta given trace context; throws on r0 == 0.
double sparsity_measure(double nnz, double n_ess_eta, double n_base,
                        double n_ess_base);

// Normalized variance v_eta clamped to [0,1]; throws when the reference
// interval is degenerate.
double variance_measure(double var_eta, double var_low, double var_high);

}  // namespace krig
