#pragma once

#include <Eigen/Dense>
#include <optional>

#include "krig/covariance.hpp"
#include "krig/geometry.hpp"

namespace krig {

// Assembled linear system for one prediction site. Rows follow the
// caller-supplied ordering (nearest first when built from a NeighborOrdering).
struct KrigingSystem {
  Eigen::MatrixXd sigma;   // N x N, SPD
  Eigen::VectorXd c0;      // N
  double sigma0_sq = 0.0;
  Eigen::MatrixXd X;       // N x p design matrix
  Eigen::VectorXd x0;      // p covariates at the site
  Eigen::VectorXd Z;       // N observations
  std::optional<Eigen::VectorXd> mu;  // known mean values (simple kriging)
  std::optional<double> mu0;          // known mean at the site

  Eigen::Index n() const { return sigma.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

// Convenience: assemble an ordinary-kriging system (X = 1_N) over a subset
// of locations given by `order` (all locations when empty).
KrigingSystem make_ok_system(const LocationSet& locs,
                             const CovarianceModel& model, const Point& s0,
                             const Eigen::VectorXd& Z,
                             const std::vector<int>& order = {});

struct KrigingResult {
  Eigen::VectorXd weights;  // full-length; zeros off the active subset
  double intercept = 0.0;
  double prediction = 0.0;
  double variance = 0.0;
  Eigen::VectorXd beta_hat;  // universal only
};

// lambda' Sigma lambda - 2 lambda' c0 + sigma0^2.
double mse_of_weights(const Eigen::VectorXd& lambda, const KrigingSystem& sys);

KrigingResult simple_kriging(const KrigingSystem& sys);
KrigingResult ordinary_kriging(const KrigingSystem& sys);
KrigingResult universal_kriging(const KrigingSystem& sys);

// Kriging on the K nearest neighbors of the ordering; the returned weight
// vector is full length with zeros elsewhere.
KrigingResult local_kriging(const KrigingSystem& sys,
                            const NeighborOrdering& ordering, std::size_t K);

// Kriging restricted to an explicit row subset (post-selection refit); the
// returned weight vector is full length with zeros off the subset.
KrigingResult subset_kriging(const KrigingSystem& sys,
                             const std::vector<int>& subset);

}  // namespace krig
