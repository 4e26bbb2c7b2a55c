#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "krig/covariance.hpp"

namespace krig {

struct EmpiricalVariogram {
  std::vector<double> bin_centers;   // ascending, empty bins dropped
  std::vector<double> gamma_hat;
  std::vector<long> pair_counts;
  double max_lag = 0.0;
  int n_bins = 0;

  std::string to_csv() const;  // columns: h,gamma_hat,n_pairs
};

// Method-of-moments estimator over equal-width distance bins on (0, max_lag].
// max_lag <= 0 defaults to half the maximum pairwise distance.
EmpiricalVariogram empirical_variogram(const LocationSet& locs,
                                       const Eigen::VectorXd& Z,
                                       int n_bins = 15, double max_lag = 0.0);

// gamma(h) = C(0) - C(h): nugget + sum sill_i (1 - rho_i(h)) for h > 0.
double model_variogram(const CovarianceModel& model, double h);

// Family layout of the model to fit; parameters are (sill, scale) per
// component plus the nugget.
struct VariogramTemplate {
  struct Component {
    Family kind = Family::spherical;
    double nu = 1.5;
  };
  std::vector<Component> components;
  bool fit_nugget = true;
};

struct VariogramFit {
  CovarianceModel model;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Weighted least squares (weights = pair counts) via Nelder-Mead on
// log-parameters with multi-start. `init` optionally seeds the first start
// as (sill_1, scale_1, ..., nugget).
VariogramFit wls_fit(const EmpiricalVariogram& emp,
                     const VariogramTemplate& tmpl,
                     const std::vector<double>& init = {},
                     int n_starts = 8, unsigned seed = 1);

}  // namespace krig
