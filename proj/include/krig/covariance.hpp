#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "krig/geometry.hpp"

namespace krig {

enum class Family { exponential, spherical, matern };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Isotropic correlation component: rho(0) = 1, nonincreasing in h.
struct CorrelationFamily {
  Family kind = Family::exponential;
  double scale = 1.0;      // phi
  double smoothness = 1.5; // nu, matern only
};

double correlation(const CorrelationFamily& family, double h);

// Solves rho(PR; phi) = threshold for phi. Closed form for the exponential
// family, bracketed bisection to 1e-10 otherwise.
double scale_from_practical_range(Family kind, double nu, double pr,
                                  double threshold = 0.05);

// Distance at which the correlation decays to the threshold.
double practical_range(const CorrelationFamily& family,
                       double threshold = 0.05);

// Sum of sill-scaled correlation components plus a nugget on the diagonal.
struct CovarianceModel {
  struct Component {
    double sill = 1.0;  // partial sill sigma_i^2
    CorrelationFamily family;
  };
  std::vector<Component> components;
  double nugget = 0.0;  // tau^2

  double total_sill() const;
  // C(h) for h > 0 (no nugget); C(0) = total sill.
  double cov(double h) const;
  // C(h)/C(0) for h > 0; 1 at h = 0.
  double corr(double h) const;

  std::string to_json() const;
  static CovarianceModel from_json(const std::string& text);
};

// Sigma_ij = sum_k sill_k rho_k(h_ij) off-diagonal, total sill on diagonal.
Eigen::MatrixXd build_sigma(const LocationSet& locs,
                            const CovarianceModel& model);

struct SiteCovariance {
  Eigen::VectorXd c0;
  double sigma0_sq = 0.0;  // total sill (nugget included when tau^2 > 0)
};

// Cross-covariances to the prediction site. The nugget never enters c0
// (measurement error is site-local) but is part of sigma0_sq.
SiteCovariance build_c0(const LocationSet& locs, const Point& s0,
                        const CovarianceModel& model);

// R_ij = C(h_ij)/C(0) off-diagonal, unit diagonal.
Eigen::MatrixXd build_correlation_matrix(const LocationSet& locs,
                                         const CovarianceModel& model);

}  // namespace krig
