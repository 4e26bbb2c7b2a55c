#include "krig/kriging.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace krig {

namespace {

double clamp_variance(double v) {
  if (v < 0.0) {
    if (v > -1e-10) return 0.0;
    std::cerr << "krig: negative kriging variance " << v << " clamped to 0\n";
    return 0.0;
  }
  return v;
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "singular covariance matrix (near-duplicate locations?)");
  return llt;
}

// s0 coincides with an observation and there is no nugget: the system is
// an exact interpolator there, provided e_i is feasible for the mean model.
std::optional<KrigingResult> exact_interpolation(const KrigingSystem& sys) {
  for (Eigen::Index i = 0; i < sys.n(); ++i) {
    if (std::abs(sys.c0(i) - sys.sigma0_sq) <=
            1e-14 * std::abs(sys.sigma0_sq) &&
        (sys.X.row(i).transpose() - sys.x0).lpNorm<Eigen::Infinity>() == 0.0) {
      KrigingResult r;
      r.weights = Eigen::VectorXd::Zero(sys.n());
      r.weights(i) = 1.0;
      r.prediction = sys.Z(i);
      r.variance = 0.0;
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace

KrigingSystem make_ok_system(const LocationSet& locs,
                             const CovarianceModel& model, const Point& s0,
                             const Eigen::VectorXd& Z,
                             const std::vector<int>& order) {
  std::vector<int> idx = order;
  if (idx.empty()) {
    idx.resize(locs.size());
    for (std::size_t i = 0; i < locs.size(); ++i) idx[i] = static_cast<int>(i);
  }
  std::vector<Point> pts;
  pts.reserve(idx.size());
  Eigen::VectorXd z(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    pts.push_back(locs[static_cast<std::size_t>(idx[i])]);
    z(static_cast<Eigen::Index>(i)) = Z(idx[i]);
  }
  LocationSet sub(std::move(pts), locs.metric());

  KrigingSystem sys;
  sys.sigma = build_sigma(sub, model);
  const auto sc = build_c0(sub, s0, model);
  sys.c0 = sc.c0;
  sys.sigma0_sq = sc.sigma0_sq;
  sys.X = Eigen::MatrixXd::Ones(sys.sigma.rows(), 1);
  sys.x0 = Eigen::VectorXd::Ones(1);
  sys.Z = z;
  return sys;
}

double mse_of_weights(const Eigen::VectorXd& lambda,
                      const KrigingSystem& sys) {
  if (lambda.size() != sys.n())
    throw std::invalid_argument("mse_of_weights: dimension mismatch");
  return lambda.dot(sys.sigma * lambda) - 2.0 * lambda.dot(sys.c0) +
         sys.sigma0_sq;
}

KrigingResult simple_kriging(const KrigingSystem& sys) {
  if (!sys.mu || !sys.mu0)
    throw std::invalid_argument("simple kriging needs a known mean");
  const auto llt = factorize(sys.sigma);
  KrigingResult r;
  r.weights = llt.solve(sys.c0);
  r.intercept = *sys.mu0 - r.weights.dot(*sys.mu);
  r.prediction = *sys.mu0 + r.weights.dot(sys.Z - *sys.mu);
  r.variance = clamp_variance(sys.sigma0_sq - sys.c0.dot(r.weights));
  return r;
}

KrigingResult universal_kriging(const KrigingSystem& sys) {
  if (auto r = exact_interpolation(sys)) return *r;
  const auto llt = factorize(sys.sigma);
  const Eigen::MatrixXd A = llt.solve(sys.X);      // Sigma^{-1} X
  const Eigen::MatrixXd M = sys.X.transpose() * A; // X' Sigma^{-1} X
  const Eigen::FullPivLU<Eigen::MatrixXd> mlu(M);
  if (!mlu.isInvertible())
    throw std::runtime_error("rank-deficient design matrix");

  const Eigen::VectorXd d = sys.x0 - A.transpose() * sys.c0;
  const Eigen::VectorXd y = mlu.solve(d);
  KrigingResult r;
  r.weights = llt.solve(sys.c0 + sys.X * y);
  r.beta_hat = mlu.solve(A.transpose() * sys.Z);
  r.prediction = r.weights.dot(sys.Z);
  r.variance = clamp_variance(sys.sigma0_sq -
                              sys.c0.dot(llt.solve(sys.c0)) + d.dot(y));
  return r;
}

KrigingResult ordinary_kriging(const KrigingSystem& sys) {
  if (sys.p() != 1 || (sys.X.array() != 1.0).any())
    throw std::invalid_argument("ordinary kriging requires X = 1_N");
  return universal_kriging(sys);
}

KrigingResult subset_kriging(const KrigingSystem& sys,
                             const std::vector<int>& subset) {
  if (subset.size() < static_cast<std::size_t>(sys.p()))
    throw std::invalid_argument("subset kriging: fewer rows than p");
  if (subset.size() > static_cast<std::size_t>(sys.n()))
    throw std::invalid_argument("subset kriging: more rows than N");

  const std::vector<int>& idx = subset;
  const auto k = static_cast<Eigen::Index>(subset.size());

  KrigingSystem sub;
  sub.sigma.resize(k, k);
  sub.c0.resize(k);
  sub.X.resize(k, sys.p());
  sub.Z.resize(k);
  sub.x0 = sys.x0;
  sub.sigma0_sq = sys.sigma0_sq;
  for (Eigen::Index a = 0; a < k; ++a) {
    sub.c0(a) = sys.c0(idx[static_cast<std::size_t>(a)]);
    sub.X.row(a) = sys.X.row(idx[static_cast<std::size_t>(a)]);
    sub.Z(a) = sys.Z(idx[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < k; ++b)
      sub.sigma(a, b) = sys.sigma(idx[static_cast<std::size_t>(a)],
                                  idx[static_cast<std::size_t>(b)]);
  }
  if (sys.mu && sys.mu0) {
    Eigen::VectorXd mu(k);
    for (Eigen::Index a = 0; a < k; ++a)
      mu(a) = (*sys.mu)(idx[static_cast<std::size_t>(a)]);
    sub.mu = mu;
    sub.mu0 = sys.mu0;
  }

  KrigingResult local = universal_kriging(sub);
  KrigingResult r = local;
  r.weights = Eigen::VectorXd::Zero(sys.n());
  for (Eigen::Index a = 0; a < k; ++a)
    r.weights(idx[static_cast<std::size_t>(a)]) = local.weights(a);
  return r;
}

KrigingResult local_kriging(const KrigingSystem& sys,
                            const NeighborOrdering& ordering, std::size_t K) {
  if (K > ordering.permutation.size())
    throw std::invalid_argument("local kriging: K > ordering size");
  return subset_kriging(
      sys, std::vector<int>(ordering.permutation.begin(),
                            ordering.permutation.begin() +
                                static_cast<long>(K)));
}

}  // namespace krig
