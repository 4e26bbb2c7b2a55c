#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "krig/variogram.hpp"

using namespace krig;

namespace {

LocationSet random_locs(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return LocationSet(pts, Metric::euclidean);
}

}  // namespace

TEST_CASE("empirical variogram matches a hand-rolled estimator") {
  const auto locs = random_locs(40, 2);
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd Z(40);
  for (int i = 0; i < 40; ++i) Z(i) = g(rng);

  const int n_bins = 6;
  const double max_lag = 0.5;
  const auto emp = empirical_variogram(locs, Z, n_bins, max_lag);

  // oracle: direct double loop with the same equal-width binning
  std::vector<double> acc(n_bins, 0.0), hsum(n_bins, 0.0);
  std::vector<long> cnt(n_bins, 0);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = i + 1; j < 40; ++j) {
      const double h = locs.dist(i, j);
      if (h <= 0.0 || h > max_lag) continue;
      int b = static_cast<int>(h / (max_lag / n_bins));
      if (b == n_bins) b = n_bins - 1;
      const double d = Z(static_cast<Eigen::Index>(i)) -
                       Z(static_cast<Eigen::Index>(j));
      acc[static_cast<std::size_t>(b)] += 0.5 * d * d;
      hsum[static_cast<std::size_t>(b)] += h;
      ++cnt[static_cast<std::size_t>(b)];
    }
  std::size_t k = 0;
  for (int b = 0; b < n_bins; ++b) {
    if (cnt[static_cast<std::size_t>(b)] == 0) continue;
    REQUIRE(k < emp.gamma_hat.size());
    CHECK(emp.pair_counts[k] == cnt[static_cast<std::size_t>(b)]);
    CHECK(emp.gamma_hat[k] ==
          doctest::Approx(acc[static_cast<std::size_t>(b)] /
                          cnt[static_cast<std::size_t>(b)])
              .epsilon(1e-12));
    ++k;
  }
  CHECK(k == emp.gamma_hat.size());

  // centers ascending, estimator invariant under adding a constant to Z
  for (std::size_t i = 1; i < emp.bin_centers.size(); ++i)
    CHECK(emp.bin_centers[i] > emp.bin_centers[i - 1]);
  const auto shifted =
      empirical_variogram(locs, Z.array() + 42.0, n_bins, max_lag);
  for (std::size_t i = 0; i < emp.gamma_hat.size(); ++i)
    CHECK(shifted.gamma_hat[i] ==
          doctest::Approx(emp.gamma_hat[i]).epsilon(1e-12));
}

TEST_CASE("default max lag is half the maximum pairwise distance") {
  const auto locs = random_locs(30, 5);
  Eigen::VectorXd Z = Eigen::VectorXd::Zero(30);
  const auto emp = empirical_variogram(locs, Z, 10, 0.0);
  double dmax = 0.0;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = i + 1; j < 30; ++j)
      dmax = std::max(dmax, locs.dist(i, j));
  CHECK(emp.max_lag == doctest::Approx(dmax / 2.0).epsilon(1e-12));
}

TEST_CASE("model variogram is the covariance complement") {
  CovarianceModel m;
  m.components.push_back({50.0, {Family::spherical, 0.15, 1.5}});
  m.components.push_back({50.0, {Family::spherical, 0.65, 1.5}});
  m.nugget = 20.0;

  CHECK(model_variogram(m, 0.0) == 0.0);
  CHECK(model_variogram(m, 100.0) ==
        doctest::Approx(m.total_sill()).epsilon(1e-12));
  for (double h : {0.01, 0.15, 0.3, 0.6, 1.0}) {
    CHECK(model_variogram(m, h) ==
          doctest::Approx(m.total_sill() - m.cov(h)).epsilon(1e-12));
  }
  // direct evaluation at h = 0.15: the short component saturates there
  const double rho2 = correlation({Family::spherical, 0.65, 1.5}, 0.15);
  CHECK(model_variogram(m, 0.15) ==
        doctest::Approx(20.0 + 50.0 + 50.0 * (1.0 - rho2)).epsilon(1e-12));
}

TEST_CASE("WLS fit recovers a noise-free exponential variogram") {
  CovarianceModel truth;
  truth.components.push_back({2.0, {Family::exponential, 0.2, 1.5}});
  truth.nugget = 0.5;

  EmpiricalVariogram emp;
  emp.n_bins = 15;
  emp.max_lag = 1.0;
  for (int i = 1; i <= 15; ++i) {
    const double h = i / 15.0;
    emp.bin_centers.push_back(h);
    emp.gamma_hat.push_back(model_variogram(truth, h));
    emp.pair_counts.push_back(100);
  }

  VariogramTemplate tmpl;
  tmpl.components.push_back({Family::exponential, 1.5});
  const auto fit = wls_fit(emp, tmpl);
  CHECK(fit.converged);
  REQUIRE(fit.model.components.size() == 1);
  CHECK(fit.model.components[0].sill == doctest::Approx(2.0).epsilon(0.01));
  CHECK(fit.model.components[0].family.scale ==
        doctest::Approx(0.2).epsilon(0.01));
  CHECK(fit.model.nugget == doctest::Approx(0.5).epsilon(0.01));
  CHECK(fit.objective < 1e-6);
}

TEST_CASE("WLS fit on structureless data pushes variance into the nugget") {
  EmpiricalVariogram emp;
  emp.n_bins = 10;
  emp.max_lag = 1.0;
  for (int i = 1; i <= 10; ++i) {
    emp.bin_centers.push_back(i / 10.0);
    emp.gamma_hat.push_back(3.0);  // flat: pure noise
    emp.pair_counts.push_back(50);
  }
  VariogramTemplate tmpl;
  tmpl.components.push_back({Family::spherical, 1.5});
  const auto fit = wls_fit(emp, tmpl);
  // the total sill must absorb the flat level; a tiny-range component is
  // indistinguishable from a nugget on the observed bins, so only the
  // fitted curve is identifiable
  CHECK(fit.model.total_sill() == doctest::Approx(3.0).epsilon(0.05));
  for (double h : emp.bin_centers)
    CHECK(model_variogram(fit.model, h) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("WLS fit objective beats the seeded initial guess") {
  CovarianceModel truth;
  truth.components.push_back({1.0, {Family::spherical, 0.4, 1.5}});
  truth.nugget = 0.2;

  EmpiricalVariogram emp;
  emp.n_bins = 12;
  emp.max_lag = 0.9;
  std::mt19937 rng(9);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int i = 1; i <= 12; ++i) {
    const double h = 0.9 * i / 12.0;
    emp.bin_centers.push_back(h);
    emp.gamma_hat.push_back(model_variogram(truth, h) + noise(rng));
    emp.pair_counts.push_back(30 + i);
  }
  VariogramTemplate tmpl;
  tmpl.components.push_back({Family::spherical, 1.5});
  const std::vector<double> init = {0.5, 0.2, 0.1};

  auto objective_at = [&](const CovarianceModel& m) {
    double s = 0.0;
    for (std::size_t j = 0; j < emp.bin_centers.size(); ++j) {
      const double d =
          emp.gamma_hat[j] - model_variogram(m, emp.bin_centers[j]);
      s += static_cast<double>(emp.pair_counts[j]) * d * d;
    }
    return s;
  };

  const auto fit = wls_fit(emp, tmpl, init);
  CovarianceModel init_model;
  init_model.components.push_back({0.5, {Family::spherical, 0.2, 1.5}});
  init_model.nugget = 0.1;
  CHECK(fit.objective <= objective_at(init_model) + 1e-12);
  CHECK(fit.objective == doctest::Approx(objective_at(fit.model)).epsilon(1e-9));
}

TEST_CASE("variogram CSV export") {
  EmpiricalVariogram emp;
  emp.bin_centers = {0.1, 0.2};
  emp.gamma_hat = {1.5, 2.5};
  emp.pair_counts = {10, 20};
  const std::string csv = emp.to_csv();
  CHECK(csv.rfind("h,gamma_hat,n_pairs\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
