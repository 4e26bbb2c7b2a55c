#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "krig/covariance.hpp"

using namespace krig;

TEST_CASE("exponential correlation values") {
  CorrelationFamily f{Family::exponential, 0.75, 1.5};
  CHECK(correlation(f, 0.0) == 1.0);
  CHECK(correlation(f, 1.0) == doctest::Approx(std::exp(-4.0 / 3.0)).epsilon(1e-12));
  CHECK(correlation(f, 2.0) == doctest::Approx(std::exp(-8.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("spherical correlation: polynomial inside range, zero beyond") {
  CorrelationFamily f{Family::spherical, 2.0, 1.5};
  CHECK(correlation(f, 0.0) == 1.0);
  const double t = 0.5;  // h = 1, phi = 2
  CHECK(correlation(f, 1.0) ==
        doctest::Approx(1.0 - 1.5 * t + 0.5 * t * t * t).epsilon(1e-14));
  CHECK(correlation(f, 2.0) == doctest::Approx(0.0));
  CHECK(correlation(f, 5.0) == 0.0);
}

TEST_CASE("matern closed forms match the Bessel route") {
  // oracle: evaluate via std::cyl_bessel_k directly
  auto generic = [](double h, double phi, double nu) {
    if (h <= 0.0) return 1.0;
    const double u = std::sqrt(2.0 * nu) * h / phi;
    return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(u, nu) *
           std::cyl_bessel_k(nu, u);
  };
  for (double nu : {0.5, 1.5, 2.5}) {
    CorrelationFamily f{Family::matern, 0.4, nu};
    for (double h : {0.01, 0.1, 0.3, 1.0, 2.5}) {
      CHECK(correlation(f, h) ==
            doctest::Approx(generic(h, 0.4, nu)).epsilon(1e-9));
    }
  }
  // nu = 0.5 is the exponential family
  CorrelationFamily m{Family::matern, 0.3, 0.5};
  CorrelationFamily e{Family::exponential, 0.3 / std::sqrt(1.0), 0.5};
  for (double h : {0.05, 0.2, 0.7}) {
    CHECK(correlation(m, h) ==
          doctest::Approx(std::exp(-h / 0.3)).epsilon(1e-9));
  }
  // non-closed-form smoothness goes through the Bessel branch
  CorrelationFamily g{Family::matern, 0.4, 0.8};
  CHECK(correlation(g, 0.25) ==
        doctest::Approx(generic(0.25, 0.4, 0.8)).epsilon(1e-9));
}

TEST_CASE("correlations are nonincreasing in distance") {
  for (auto f : {CorrelationFamily{Family::exponential, 0.5, 1.5},
                 CorrelationFamily{Family::spherical, 1.2, 1.5},
                 CorrelationFamily{Family::matern, 0.7, 1.5},
                 CorrelationFamily{Family::matern, 0.7, 2.5}}) {
    double prev = correlation(f, 0.0);
    CHECK(prev == 1.0);
    for (double h = 0.02; h < 4.0; h += 0.02) {
      const double cur = correlation(f, h);
      CHECK(cur <= prev + 1e-12);
      CHECK(cur >= 0.0);
      prev = cur;
    }
  }
}

TEST_CASE("practical range round trip") {
  // exponential closed form: phi = -PR / ln(0.05)
  const double phi = scale_from_practical_range(Family::exponential, 1.5, 0.3);
  CHECK(phi == doctest::Approx(-0.3 / std::log(0.05)).epsilon(1e-12));
  for (auto kind : {Family::exponential, Family::spherical, Family::matern}) {
    for (double pr : {0.05, 0.2, 1.0}) {
      const double s = scale_from_practical_range(kind, 1.5, pr);
      CorrelationFamily f{kind, s, 1.5};
      if (kind == Family::spherical) {
        // spherical hits zero before 0.05; convention maps PR to the range
        CHECK(correlation(f, pr) <= 0.05 + 1e-9);
      } else {
        CHECK(correlation(f, pr) == doctest::Approx(0.05).epsilon(1e-6));
        CHECK(practical_range(f) == doctest::Approx(pr).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("model JSON round trip and practical_range input key") {
  CovarianceModel m;
  m.components.push_back({50.0, {Family::spherical, 0.15, 1.5}});
  m.components.push_back({50.0, {Family::spherical, 0.65, 1.5}});
  m.nugget = 20.0;
  const auto m2 = CovarianceModel::from_json(m.to_json());
  CHECK(m2.total_sill() == doctest::Approx(120.0));
  CHECK(m2.components[0].family.scale == doctest::Approx(0.15));
  CHECK(m2.nugget == doctest::Approx(20.0));

  const auto m3 = CovarianceModel::from_json(R"({
    "components": [{"kind": "exponential", "sill": 1.0,
                    "practical_range": 0.3}],
    "nugget": 0.0})");
  CHECK(m3.components[0].family.scale ==
        doctest::Approx(-0.3 / std::log(0.05)).epsilon(1e-10));
}

TEST_CASE("nugget decomposition in sigma and c0") {
  LocationSet locs({{0, 0}, {1, 0}, {0.2, 0.7}}, Metric::euclidean);
  CovarianceModel m;
  m.components.push_back({2.0, {Family::exponential, 0.5, 1.5}});
  m.nugget = 0.5;
  const auto S = build_sigma(locs, m);
  CHECK(S(0, 0) == doctest::Approx(2.5));  // total sill on the diagonal
  CHECK(S(0, 1) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const auto sc = build_c0(locs, {0.4, 0.1}, m);
  CHECK(sc.sigma0_sq == doctest::Approx(2.5));
  // nugget never enters the cross covariances
  for (int i = 0; i < 3; ++i) CHECK(sc.c0(i) < 2.0);

  // coincident site: c0 = sill without nugget
  const auto sc2 = build_c0(locs, {1, 0}, m);
  CHECK(sc2.c0(1) == doctest::Approx(2.0));
}

TEST_CASE("correlation matrix has unit diagonal and matches sigma") {
  LocationSet locs({{0, 0}, {0.3, 0.1}, {1, 1}, {0.8, 0.2}},
                   Metric::euclidean);
  CovarianceModel m;
  m.components.push_back({3.0, {Family::matern, 0.4, 1.5}});
  m.nugget = 1.0;
  const auto R = build_correlation_matrix(locs, m);
  const auto S = build_sigma(locs, m);
  for (int i = 0; i < 4; ++i) {
    CHECK(R(i, i) == 1.0);
    for (int j = 0; j < 4; ++j)
      if (i != j)
        CHECK(R(i, j) == doctest::Approx(S(i, j) / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("covariance matrices are positive definite on random layouts") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Point> pts;
  for (int i = 0; i < 80; ++i) pts.push_back({u(rng), u(rng)});
  LocationSet locs(pts, Metric::euclidean);
  for (auto kind : {Family::exponential, Family::spherical, Family::matern}) {
    CovarianceModel m;
    m.components.push_back(
        {1.0, {kind, scale_from_practical_range(kind, 1.5, 0.3), 1.5}});
    m.nugget = 0.01;
    const auto S = build_sigma(locs, m);
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    CHECK(llt.info() == Eigen::Success);
  }
}
