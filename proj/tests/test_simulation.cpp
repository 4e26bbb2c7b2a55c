#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "krig/simulation.hpp"

using namespace krig;

TEST_CASE("counter RNG is deterministic and seed-sensitive") {
  const CounterRng a(42), b(42), c(43);
  for (std::uint64_t i = 0; i < 100; ++i) {
    CHECK(a.uniform(i) == b.uniform(i));
    CHECK(a.normal(i) == b.normal(i));
    CHECK(a.uniform(i) != c.uniform(i));
    CHECK(a.uniform(i) > 0.0);
    CHECK(a.uniform(i) < 1.0);
  }
}

TEST_CASE("counter RNG normals have the expected moments") {
  const CounterRng rng(7);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(static_cast<std::uint64_t>(i));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("GRF simulation: determinism and degenerate model") {
  const auto locs = uniform_locations(50, 11);
  CovarianceModel m;
  m.components.push_back({1.5, {Family::exponential, 0.2, 1.5}});

  const Eigen::VectorXd a = simulate_grf(locs, m, 99);
  const Eigen::VectorXd b = simulate_grf(locs, m, 99);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
  const Eigen::VectorXd c = simulate_grf(locs, m, 100);
  CHECK((a - c).lpNorm<Eigen::Infinity>() > 0.0);

  CovarianceModel zero;  // no components, no nugget
  const Eigen::VectorXd z = simulate_grf(locs, zero, 1, 3.5);
  CHECK((z.array() == 3.5).all());
}

TEST_CASE("GRF Monte-Carlo covariance matches the model") {
  // oracle: sample covariance over replicates against Sigma entries
  // clustered points keep all Sigma entries large, so the 5% relative
  // tolerance stays well above the Monte-Carlo noise floor
  std::vector<Point> pts = {
      {0.50, 0.50}, {0.52, 0.50}, {0.50, 0.53}, {0.48, 0.49}, {0.51, 0.47}};
  const LocationSet locs(pts, Metric::euclidean);
  CovarianceModel m;
  m.components.push_back({2.0, {Family::exponential, 0.3, 1.5}});
  const Eigen::MatrixXd sigma = build_sigma(locs, m);

  const int reps = 2000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 5);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    draws.push_back(
        simulate_grf(locs, m, 123456 + static_cast<std::uint64_t>(r)));
    mean += draws.back();
  }
  mean /= reps;
  for (const auto& d : draws) sum += (d - mean) * (d - mean).transpose();
  const Eigen::MatrixXd sample = sum / (reps - 1);

  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      CHECK(sample(i, j) == doctest::Approx(sigma(i, j)).epsilon(0.05));
}

TEST_CASE("uniform locations are deterministic and inside the unit square") {
  const auto a = uniform_locations(200, 3);
  const auto b = uniform_locations(200, 3);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].x >= 0.0);
    CHECK(a[i].x <= 1.0);
    CHECK(a[i].y >= 0.0);
    CHECK(a[i].y <= 1.0);
  }
}

TEST_CASE("pick_sites: constants, ties, and brute-force oracle") {
  // four corners: all NN distances equal, FN tie breaks to index 0
  std::vector<Point> corners = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  auto sites = pick_sites(LocationSet(corners, Metric::euclidean), 2);
  CHECK(sites.at(SiteLabel::FN).location_index == 0);
  CHECK(sites.at(SiteLabel::AN).location_index == 0);
  CHECK(sites.at(SiteLabel::SN).point.x == 0.0);
  CHECK(sites.at(SiteLabel::SN).point.y == 0.5);
  CHECK(sites.at(SiteLabel::CN).point.x == 0.0);
  CHECK(sites.at(SiteLabel::CN).point.y == 0.0);
  CHECK(sites.at(SiteLabel::SN).location_index == -1);

  // random cloud: validate FN/AN/DN by exhaustive scan
  const auto locs = uniform_locations(150, 17);
  const int density_k = 10;
  sites = pick_sites(locs, density_k);

  std::vector<double> nn(150), kth(150);
  for (std::size_t i = 0; i < 150; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < 150; ++j)
      if (j != i) d.push_back(locs.dist(i, j));
    std::sort(d.begin(), d.end());
    nn[i] = d[0];
    kth[i] = d[density_k - 1];
  }
  double mean_nn = 0.0;
  for (double v : nn) mean_nn += v;
  mean_nn /= 150.0;

  int fn = 0, an = 0, dn = 0;
  for (int i = 1; i < 150; ++i) {
    if (nn[static_cast<std::size_t>(i)] > nn[static_cast<std::size_t>(fn)]) fn = i;
    if (std::abs(nn[static_cast<std::size_t>(i)] - mean_nn) <
        std::abs(nn[static_cast<std::size_t>(an)] - mean_nn))
      an = i;
    if (kth[static_cast<std::size_t>(i)] < kth[static_cast<std::size_t>(dn)]) dn = i;
  }
  CHECK(sites.at(SiteLabel::FN).location_index == fn);
  CHECK(sites.at(SiteLabel::AN).location_index == an);
  CHECK(sites.at(SiteLabel::DN).location_index == dn);

  CHECK_THROWS_AS(pick_sites(LocationSet({{0, 0}}, Metric::euclidean), 10),
                  std::invalid_argument);
}

TEST_CASE("run_sweep: single-cell records are consistent and deterministic") {
  ExperimentConfig cfg;
  cfg.n_locations = 120;
  cfg.pr_grid = {0.1, 0.3};
  cfg.sites = {SiteLabel::AN, SiteLabel::CN};
  cfg.seed = 4;

  const auto recs = run_sweep(cfg);
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) {
    CHECK(r.var_gk <= r.var_pk + 1e-10);   // global optimality
    CHECK(r.var_gk <= r.var_lk + 1e-10);
    CHECK(r.var_pk <= r.var_endpoint + 1e-10);
    CHECK(r.nnz_selected >= 1);
    CHECK(r.nnz_selected <= cfg.n_locations);
    CHECK(r.eta_star >= 0.0);
  }
  // deterministic under an identical config
  const auto again = run_sweep(cfg);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].var_pk == again[i].var_pk);
    CHECK(recs[i].nnz_selected == again[i].nnz_selected);
    CHECK(recs[i].eta_star == again[i].eta_star);
  }

  const std::string csv = sweep_to_csv(recs);
  CHECK(csv.rfind("family,pr,site,nnz,var_pk,var_lk,var_gk,eta_star,"
                  "rel_pk_pct,rel_lk_pct\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  ExperimentConfig bad = cfg;
  bad.pr_grid = {0.3, 0.1};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);
}

TEST_CASE("site labels round-trip through their names") {
  for (auto s : {SiteLabel::FN, SiteLabel::AN, SiteLabel::DN, SiteLabel::SN,
                 SiteLabel::CN})
    CHECK(site_from_name(site_name(s)) == s);
  CHECK_THROWS_AS(site_from_name("XX"), std::invalid_argument);
}
