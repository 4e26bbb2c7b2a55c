#include "krig/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "krig/kriging.hpp"

namespace krig {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double CounterRng::uniform(std::uint64_t idx) const {
  const std::uint64_t bits = splitmix64(splitmix64(seed_) ^ idx);
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t idx) const {
  const double u1 = uniform(2 * idx);
  const double u2 = uniform(2 * idx + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd simulate_grf(const LocationSet& locs,
                             const CovarianceModel& model, std::uint64_t seed,
                             double mean) {
  if (model.total_sill() + model.nugget == 0.0)
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(locs.size()),
                                     mean);
  Eigen::MatrixXd sigma = build_sigma(locs, model);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  for (int attempt = 0; llt.info() != Eigen::Success; ++attempt) {
    if (attempt >= 3)
      throw std::runtime_error("simulate_grf: covariance not factorizable");
    sigma.diagonal().array() += 1e-10;
    llt.compute(sigma);
  }
  const CounterRng rng(seed);
  Eigen::VectorXd xi(sigma.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    xi(i) = rng.normal(static_cast<std::uint64_t>(i));
  return (llt.matrixL() * xi).eval().array() + mean;
}

std::string site_name(SiteLabel s) {
  switch (s) {
    case SiteLabel::FN: return "FN";
    case SiteLabel::AN: return "AN";
    case SiteLabel::DN: return "DN";
    case SiteLabel::SN: return "SN";
    case SiteLabel::CN: return "CN";
  }
  throw std::logic_error("unreachable");
}

SiteLabel site_from_name(const std::string& name) {
  if (name == "FN") return SiteLabel::FN;
  if (name == "AN") return SiteLabel::AN;
  if (name == "DN") return SiteLabel::DN;
  if (name == "SN") return SiteLabel::SN;
  if (name == "CN") return SiteLabel::CN;
  throw std::invalid_argument("unknown site label: " + name);
}

std::map<SiteLabel, PickedSite> pick_sites(const LocationSet& locs,
                                           int density_k) {
  const std::size_t n = locs.size();
  if (n < 2) throw std::invalid_argument("pick_sites: N < 2");
  const int k = std::min<int>(density_k, static_cast<int>(n) - 1);

  std::vector<double> nn_dist(n), kth_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(locs.dist(i, j));
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    kth_dist[i] = d[static_cast<std::size_t>(k - 1)];
    nn_dist[i] = *std::min_element(d.begin(), d.begin() + k);
  }
  const double mean_nn =
      std::accumulate(nn_dist.begin(), nn_dist.end(), 0.0) /
      static_cast<double>(n);

  int fn = 0, an = 0, dn = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (nn_dist[i] > nn_dist[static_cast<std::size_t>(fn)]) fn = static_cast<int>(i);
    if (std::abs(nn_dist[i] - mean_nn) <
        std::abs(nn_dist[static_cast<std::size_t>(an)] - mean_nn))
      an = static_cast<int>(i);
    if (kth_dist[i] < kth_dist[static_cast<std::size_t>(dn)]) dn = static_cast<int>(i);
  }

  std::map<SiteLabel, PickedSite> out;
  out[SiteLabel::FN] = {locs[static_cast<std::size_t>(fn)], fn};
  out[SiteLabel::AN] = {locs[static_cast<std::size_t>(an)], an};
  out[SiteLabel::DN] = {locs[static_cast<std::size_t>(dn)], dn};
  out[SiteLabel::SN] = {Point{0.0, 0.5}, -1};
  out[SiteLabel::CN] = {Point{0.0, 0.0}, -1};
  return out;
}

LocationSet uniform_locations(int n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<Point> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pts[static_cast<std::size_t>(i)] = {
        rng.uniform(2 * static_cast<std::uint64_t>(i)),
        rng.uniform(2 * static_cast<std::uint64_t>(i) + 1)};
  return LocationSet(std::move(pts), Metric::euclidean);
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg) {
  if (!std::is_sorted(cfg.pr_grid.begin(), cfg.pr_grid.end()))
    throw std::invalid_argument("run_sweep: pr_grid must be ascending");

  const LocationSet locs = uniform_locations(cfg.n_locations, cfg.seed);
  const auto sites = pick_sites(locs);

  std::vector<SweepRecord> records;
  for (std::size_t pr_i = 0; pr_i < cfg.pr_grid.size(); ++pr_i) {
    const double pr = cfg.pr_grid[pr_i];
    CovarianceModel model;
    model.components.push_back(
        {1.0, {cfg.family,
               scale_from_practical_range(cfg.family, cfg.matern_nu, pr),
               cfg.matern_nu}});
    const Eigen::VectorXd Z =
        simulate_grf(locs, model, cfg.seed + 1000 + pr_i);

    for (SiteLabel label : cfg.sites) {
      const PickedSite& site = sites.at(label);

      // Prediction targets that are observations leave the training set.
      std::vector<int> candidates;
      for (std::size_t i = 0; i < locs.size(); ++i)
        if (static_cast<int>(i) != site.location_index)
          candidates.push_back(static_cast<int>(i));

      std::vector<Point> pts;
      Eigen::VectorXd z(static_cast<Eigen::Index>(candidates.size()));
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        pts.push_back(locs[static_cast<std::size_t>(candidates[i])]);
        z(static_cast<Eigen::Index>(i)) = Z(candidates[i]);
      }
      LocationSet cand(std::move(pts), locs.metric());
      const auto ordering = order_by_distance(cand, site.point);
      const KrigingSystem sys =
          make_ok_system(cand, model, site.point, z, ordering.permutation);

      // The system rows are distance-ordered, so the sub-ordering is the
      // identity permutation.
      std::vector<Point> ordered_pts;
      for (int idx : ordering.permutation)
        ordered_pts.push_back(cand[static_cast<std::size_t>(idx)]);
      LocationSet ordered(std::move(ordered_pts), locs.metric());
      NeighborOrdering identity;
      identity.target = site.point;
      identity.permutation.resize(ordered.size());
      for (std::size_t i = 0; i < ordered.size(); ++i)
        identity.permutation[i] = static_cast<int>(i);
      identity.distances = ordering.distances;

      const Eigen::MatrixXd R = build_correlation_matrix(ordered, model);
      const ReducedProblem rp(sys, 1);

      Eigen::VectorXd weights;
      if (cfg.mode == PenaltyMode::adaptive)
        weights = adaptive_weights(universal_kriging(sys).weights, 1);

      const EtaSelection sel =
          select_eta(rp, R, cfg.mode, weights, cfg.search);

      SweepRecord rec;
      rec.family = cfg.family;
      rec.pr = pr;
      rec.site = label;
      rec.eta_star = sel.eta_star;
      rec.nnz_selected = static_cast<int>(sel.solution.active_set.size());
      // Post-selection refit: the penalty picks the neighborhood, the exact
      // kriging equations on that subset give the reported predictor.
      rec.var_pk = subset_kriging(sys, sel.solution.active_set).variance;
      rec.var_gk = ordinary_kriging(sys).variance;
      rec.var_lk = local_kriging(sys, identity,
                                 static_cast<std::size_t>(rec.nnz_selected))
                       .variance;
      rec.var_endpoint = mse_of_weights(rp.sparse_endpoint(), sys);
      records.push_back(rec);
    }
  }
  return records;
}

std::string sweep_to_csv(const std::vector<SweepRecord>& records) {
  std::string out =
      "family,pr,site,nnz,var_pk,var_lk,var_gk,eta_star,rel_pk_pct,"
      "rel_lk_pct\n";
  char buf[256];
  for (const auto& r : records) {
    const double rel_pk = 100.0 * (r.var_pk - r.var_gk) / r.var_gk;
    const double rel_lk = 100.0 * (r.var_lk - r.var_gk) / r.var_gk;
    std::snprintf(buf, sizeof(buf),
                  "%s,%.10g,%s,%d,%.10g,%.10g,%.10g,%.10g,%.6g,%.6g\n",
                  family_name(r.family).c_str(), r.pr,
                  site_name(r.site).c_str(), r.nnz_selected, r.var_pk,
                  r.var_lk, r.var_gk, r.eta_star, rel_pk, rel_lk);
    out += buf;
  }
  return out;
}

}  // namespace krig
