#include "krig/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "krig/kriging.hpp"

namespace krig {

PredictMethod predict_method_from_name(const std::string& name) {
  if (name == "gk") return PredictMethod::gk;
  if (name == "lk") return PredictMethod::lk;
  if (name == "pk-lasso") return PredictMethod::pk_lasso;
  if (name == "pk-adaptive") return PredictMethod::pk_adaptive;
  throw std::invalid_argument("unknown method: " + name);
}

std::string predict_method_name(PredictMethod m) {
  switch (m) {
    case PredictMethod::gk: return "gk";
    case PredictMethod::lk: return "lk";
    case PredictMethod::pk_lasso: return "pk-lasso";
    case PredictMethod::pk_adaptive: return "pk-adaptive";
  }
  throw std::logic_error("unreachable");
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KRIG_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

struct SiteSystem {
  LocationSet ordered;   // candidates, nearest first
  KrigingSystem sys;
  NeighborOrdering identity;  // trivial ordering over the ordered rows
};

SiteSystem build_site_system(const LocationSet& locs, const Eigen::VectorXd& Z,
                             const CovarianceModel& model, const Point& s0,
                             int knn_cap) {
  std::vector<int> candidates;
  if (knn_cap > 0 && static_cast<std::size_t>(knn_cap) < locs.size()) {
    candidates = knn_candidates(locs, s0, static_cast<std::size_t>(knn_cap));
  } else {
    candidates.resize(locs.size());
    for (std::size_t i = 0; i < locs.size(); ++i)
      candidates[i] = static_cast<int>(i);
  }

  std::vector<Point> pts;
  Eigen::VectorXd z(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    pts.push_back(locs[static_cast<std::size_t>(candidates[i])]);
    z(static_cast<Eigen::Index>(i)) = Z(candidates[i]);
  }
  LocationSet cand(std::move(pts), locs.metric());
  const auto ordering = order_by_distance(cand, s0);

  std::vector<Point> ordered_pts;
  for (int idx : ordering.permutation)
    ordered_pts.push_back(cand[static_cast<std::size_t>(idx)]);

  SiteSystem out{LocationSet(std::move(ordered_pts), locs.metric()),
                 make_ok_system(cand, model, s0, z, ordering.permutation),
                 {}};
  out.identity.target = s0;
  out.identity.permutation.resize(out.ordered.size());
  for (std::size_t i = 0; i < out.ordered.size(); ++i)
    out.identity.permutation[i] = static_cast<int>(i);
  out.identity.distances = ordering.distances;
  return out;
}

PredictionRow predict_one(const LocationSet& locs, const Eigen::VectorXd& Z,
                          const CovarianceModel& model, const Point& s0,
                          const PredictOptions& opts, int knn_cap) {
  PredictionRow row;
  row.site = s0;
  const auto t0 = std::chrono::steady_clock::now();

  const SiteSystem ss = build_site_system(locs, Z, model, s0, knn_cap);
  const auto& sys = ss.sys;

  auto run_pk = [&](PenaltyMode mode) {
    const ReducedProblem rp(sys, 1);
    const Eigen::MatrixXd R = build_correlation_matrix(ss.ordered, model);
    Eigen::VectorXd weights;
    if (mode == PenaltyMode::adaptive)
      weights = adaptive_weights(universal_kriging(sys).weights, 1);
    if (opts.forced_eta >= 0.0) {
      PenaltySpec penalty{opts.forced_eta, mode, weights};
      const Eigen::VectorXd warm =
          universal_kriging(sys).weights.tail(rp.free_dim());
      EtaSelection sel;
      sel.eta_star = opts.forced_eta;
      sel.solution = solve_penalized(rp, penalty, warm, opts.search.solver);
      return sel;
    }
    return select_eta(rp, R, mode, weights, opts.search);
  };

  switch (opts.method) {
    case PredictMethod::gk: {
      const auto r = ordinary_kriging(sys);
      row.prediction = r.prediction;
      row.variance = r.variance;
      row.nnz = static_cast<int>(sys.n());
      break;
    }
    case PredictMethod::lk: {
      std::size_t k;
      if (opts.lk_neighbors > 0) {
        k = static_cast<std::size_t>(opts.lk_neighbors);
      } else {  // match-pk protocol
        const auto sel = run_pk(PenaltyMode::adaptive);
        k = sel.solution.active_set.size();
        row.eta_star = sel.eta_star;
      }
      const auto r = local_kriging(sys, ss.identity, k);
      row.prediction = r.prediction;
      row.variance = r.variance;
      row.nnz = static_cast<int>(k);
      break;
    }
    case PredictMethod::pk_lasso:
    case PredictMethod::pk_adaptive: {
      const auto sel = run_pk(opts.method == PredictMethod::pk_lasso
                                  ? PenaltyMode::lasso
                                  : PenaltyMode::adaptive);
      // Post-selection refit: the penalty chooses the neighborhood, the
      // exact kriging equations on that subset give the predictor.
      const auto r = subset_kriging(sys, sel.solution.active_set);
      row.prediction = r.prediction;
      row.variance = r.variance;
      row.nnz = static_cast<int>(sel.solution.active_set.size());
      row.eta_star = sel.eta_star;
      break;
    }
  }

  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

}  // namespace

std::string PredictionOutput::to_csv() const {
  std::string out = "x,y,prediction,variance,nnz,eta_star,seconds,error\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%d,%.10g,%.4g,%s\n",
                  r.site.x, r.site.y, r.prediction, r.variance, r.nnz,
                  r.eta_star, r.seconds, r.error.c_str());
    out += buf;
  }
  return out;
}

PredictionOutput predict_command(const Dataset& ds,
                                 const CovarianceModel& model,
                                 const std::vector<Point>& grid,
                                 const PredictOptions& opts) {
  const LocationSet locs = ds.locations();
  const int knn_cap =
      opts.knn_cap >= 0 ? opts.knn_cap : (ds.size() <= 2000 ? 0 : 300);

  PredictionOutput out;
  out.rows.resize(grid.size());

  const int workers =
      std::min<int>(worker_count(opts.workers),
                    std::max<int>(1, static_cast<int>(grid.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= grid.size()) return;
      try {
        out.rows[i] = predict_one(locs, ds.z, model, grid[i], opts, knn_cap);
      } catch (const std::exception& e) {
        out.rows[i].site = grid[i];
        out.rows[i].error = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

FitOutput fit_command(const Dataset& ds, const FitOptions& opts) {
  if (ds.size() == 0) throw std::runtime_error("fit: empty dataset");
  FitOutput out;
  out.variogram =
      empirical_variogram(ds.locations(), ds.z, opts.n_bins, opts.max_lag);
  out.fit = wls_fit(out.variogram, opts.tmpl);
  return out;
}

EssReport dataset_ess(const Dataset& ds, const CovarianceModel& model) {
  const Eigen::MatrixXd R = build_correlation_matrix(ds.locations(), model);
  std::vector<int> all(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) all[i] = static_cast<int>(i);
  return ess(R, all);
}

EtaTrace trace_eta(const Dataset& ds, const CovarianceModel& model,
                   const Point& s0, PenaltyMode mode,
                   const EtaSearchConfig& cfg, int knn_cap) {
  const LocationSet locs = ds.locations();
  const SiteSystem ss = build_site_system(locs, ds.z, model, s0, knn_cap);
  const ReducedProblem rp(ss.sys, 1);
  const Eigen::MatrixXd R = build_correlation_matrix(ss.ordered, model);
  Eigen::VectorXd weights;
  if (mode == PenaltyMode::adaptive)
    weights = adaptive_weights(universal_kriging(ss.sys).weights, 1);
  return select_eta(rp, R, mode, weights, cfg).trace;
}

std::string run_manifest(
    const std::string& command,
    const std::vector<std::pair<std::string, std::string>>& fields) {
  nlohmann::json j;
  j["tool"] = "sparsekrig";
  j["version"] = "0.1.0";
  j["command"] = command;
  for (const auto& [k, v] : fields) j["inputs"][k] = v;
  return j.dump(2);
}

}  // namespace krig
