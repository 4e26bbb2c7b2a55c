#include "krig/ess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace krig {

EssReport ess(const Eigen::MatrixXd& R, const std::vector<int>& active) {
  if (active.empty()) throw std::invalid_argument("ess: empty active set");
  const auto k = static_cast<double>(active.size());
  double total = 0.0;
  for (int i : active)
    for (int j : active) total += R(i, j);
  EssReport rep;
  rep.k = static_cast<int>(active.size());
  rep.n_ess = k * k / total;
  if (rep.n_ess > k) {  // negative correlations can push the sum below k
    rep.n_ess = k;
    rep.clamped = true;
  }
  rep.redundancy = k - rep.n_ess;
  return rep;
}

double harmonic_score(double s, double v) {
  if (s < 0.0 || v < 0.0)
    throw std::invalid_argument("harmonic_score: negative input");
  const double sum = s + v;
  return sum == 0.0 ? 0.0 : 2.0 * s * v / sum;
}

double sparsity_measure(double nnz, double n_ess_eta, double n_base,
                        double n_ess_base) {
  const double r0 = n_base - n_ess_base;
  if (r0 <= 1e-12)
    throw std::runtime_error(
        "degenerate redundancy: data effectively independent");
  return (nnz - n_ess_eta) / r0;
}

double variance_measure(double var_eta, double var_low, double var_high) {
  const double span = var_high - var_low;
  if (span <= 1e-12)
    throw std::runtime_error(
        "degenerate variance interval: endpoints coincide");
  double v = (var_eta - var_low) / span;
  if (v < 0.0 && v > -1e-9) v = 0.0;
  if (v > 1.0 && v < 1.0 + 1e-9) v = 1.0;
  return std::clamp(v, 0.0, 1.0);
}

std::string EtaTrace::to_csv() const {
  std::string out = "eta,nnz,n_ess,s,v,score\n";
  char buf[160];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.10g,%d,%.10g,%.10g,%.10g,%.10g\n",
                  r.eta, r.nnz, r.n_ess, r.sparsity, r.variance_ratio,
                  r.score);
    out += buf;
  }
  return out;
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(a + (b - a) * i / static_cast<double>(n - 1));
  return g;
}

}  // namespace

EtaSelection select_eta(const ReducedProblem& rp, const Eigen::MatrixXd& R,
                        PenaltyMode mode, const Eigen::VectorXd& weights,
                        const EtaSearchConfig& cfg) {
  const Eigen::Index n = rp.n();
  if (R.rows() != n || R.cols() != n)
    throw std::invalid_argument("select_eta: R must match the candidate set");

  PenaltySpec penalty;
  penalty.mode = mode;
  penalty.weights = weights;

  EtaSelection sel;
  EtaTrace& trace = sel.trace;

  std::vector<int> all(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] =
      static_cast<int>(i);
  trace.n_ess_base = ess(R, all).n_ess;
  trace.sigma_ref_high = mse_of_weights(rp.sparse_endpoint(), rp.system());

  const KrigingResult ok = universal_kriging(rp.system());
  const Eigen::VectorXd warm0 = ok.weights.tail(rp.free_dim());
  const double emax = eta_max(rp, penalty);

  auto degenerate_exit = [&](double eta) {
    penalty.eta = eta;
    trace.degenerate = true;
    sel.eta_star = eta;
    sel.solution = solve_penalized(rp, penalty, warm0, cfg.solver);
    return sel;
  };

  const double r0 = static_cast<double>(n) - trace.n_ess_base;
  if (emax <= 0.0 || r0 <= 1e-12) return degenerate_exit(0.0);

  const double emin = cfg.eta_min_factor * emax;

  // Solves cached by eta so overlapping refinement grids cost nothing extra;
  // the evaluation counter still ticks per requested grid point.
  std::map<double, PenalizedSolution> cache;
  auto solve_at = [&](double eta, const Eigen::VectorXd& warm) {
    ++trace.evaluations;
    auto it = cache.find(eta);
    if (it != cache.end()) return it->second;
    penalty.eta = eta;
    auto s = solve_penalized(rp, penalty, warm, cfg.solver);
    cache.emplace(eta, s);
    return s;
  };

  // Stage 1: coarse log grid, warm-started ascending from the exact solution.
  const auto grid1 = log_grid(emin, emax, cfg.coarse_points);
  std::vector<PenalizedSolution> stage1;
  Eigen::VectorXd warm = warm0;
  for (double eta : grid1) {
    stage1.push_back(solve_at(eta, warm));
    warm = stage1.back().weights.tail(rp.free_dim());
  }
  trace.sigma_ref_low = stage1.front().variance;

  if (trace.sigma_ref_high - trace.sigma_ref_low <= 1e-12)
    return degenerate_exit(emin);

  auto make_record = [&](const PenalizedSolution& s) {
    EtaRecord rec;
    rec.eta = s.eta;
    rec.nnz = static_cast<int>(s.active_set.size());
    rec.n_ess = ess(R, s.active_set).n_ess;
    rec.variance = s.variance;
    rec.sparsity = std::clamp(
        sparsity_measure(rec.nnz, rec.n_ess, static_cast<double>(n),
                         trace.n_ess_base),
        0.0, 1.0);
    rec.variance_ratio = variance_measure(s.variance, trace.sigma_ref_low,
                                          trace.sigma_ref_high);
    rec.score = harmonic_score(rec.sparsity, rec.variance_ratio);
    return rec;
  };

  std::vector<std::pair<EtaRecord, PenalizedSolution>> evaluated;
  for (const auto& s : stage1) evaluated.emplace_back(make_record(s), s);

  // Stage 2: local log grids around the top-scoring candidates.
  std::vector<std::size_t> order(evaluated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return evaluated[a].first.score > evaluated[b].first.score;
  });
  const std::size_t n_cand = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.refine_candidates), order.size());

  for (std::size_t c = 0; c < n_cand; ++c) {
    const auto& cand = evaluated[order[c]];
    const auto grid2 =
        log_grid(cand.first.eta / 2.0, cand.first.eta * 2.0,
                 cfg.refine_points);
    Eigen::VectorXd w2 = cand.second.weights.tail(rp.free_dim());
    for (double eta : grid2) {
      auto s = solve_at(eta, w2);
      w2 = s.weights.tail(rp.free_dim());
      evaluated.emplace_back(make_record(s), s);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < evaluated.size(); ++i)
    if (evaluated[i].first.score > evaluated[best].first.score) best = i;

  if (evaluated[best].first.score <= 0.0) {
    auto sel2 = degenerate_exit(emin);
    sel2.trace.evaluations = trace.evaluations;
    return sel2;
  }

  sel.eta_star = evaluated[best].first.eta;
  sel.solution = evaluated[best].second;

  std::sort(evaluated.begin(), evaluated.end(),
            [](const auto& a, const auto& b) {
              return a.first.eta < b.first.eta;
            });
  for (const auto& e : evaluated) trace.records.push_back(e.first);
  return sel;
}

}  // namespace krig
