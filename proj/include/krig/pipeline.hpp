#pragma once

#include <string>
#include <vector>

#include "krig/dataset.hpp"
#include "krig/ess.hpp"
#include "krig/simulation.hpp"
#include "krig/variogram.hpp"

namespace krig {

enum class PredictMethod { gk, lk, pk_lasso, pk_adaptive };
PredictMethod predict_method_from_name(const std::string& name);
std::string predict_method_name(PredictMethod m);

struct PredictOptions {
  PredictMethod method = PredictMethod::pk_adaptive;
  // Candidate screen: 0 disables (all observations are candidates). The
  // default resolves to off for N <= 2000 and K = 300 above.
  int knn_cap = -1;
  int lk_neighbors = 0;        // lk only; 0 means match-pk
  double forced_eta = -1.0;    // >= 0 pins eta instead of searching (pk)
  EtaSearchConfig search;
  int workers = 0;             // 0: KRIG_WORKERS env or hardware default
};

struct PredictionRow {
  Point site;
  double prediction = 0.0;
  double variance = 0.0;
  int nnz = 0;
  double eta_star = 0.0;
  double seconds = 0.0;
  std::string error;  // empty on success
};

struct PredictionOutput {
  std::vector<PredictionRow> rows;
  std::string to_csv() const;
};

PredictionOutput predict_command(const Dataset& ds,
                                 const CovarianceModel& model,
                                 const std::vector<Point>& grid,
                                 const PredictOptions& opts);

struct FitOptions {
  VariogramTemplate tmpl;
  int n_bins = 15;
  double max_lag = 0.0;  // 0: half the max pairwise distance
};

struct FitOutput {
  VariogramFit fit;
  EmpiricalVariogram variogram;
};

FitOutput fit_command(const Dataset& ds, const FitOptions& opts);

// ESS of a whole dataset under a model (the full-data redundancy report).
EssReport dataset_ess(const Dataset& ds, const CovarianceModel& model);

// Eta trace at a single site, for diagnostic plots.
EtaTrace trace_eta(const Dataset& ds, const CovarianceModel& model,
                   const Point& s0, PenaltyMode mode,
                   const EtaSearchConfig& cfg, int knn_cap = 0);

// Reproducibility manifest (inputs, seeds, version) as a JSON document.
std::string run_manifest(const std::string& command,
                         const std::vector<std::pair<std::string,
                                                     std::string>>& fields);

int worker_count(int requested);

}  // namespace krig
