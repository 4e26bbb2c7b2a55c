#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "krig/covariance.hpp"
#include "krig/ess.hpp"

namespace krig {

// Counter-based deterministic generator: each (seed, index) pair maps to the
// same variate on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  double uniform(std::uint64_t idx) const;            // (0, 1)
  double normal(std::uint64_t idx) const;             // standard normal

 private:
  std::uint64_t seed_;
};

// Z = L xi + mean, with L the Cholesky factor of Sigma. Retries with a
// 1e-10 diagonal jitter (3 attempts) before failing.
Eigen::VectorXd simulate_grf(const LocationSet& locs,
                             const CovarianceModel& model, std::uint64_t seed,
                             double mean = 0.0);

enum class SiteLabel { FN, AN, DN, SN, CN };
std::string site_name(SiteLabel s);
SiteLabel site_from_name(const std::string& name);

struct PickedSite {
  Point point;
  int location_index = -1;  // >= 0 when the site is an observation location
};

// FN: largest nearest-neighbor distance; AN: NN distance closest to the
// mean; DN: smallest k-th NN distance (k = density_k); SN = (0, 0.5);
// CN = (0, 0). Ties break by original index.
std::map<SiteLabel, PickedSite> pick_sites(const LocationSet& locs,
                                           int density_k = 10);

struct ExperimentConfig {
  int n_locations = 500;
  Family family = Family::exponential;
  std::vector<double> pr_grid;  // ascending practical ranges
  double matern_nu = 1.5;
  std::uint64_t seed = 123;
  std::vector<SiteLabel> sites = {SiteLabel::FN, SiteLabel::AN, SiteLabel::DN,
                                  SiteLabel::SN, SiteLabel::CN};
  PenaltyMode mode = PenaltyMode::adaptive;
  EtaSearchConfig search;
};

struct SweepRecord {
  Family family;
  double pr = 0.0;
  SiteLabel site;
  int nnz_selected = 0;
  double var_pk = 0.0;
  double var_lk = 0.0;
  double var_gk = 0.0;
  double var_endpoint = 0.0;  // p-neighbor endpoint variance
  double eta_star = 0.0;
};

// Uniform locations on the unit square from the config seed.
LocationSet uniform_locations(int n, std::uint64_t seed);

// Per (PR, site): selects eta via ESS, then runs local kriging with the
// same neighbor count and global kriging on all candidates.
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg);

std::string sweep_to_csv(const std::vector<SweepRecord>& records);

}  // namespace krig
