#include "krig/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

namespace krig {

std::string EmpiricalVariogram::to_csv() const {
  std::string out = "h,gamma_hat,n_pairs\n";
  char buf[96];
  for (std::size_t i = 0; i < bin_centers.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%ld\n", bin_centers[i],
                  gamma_hat[i], pair_counts[i]);
    out += buf;
  }
  return out;
}

EmpiricalVariogram empirical_variogram(const LocationSet& locs,
                                       const Eigen::VectorXd& Z, int n_bins,
                                       double max_lag) {
  const std::size_t n = locs.size();
  if (n < 2) throw std::invalid_argument("empirical_variogram: N < 2");
  if (n_bins < 1) throw std::invalid_argument("empirical_variogram: n_bins");
  if (Z.size() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("empirical_variogram: Z length mismatch");

  if (max_lag <= 0.0) {
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        dmax = std::max(dmax, locs.dist(i, j));
    max_lag = 0.5 * dmax;
  }

  std::vector<double> sums(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<long> counts(static_cast<std::size_t>(n_bins), 0);
  const double width = max_lag / n_bins;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double h = locs.dist(i, j);
      if (h <= 0.0 || h > max_lag) continue;
      auto b = static_cast<std::size_t>(std::min<long>(
          static_cast<long>(h / width), n_bins - 1));
      const double dz = Z(static_cast<Eigen::Index>(i)) -
                        Z(static_cast<Eigen::Index>(j));
      sums[b] += dz * dz;
      ++counts[b];
    }
  }

  EmpiricalVariogram out;
  out.max_lag = max_lag;
  out.n_bins = n_bins;
  for (int b = 0; b < n_bins; ++b) {
    const auto bi = static_cast<std::size_t>(b);
    if (counts[bi] == 0) continue;  // empty bins dropped
    out.bin_centers.push_back((b + 0.5) * width);
    out.gamma_hat.push_back(sums[bi] / (2.0 * static_cast<double>(counts[bi])));
    out.pair_counts.push_back(counts[bi]);
  }
  if (out.bin_centers.empty())
    throw std::runtime_error("empirical_variogram: no pairs within max_lag");
  return out;
}

double model_variogram(const CovarianceModel& model, double h) {
  if (h < 0.0) throw std::invalid_argument("model_variogram: negative lag");
  if (h == 0.0) return 0.0;
  double g = model.nugget;
  for (const auto& c : model.components)
    g += c.sill * (1.0 - correlation(c.family, h));
  return g;
}

namespace {

// Nelder-Mead with standard coefficients on an unconstrained vector.
struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, double scale,
                             int max_iter, double ftol, double fatol = 0.0) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<std::size_t> ord(n + 1);
    for (std::size_t i = 0; i <= n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t lo = ord[0], hi = ord[n], nhi = ord[n - 1];

    if (std::abs(fv[hi] - fv[lo]) <=
        std::max(fatol,
                 ftol * (std::abs(fv[lo]) + std::abs(fv[hi]) + 1e-30))) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / n;
    }
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k)
        p[k] = centroid[k] + t * (simplex[hi][k] - centroid[k]);
      return p;
    };

    auto refl = blend(-1.0);
    const double fr = f(refl);
    if (fr < fv[lo]) {
      auto exp_ = blend(-2.0);
      const double fe = f(exp_);
      if (fe < fr) {
        simplex[hi] = exp_;
        fv[hi] = fe;
      } else {
        simplex[hi] = refl;
        fv[hi] = fr;
      }
    } else if (fr < fv[nhi]) {
      simplex[hi] = refl;
      fv[hi] = fr;
    } else {
      auto con = blend(fr < fv[hi] ? -0.5 : 0.5);
      const double fc = f(con);
      if (fc < std::min(fr, fv[hi])) {
        simplex[hi] = con;
        fv[hi] = fc;
      } else {  // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < n; ++k)
            simplex[i][k] = simplex[lo][k] + 0.5 * (simplex[i][k] - simplex[lo][k]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = simplex[best];
  res.f = fv[best];
  res.iterations = it;
  return res;
}

CovarianceModel model_from_log_params(const VariogramTemplate& tmpl,
                                      const std::vector<double>& lp) {
  CovarianceModel m;
  std::size_t k = 0;
  for (const auto& c : tmpl.components) {
    CovarianceModel::Component comp;
    comp.sill = std::exp(lp[k++]);
    comp.family = {c.kind, std::exp(lp[k++]), c.nu};
    m.components.push_back(comp);
  }
  m.nugget = tmpl.fit_nugget ? std::exp(lp[k++]) : 0.0;
  return m;
}

}  // namespace

VariogramFit wls_fit(const EmpiricalVariogram& emp,
                     const VariogramTemplate& tmpl,
                     const std::vector<double>& init, int n_starts,
                     unsigned seed) {
  const std::size_t n_params =
      2 * tmpl.components.size() + (tmpl.fit_nugget ? 1 : 0);
  if (tmpl.components.empty())
    throw std::invalid_argument("wls_fit: empty template");
  if (emp.bin_centers.size() < n_params)
    throw std::invalid_argument("wls_fit: fewer bins than parameters");

  auto objective_of = [&](const CovarianceModel& m) {
    double s = 0.0;
    for (std::size_t j = 0; j < emp.bin_centers.size(); ++j) {
      const double r = emp.gamma_hat[j] - model_variogram(m, emp.bin_centers[j]);
      s += static_cast<double>(emp.pair_counts[j]) * r * r;
    }
    return s;
  };
  // Soft barrier keeping ranges and sills identifiable: a spherical with a
  // range far beyond the last lag is indistinguishable from a linear trend
  // and lets the sill run off to infinity.
  const double gmax_b = *std::max_element(emp.gamma_hat.begin(),
                                          emp.gamma_hat.end());
  const double hmax_b = emp.bin_centers.back();
  double wsum = 0.0;
  for (long c : emp.pair_counts) wsum += static_cast<double>(c);
  const double barrier_w = wsum * gmax_b * gmax_b;
  auto f = [&](const std::vector<double>& lp) {
    double pen = 0.0;
    for (std::size_t i = 0; i < tmpl.components.size(); ++i) {
      const double ls = lp[2 * i];      // log sill
      const double lr = lp[2 * i + 1];  // log scale
      const double over_r = lr - std::log(2.0 * hmax_b);
      if (over_r > 0.0) pen += over_r * over_r;
      const double over_s = ls - std::log(10.0 * gmax_b);
      if (over_s > 0.0) pen += over_s * over_s;
    }
    return objective_of(model_from_log_params(tmpl, lp)) + barrier_w * pen;
  };

  // Heuristic center: split the top-bin semivariance across components,
  // stagger ranges across the lag axis.
  const double gmax = *std::max_element(emp.gamma_hat.begin(),
                                        emp.gamma_hat.end());
  const double hmax = emp.bin_centers.back();
  std::vector<double> center;
  const auto m = static_cast<double>(tmpl.components.size());
  for (std::size_t i = 0; i < tmpl.components.size(); ++i) {
    center.push_back(std::log(std::max(gmax / (m + 1.0), 1e-8)));
    center.push_back(std::log(hmax * (static_cast<double>(i) + 1.0) / (m + 1.0)));
  }
  if (tmpl.fit_nugget)
    center.push_back(std::log(std::max(gmax / (m + 1.0) * 0.2, 1e-8)));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.5, 1.5);

  VariogramFit best;
  best.objective = std::numeric_limits<double>::max();
  for (int s = 0; s < n_starts; ++s) {
    std::vector<double> x0;
    if (s == 0 && !init.empty()) {
      if (init.size() != n_params)
        throw std::invalid_argument("wls_fit: init length mismatch");
      for (double v : init) x0.push_back(std::log(std::max(v, 1e-12)));
    } else if (s == 0) {
      x0 = center;
    } else {
      x0 = center;
      for (auto& v : x0) v += jitter(rng);
    }
    // absolute floor: spreads far below the objective's natural scale are
    // noise once an exact fit (f -> 0) is reached
    auto r = nelder_mead(f, x0, 0.5, 4000, 1e-12, 1e-14 * barrier_w);
    if (r.f < best.objective) {
      best.objective = r.f;
      best.model = model_from_log_params(tmpl, r.x);
      best.converged = r.converged;
      best.iterations = r.iterations;
    }
  }
  return best;
}

}  // namespace krig
