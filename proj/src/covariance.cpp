#include "krig/covariance.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace krig {

std::string family_name(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::spherical: return "spherical";
    case Family::matern: return "matern";
  }
  throw std::logic_error("unreachable");
}

Family family_from_name(const std::string& name) {
  if (name == "exponential") return Family::exponential;
  if (name == "spherical") return Family::spherical;
  if (name == "matern") return Family::matern;
  throw std::invalid_argument("unknown correlation family: " + name);
}

namespace {

double matern_corr(double h, double phi, double nu) {
  if (h == 0.0) return 1.0;
  const double u = std::sqrt(2.0 * nu) * h / phi;
  // Half-integer closed forms cover the hot path; general nu goes through
  // the Bessel expression.
  if (nu == 0.5) return std::exp(-u);
  if (nu == 1.5) return (1.0 + u) * std::exp(-u);
  if (nu == 2.5) return (1.0 + u + u * u / 3.0) * std::exp(-u);
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(u, nu) *
         std::cyl_bessel_k(nu, u);
}

}  // namespace

double correlation(const CorrelationFamily& family, double h) {
  if (h < 0.0) throw std::invalid_argument("correlation: negative distance");
  if (family.scale <= 0.0)
    throw std::invalid_argument("correlation: scale must be positive");
  switch (family.kind) {
    case Family::exponential:
      return std::exp(-h / family.scale);
    case Family::spherical: {
      const double t = h / family.scale;
      if (t >= 1.0) return 0.0;
      return 1.0 - 1.5 * t + 0.5 * t * t * t;
    }
    case Family::matern:
      return matern_corr(h, family.scale, family.smoothness);
  }
  throw std::logic_error("unreachable");
}

double scale_from_practical_range(Family kind, double nu, double pr,
                                  double threshold) {
  if (pr <= 0.0) throw std::invalid_argument("practical range must be > 0");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("threshold must lie in (0,1)");
  if (kind == Family::exponential) return -pr / std::log(threshold);

  // rho(pr; phi) is increasing in phi, so bisect phi over a wide bracket.
  auto f = [&](double phi) {
    return correlation({kind, phi, nu}, pr) - threshold;
  };
  double lo = pr * 1e-6, hi = pr * 1e6;
  if (f(lo) > 0.0 || f(hi) < 0.0)
    throw std::runtime_error("practical-range root not bracketed");
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double practical_range(const CorrelationFamily& family, double threshold) {
  auto f = [&](double h) { return correlation(family, h) - threshold; };
  double lo = 0.0, hi = family.scale;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double CovarianceModel::total_sill() const {
  double s = nugget;
  for (const auto& c : components) s += c.sill;
  return s;
}

double CovarianceModel::cov(double h) const {
  if (h == 0.0) return total_sill();
  double s = 0.0;
  for (const auto& c : components) s += c.sill * correlation(c.family, h);
  return s;
}

double CovarianceModel::corr(double h) const {
  if (h == 0.0) return 1.0;
  return cov(h) / total_sill();
}

std::string CovarianceModel::to_json() const {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const auto& c : components) {
    nlohmann::json jc;
    jc["kind"] = family_name(c.family.kind);
    jc["sill"] = c.sill;
    jc["scale"] = c.family.scale;
    if (c.family.kind == Family::matern) jc["nu"] = c.family.smoothness;
    j["components"].push_back(jc);
  }
  j["nugget"] = nugget;
  return j.dump(2);
}

CovarianceModel CovarianceModel::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  CovarianceModel m;
  m.nugget = j.value("nugget", 0.0);
  if (m.nugget < 0.0) throw std::invalid_argument("nugget must be >= 0");
  for (const auto& jc : j.at("components")) {
    Component c;
    c.sill = jc.at("sill").get<double>();
    if (c.sill <= 0.0) throw std::invalid_argument("sill must be > 0");
    c.family.kind = family_from_name(jc.at("kind").get<std::string>());
    c.family.smoothness = jc.value("nu", 1.5);
    if (jc.contains("scale")) {
      c.family.scale = jc.at("scale").get<double>();
    } else if (jc.contains("practical_range")) {
      c.family.scale = scale_from_practical_range(
          c.family.kind, c.family.smoothness,
          jc.at("practical_range").get<double>());
    } else {
      throw std::invalid_argument("component needs scale or practical_range");
    }
    m.components.push_back(c);
  }
  if (m.total_sill() <= 0.0)
    throw std::invalid_argument("total sill must be > 0");
  return m;
}

Eigen::MatrixXd build_sigma(const LocationSet& locs,
                            const CovarianceModel& model) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  Eigen::MatrixXd sigma(n, n);
  const double sill = model.total_sill();
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i, i) = sill;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = model.cov(locs.dist(static_cast<std::size_t>(i),
                                           static_cast<std::size_t>(j)));
      sigma(i, j) = c;
      sigma(j, i) = c;
    }
  }
  return sigma;
}

SiteCovariance build_c0(const LocationSet& locs, const Point& s0,
                        const CovarianceModel& model) {
  const auto n = static_cast<Eigen::Index>(locs.size());
  SiteCovariance out;
  out.c0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = locs.dist_to(static_cast<std::size_t>(i), s0);
    out.c0(i) = h == 0.0 ? model.total_sill() - model.nugget : model.cov(h);
  }
  out.sigma0_sq = model.total_sill();
  return out;
}

Eigen::MatrixXd build_correlation_matrix(const LocationSet& locs,
                                         const CovarianceModel& model) {
  Eigen::MatrixXd r = build_sigma(locs, model) / model.total_sill();
  r.diagonal().setOnes();
  return r;
}

}  // namespace krig
