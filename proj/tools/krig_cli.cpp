// krig: variogram fitting, kriging prediction, and the sparse-neighbor
// selection workflows on CSV inputs. See README for the column schemas.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "krig/pipeline.hpp"

namespace {

enum ExitCode { ok = 0, usage_error = 1, data_error = 2, numeric_error = 3 };

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

struct DataArgs {
  std::string path;
  std::string x_col = "x";
  std::string y_col = "y";
  std::string z_col = "z";
  std::string metric = "euclidean";
};

void add_data_args(CLI::App* cmd, DataArgs& a, bool need_z = true) {
  cmd->add_option("--data", a.path, "input CSV")->required();
  cmd->add_option("--x-col", a.x_col, "x (or lon) column name");
  cmd->add_option("--y-col", a.y_col, "y (or lat) column name");
  if (need_z) cmd->add_option("--z-col", a.z_col, "value column name");
  cmd->add_option("--metric", a.metric, "euclidean|chordal")
      ->check(CLI::IsMember({"euclidean", "chordal"}));
}

krig::Dataset load_data(const DataArgs& a) {
  krig::CsvSpec spec;
  spec.x_col = a.x_col;
  spec.y_col = a.y_col;
  spec.z_col = a.z_col;
  spec.metric =
      a.metric == "chordal" ? krig::Metric::chordal : krig::Metric::euclidean;
  auto ds = krig::load_csv(a.path, spec);
  if (ds.dropped_rows > 0)
    std::cerr << "warning: dropped " << ds.dropped_rows
              << " rows with missing values\n";
  return ds;
}

void emit_manifest(const std::string& manifest_path, const std::string& command,
                   std::vector<std::pair<std::string, std::string>> fields) {
  if (manifest_path.empty()) return;
  write_file(manifest_path, krig::run_manifest(command, fields) + "\n");
}

krig::EtaSearchConfig search_from(int coarse, int refine_c, int refine_p) {
  krig::EtaSearchConfig cfg;
  if (coarse > 0) cfg.coarse_points = coarse;
  if (refine_c > 0) cfg.refine_candidates = refine_c;
  if (refine_p > 0) cfg.refine_points = refine_p;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-neighbor kriging toolkit"};
  app.require_subcommand(1);

  // --- fit-variogram ---
  auto* fit = app.add_subcommand("fit-variogram",
                                 "empirical variogram + WLS model fit");
  DataArgs fit_data;
  add_data_args(fit, fit_data);
  std::string fit_components = "spherical";
  int fit_bins = 15;
  double fit_max_lag = 0.0;
  double fit_nu = 1.5;
  bool fit_no_nugget = false;
  std::string fit_model_out = "model.json";
  std::string fit_vg_out;
  std::string fit_manifest;
  fit->add_option("--components", fit_components,
                  "comma-separated families, e.g. spherical,spherical");
  fit->add_option("--bins", fit_bins, "number of distance bins");
  fit->add_option("--max-lag", fit_max_lag,
                  "max lag (0 = half max pairwise distance)");
  fit->add_option("--nu", fit_nu, "matern smoothness");
  fit->add_flag("--no-nugget", fit_no_nugget, "fit without a nugget term");
  fit->add_option("--model-out", fit_model_out, "output model JSON path");
  fit->add_option("--variogram-out", fit_vg_out, "empirical variogram CSV");
  fit->add_option("--manifest", fit_manifest, "manifest JSON path");

  // --- predict ---
  auto* pred = app.add_subcommand("predict", "kriging over a prediction grid");
  DataArgs pred_data;
  add_data_args(pred, pred_data);
  std::string pred_model, pred_method = "pk-adaptive", pred_out = "predictions.csv";
  std::string pred_manifest;
  int pred_nx = 50, pred_ny = 50;
  bool pred_hull = false;
  int pred_knn = -1, pred_lk_k = 0, pred_workers = 0;
  double pred_eta = -1.0;
  int pred_coarse = 0, pred_refc = 0, pred_refp = 0;
  pred->add_option("--model", pred_model, "model JSON path")->required();
  pred->add_option("--method", pred_method, "gk|lk|pk-lasso|pk-adaptive")
      ->check(CLI::IsMember({"gk", "lk", "pk-lasso", "pk-adaptive"}));
  pred->add_option("--nx", pred_nx, "grid columns");
  pred->add_option("--ny", pred_ny, "grid rows");
  pred->add_flag("--hull-filter", pred_hull,
                 "drop grid points outside the data convex hull");
  pred->add_option("--knn-cap", pred_knn,
                   "candidate screen (0 off; default: off for N<=2000, 300 above)");
  pred->add_option("--lk-neighbors", pred_lk_k,
                   "lk neighbor count (0 = match-pk)");
  pred->add_option("--eta", pred_eta, "pin eta instead of searching (pk)");
  pred->add_option("--workers", pred_workers, "worker threads (0 = auto)");
  pred->add_option("--coarse-points", pred_coarse, "eta search: coarse grid size");
  pred->add_option("--refine-candidates", pred_refc, "eta search: candidates kept");
  pred->add_option("--refine-points", pred_refp, "eta search: points per candidate");
  pred->add_option("--out", pred_out, "output CSV path");
  pred->add_option("--manifest", pred_manifest, "manifest JSON path");

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep",
                                   "simulation sweep over practical ranges");
  std::string sweep_config, sweep_out = "sweep.csv", sweep_manifest;
  sweep->add_option("--config", sweep_config, "sweep config JSON")->required();
  sweep->add_option("--out", sweep_out, "output CSV path");
  sweep->add_option("--manifest", sweep_manifest, "manifest JSON path");

  // --- ess ---
  auto* essc = app.add_subcommand("ess", "effective sample size of a dataset");
  DataArgs ess_data;
  add_data_args(essc, ess_data);
  std::string ess_model;
  essc->add_option("--model", ess_model, "model JSON path")->required();

  // --- trace-eta ---
  auto* trace = app.add_subcommand("trace-eta",
                                   "eta search trace at a single site");
  DataArgs trace_data;
  add_data_args(trace, trace_data);
  std::string trace_model, trace_mode = "lasso", trace_out = "trace.csv";
  std::string trace_manifest;
  double trace_x = 0.0, trace_y = 0.0;
  int trace_knn = 0;
  trace->add_option("--model", trace_model, "model JSON path")->required();
  trace->add_option("--site-x", trace_x, "site x (or lon)")->required();
  trace->add_option("--site-y", trace_y, "site y (or lat)")->required();
  trace->add_option("--mode", trace_mode, "lasso|adaptive")
      ->check(CLI::IsMember({"lasso", "adaptive"}));
  trace->add_option("--knn-cap", trace_knn, "candidate screen (0 off)");
  trace->add_option("--out", trace_out, "output CSV path");
  trace->add_option("--manifest", trace_manifest, "manifest JSON path");

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate",
                                 "Gaussian random field at given locations");
  DataArgs sim_data;
  add_data_args(sim, sim_data, /*need_z=*/false);
  std::string sim_model, sim_out = "simulated.csv", sim_manifest;
  std::uint64_t sim_seed = 2024;
  double sim_mean = 0.0;
  sim->add_option("--model", sim_model, "model JSON path")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--mean", sim_mean, "constant mean");
  sim->add_option("--out", sim_out, "output CSV path");
  sim->add_option("--manifest", sim_manifest, "manifest JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage_error;
  }

  // Load inputs: failures here are data errors (exit 2).
  krig::Dataset ds;
  krig::CovarianceModel model;
  nlohmann::json sweep_json;
  try {
    if (*fit) ds = load_data(fit_data);
    if (*pred) {
      ds = load_data(pred_data);
      model = krig::CovarianceModel::from_json(read_file(pred_model));
    }
    if (*essc) {
      ds = load_data(ess_data);
      model = krig::CovarianceModel::from_json(read_file(ess_model));
    }
    if (*trace) {
      ds = load_data(trace_data);
      model = krig::CovarianceModel::from_json(read_file(trace_model));
    }
    if (*sim) {
      krig::CsvSpec spec;
      spec.x_col = sim_data.x_col;
      spec.y_col = sim_data.y_col;
      spec.z_col = sim_data.x_col;  // no value column required
      spec.metric = sim_data.metric == "chordal" ? krig::Metric::chordal
                                                 : krig::Metric::euclidean;
      ds = krig::load_csv(sim_data.path, spec);
      model = krig::CovarianceModel::from_json(read_file(sim_model));
    }
    if (*sweep) sweep_json = nlohmann::json::parse(read_file(sweep_config));
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return data_error;
  }

  try {
    if (*fit) {
      krig::FitOptions opts;
      opts.n_bins = fit_bins;
      opts.max_lag = fit_max_lag;
      opts.tmpl.fit_nugget = !fit_no_nugget;
      std::stringstream comps(fit_components);
      for (std::string tok; std::getline(comps, tok, ',');)
        opts.tmpl.components.push_back({krig::family_from_name(tok), fit_nu});
      const auto out = krig::fit_command(ds, opts);
      write_file(fit_model_out, out.fit.model.to_json() + "\n");
      if (!fit_vg_out.empty()) write_file(fit_vg_out, out.variogram.to_csv());
      std::cout << out.fit.model.to_json() << "\n";
      emit_manifest(fit_manifest, "fit-variogram",
                    {{"data", fit_data.path},
                     {"components", fit_components},
                     {"bins", std::to_string(fit_bins)},
                     {"model_out", fit_model_out}});
    } else if (*pred) {
      krig::PredictOptions opts;
      opts.method = krig::predict_method_from_name(pred_method);
      opts.knn_cap = pred_knn;
      opts.lk_neighbors = pred_lk_k;
      opts.forced_eta = pred_eta;
      opts.workers = pred_workers;
      opts.search = search_from(pred_coarse, pred_refc, pred_refp);
      const auto grid = krig::make_grid(krig::bounding_box(ds.points), pred_nx,
                                        pred_ny, pred_hull, ds);
      const auto out = krig::predict_command(ds, model, grid, opts);
      write_file(pred_out, out.to_csv());
      std::size_t failed = 0;
      for (const auto& r : out.rows) failed += r.error.empty() ? 0 : 1;
      std::cout << "wrote " << out.rows.size() << " rows to " << pred_out
                << " (" << failed << " failed sites)\n";
      emit_manifest(pred_manifest, "predict",
                    {{"data", pred_data.path},
                     {"model", pred_model},
                     {"method", pred_method},
                     {"grid", std::to_string(pred_nx) + "x" + std::to_string(pred_ny)},
                     {"hull_filter", pred_hull ? "true" : "false"},
                     {"out", pred_out}});
    } else if (*sweep) {
      krig::ExperimentConfig cfg;
      const auto& j = sweep_json;
      if (j.contains("n_locations")) cfg.n_locations = j["n_locations"];
      if (j.contains("family")) {
        const std::string fam = j["family"];
        cfg.family = krig::family_from_name(fam);
      }
      if (j.contains("pr_grid"))
        cfg.pr_grid = j["pr_grid"].get<std::vector<double>>();
      if (j.contains("matern_nu")) cfg.matern_nu = j["matern_nu"];
      if (j.contains("seed")) cfg.seed = j["seed"];
      if (j.contains("mode")) {
        const std::string mode = j["mode"];
        if (mode != "lasso" && mode != "adaptive")
          throw std::invalid_argument("config field 'mode': expected lasso|adaptive, got " + mode);
        cfg.mode = mode == "adaptive" ? krig::PenaltyMode::adaptive
                                      : krig::PenaltyMode::lasso;
      }
      if (j.contains("sites")) {
        cfg.sites.clear();
        for (const auto& s : j["sites"])
          cfg.sites.push_back(krig::site_from_name(s.get<std::string>()));
      }
      const auto records = krig::run_sweep(cfg);
      write_file(sweep_out, krig::sweep_to_csv(records));
      std::cout << "wrote " << records.size() << " rows to " << sweep_out << "\n";
      emit_manifest(sweep_manifest, "sweep",
                    {{"config", sweep_config},
                     {"seed", std::to_string(cfg.seed)},
                     {"out", sweep_out}});
    } else if (*essc) {
      const auto report = krig::dataset_ess(ds, model);
      nlohmann::json out;
      out["n"] = report.k;
      out["n_ess"] = report.n_ess;
      out["redundancy"] = report.redundancy;
      out["clamped"] = report.clamped;
      std::cout << out.dump(2) << "\n";
    } else if (*trace) {
      const auto mode = trace_mode == "adaptive" ? krig::PenaltyMode::adaptive
                                                 : krig::PenaltyMode::lasso;
      const auto tr = krig::trace_eta(ds, model, {trace_x, trace_y}, mode, {},
                                      trace_knn);
      write_file(trace_out, tr.to_csv());
      std::cout << "wrote " << tr.records.size() << " rows to " << trace_out
                << (tr.degenerate ? " (degenerate search)" : "") << "\n";
      emit_manifest(trace_manifest, "trace-eta",
                    {{"data", trace_data.path},
                     {"model", trace_model},
                     {"mode", trace_mode},
                     {"out", trace_out}});
    } else if (*sim) {
      const auto z = krig::simulate_grf(ds.locations(), model, sim_seed, sim_mean);
      krig::Dataset out = ds;
      out.z = z;
      krig::CsvSpec spec;
      spec.metric = out.metric;
      krig::save_csv(out, sim_out, spec);
      std::cout << "wrote " << out.size() << " rows to " << sim_out << "\n";
      emit_manifest(sim_manifest, "simulate",
                    {{"data", sim_data.path},
                     {"model", sim_model},
                     {"seed", std::to_string(sim_seed)},
                     {"out", sim_out}});
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return numeric_error;
  }
  return ok;
}
