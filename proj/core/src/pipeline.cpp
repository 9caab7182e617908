#include "otdiff/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "otdiff/container.hpp"
#include "otdiff/digest.hpp"
#include "otdiff/gaussian.hpp"
#include "otdiff/metrics.hpp"
#include "otdiff/ot_oracle.hpp"
#include "otdiff/parallel.hpp"
#include "otdiff/rng.hpp"
#include "otdiff/sampler.hpp"
#include "otdiff/sdot.hpp"
#include "otdiff/svg.hpp"

namespace otdiff::pipeline {

namespace {

void ensure_dir(const std::filesystem::path& p) { std::filesystem::create_directories(p); }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

std::unique_ptr<ScoreProvider> make_score_provider(const RunConfig& cfg,
                                                   const DiffusionSchedule& sched) {
  if (cfg.score_kind == RunConfig::ScoreKind::Tabulated) {
    return std::make_unique<TabulatedScore>(TabulatedScore::load(cfg.resolve(cfg.score_path)));
  }
  return std::make_unique<GmmScoreOracle>(cfg.make_gmm(), sched);
}

SamplerConfig make_sampler_config(const RunConfig& cfg, SeedLane lane) {
  SamplerConfig s;
  s.reverse_steps = cfg.m_steps;
  s.variant = cfg.variant;
  s.seed = derive_seed(cfg.seed, lane);
  s.threads = cfg.threads;
  s.config_digest = cfg.digest();
  return s;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> cov;  // d x d row-major
};

Moments batch_moments(const SampleBatch& b) {
  const std::size_t n = b.size();
  const std::size_t d = b.dim;
  Moments m;
  m.mean.assign(d, 0.0);
  m.cov.assign(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = b.row(i);
    for (std::size_t k = 0; k < d; ++k) m.mean[k] += row[k];
  }
  for (double& v : m.mean) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = b.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        m.cov[j * d + k] += (row[j] - m.mean[j]) * (row[k] - m.mean[k]);
      }
    }
  }
  for (double& v : m.cov) v /= static_cast<double>(n);
  return m;
}

double fit_slope(std::span<const double> log_x, std::span<const double> log_y) {
  const double n = static_cast<double>(log_x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_x.size(); ++i) {
    sx += log_x[i];
    sy += log_y[i];
    sxx += log_x[i] * log_x[i];
    sxy += log_x[i] * log_y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

void make_latents(const RunConfig& cfg) {
  const Paths paths = paths_for(cfg);
  ensure_dir(paths.root);

  std::size_t dim = 0;
  std::vector<double> data;
  if (cfg.data_kind == RunConfig::DataKind::Gmm) {
    const GaussianMixture gm = cfg.make_gmm();
    dim = gm.dim();
    data = gm.sample(cfg.data_count, derive_seed(cfg.seed, SeedLane::DataDraw));
  } else {
    data = load_points(cfg.resolve(cfg.points_path), dim);
  }
  if (data.empty()) throw InputError("make_latents: empty dataset");
  const std::size_t count = data.size() / dim;

  const std::uint64_t config_digest = cfg.digest();
  if (std::filesystem::exists(paths.latents())) {
    const LatentStore existing = load_latents(paths.latents());
    if (existing.config_digest != config_digest) {
      throw ConfigError("make_latents: refusing to overwrite latents from a different config");
    }
  }

  SampleBatch data_batch;
  data_batch.dim = dim;
  data_batch.data = data;
  data_batch.seed = cfg.seed;
  data_batch.config_digest = config_digest;
  save_batch(paths.data(), data_batch);

  const DiffusionSchedule sched = cfg.make_schedule();
  LatentStore store;
  store.dim = dim;
  store.latents.resize(data.size());
  store.m_steps = static_cast<std::uint32_t>(cfg.m_steps);
  store.schedule_digest = sched.digest();
  store.data_digest = digest_doubles(data);
  store.config_digest = config_digest;

  parallel_for_chunks(count, 256, cfg.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::span<const double> x0(data.data() + i * dim, dim);
      const std::vector<double> latent =
          diffuse_to(x0, cfg.m_steps, sched, derive_seed(cfg.seed, SeedLane::LatentDiffusion, i));
      std::copy(latent.begin(), latent.end(),
                store.latents.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  });

  save_latents(paths.latents(), store);
}

void fit(const RunConfig& cfg) {
  const Paths paths = paths_for(cfg);
  const LatentStore store = load_latents(paths.latents());
  const DiffusionSchedule sched = cfg.make_schedule();

  if (store.config_digest != cfg.digest()) {
    throw ConfigError("fit: latents were produced by a different config");
  }
  if (store.schedule_digest != sched.digest() || store.m_steps != cfg.m_steps) {
    throw ConfigError("fit: latents do not match the configured schedule");
  }

  const TargetSet targets = TargetSet::uniform(store.dim, store.latents);
  FitResult result = [&] {
    try {
      return otdiff::fit(targets, cfg.make_solver_config());
    } catch (SolverDivergedError& e) {
      // Leave the partial trace behind for postmortems before propagating.
      std::ofstream out(paths.trace_csv());
      if (out) e.trace.write_csv(out);
      throw;
    }
  }();

  BrenierPotential::Provenance prov;
  prov.m_steps = static_cast<std::uint32_t>(cfg.m_steps);
  prov.schedule_digest = sched.digest();
  prov.config_digest = cfg.digest();
  BrenierPotential potential(result.potential.targets(), result.potential.heights(), prov);

  save_potential(paths.potential(), potential);
  if (potential.size() <= 4096) save_potential_json(paths.potential_json(), potential);

  {
    std::ofstream out(paths.trace_csv());
    if (!out) throw ConfigError("cannot open for writing: " + paths.trace_csv().string());
    result.trace.write_csv(out);
  }

  {
    SvgPlot plot("solver trace: " + cfg.name, "iteration", "log10(max deviation)");
    std::vector<double> xs, ys;
    for (const TraceRecord& r : result.trace.records) {
      xs.push_back(static_cast<double>(r.iteration));
      ys.push_back(std::log10(std::max(r.max_dev, 1e-300)));
    }
    plot.add_polyline(xs, ys, SvgPlot::palette(0));
    plot.save(paths.trace_svg());
  }

  nlohmann::json summary;
  summary["achieved_tol"] = result.trace.achieved_tol;
  summary["converged"] = result.trace.converged;
  summary["iterations"] = result.trace.iterations;
  summary["config_digest"] = to_hex(cfg.digest());
  write_json(paths.fit_summary(), summary);
}

void sample(const RunConfig& cfg) {
  const Paths paths = paths_for(cfg);
  const BrenierPotential potential = load_potential(paths.potential());
  const DiffusionSchedule sched = cfg.make_schedule();

  if (potential.provenance().config_digest != cfg.digest()) {
    throw ConfigError("sample: potential was produced by a different config");
  }

  const std::unique_ptr<ScoreProvider> score = make_score_provider(cfg, sched);

  const SampleBatch ot_batch =
      ot_sample(potential, sched, *score, make_sampler_config(cfg, SeedLane::BatchOt),
                cfg.sample_count);
  save_batch(paths.batch_ot(), ot_batch);
  save_batch_csv(paths.batch_ot_csv(), ot_batch);

  const SampleBatch full =
      vanilla_sample(sched, *score, make_sampler_config(cfg, SeedLane::BatchVanillaFull),
                     cfg.sample_count, sched.steps());
  save_batch(paths.batch_vanilla_full(), full);
  save_batch_csv(paths.batch_vanilla_full_csv(), full);

  const SampleBatch trunc =
      vanilla_sample(sched, *score, make_sampler_config(cfg, SeedLane::BatchVanillaTrunc),
                     cfg.sample_count, cfg.m_steps);
  save_batch(paths.batch_vanilla_trunc(), trunc);
  save_batch_csv(paths.batch_vanilla_trunc_csv(), trunc);
}

void evaluate(const RunConfig& cfg) {
  const Paths paths = paths_for(cfg);
  ensure_dir(paths.eval_dir());

  struct Named {
    std::string name;
    SampleBatch batch;
  };
  std::vector<Named> batches;
  batches.push_back({"ot", load_batch(paths.batch_ot())});
  batches.push_back({"vanilla_full", load_batch(paths.batch_vanilla_full())});
  batches.push_back({"vanilla_trunc", load_batch(paths.batch_vanilla_trunc())});

  const std::uint64_t config_digest = cfg.digest();
  for (const Named& nb : batches) {
    if (nb.batch.config_digest != config_digest) {
      throw ConfigError("evaluate: batch '" + nb.name + "' from a different config");
    }
  }
  const std::size_t dim = batches.front().batch.dim;

  // Reference sample: fresh mixture draw, or the raw data for point clouds.
  SampleBatch fresh;
  fresh.dim = dim;
  fresh.config_digest = config_digest;
  const bool have_gmm = cfg.data_kind == RunConfig::DataKind::Gmm;
  if (have_gmm) {
    const std::size_t n_fresh = cfg.fresh_count != 0 ? cfg.fresh_count : cfg.sample_count;
    fresh.data = cfg.make_gmm().sample(n_fresh, derive_seed(cfg.seed, SeedLane::EvalFresh));
  } else {
    fresh = load_batch(paths.data());
  }

  nlohmann::json report;
  report["config_digest"] = to_hex(config_digest);
  report["name"] = cfg.name;

  // Mode-mixture table (needs the Bayes classifier, so mixture data only).
  if (have_gmm) {
    const BayesGmmClassifier clf(cfg.make_gmm());
    std::ofstream mmr_out(paths.mmr_csv());
    mmr_out << "batch,lambda,flagged,count,mmr\n";
    nlohmann::json mmr_json = nlohmann::json::object();
    for (const Named& nb : batches) {
      nlohmann::json rows = nlohmann::json::object();
      for (double lambda : cfg.lambdas) {
        const MmrReport r = mode_mixture_ratio(nb.batch, clf, lambda);
        std::size_t flagged = 0;
        for (auto f : r.flags) flagged += f;
        mmr_out << nb.name << "," << format_double(lambda) << "," << flagged << "," << r.count
                << "," << format_double(r.mmr) << "\n";
        rows[format_double(lambda)] = r.mmr;
      }
      mmr_json[nb.name] = std::move(rows);
    }
    report["mmr"] = std::move(mmr_json);

    nlohmann::json ordering = nlohmann::json::object();
    for (double lambda : cfg.lambdas) {
      const std::string key = format_double(lambda);
      ordering[key] = report["mmr"]["ot"][key].get<double>() <=
                      report["mmr"]["vanilla_trunc"][key].get<double>();
    }
    report["mmr_ot_not_worse_than_trunc"] = std::move(ordering);
  }

  // Energy distances against the reference draw, with the permutation null.
  {
    std::ofstream out(paths.energy_csv());
    out << "batch,energy_distance,null_quantile,below_null\n";
    nlohmann::json ed = nlohmann::json::object();
    for (const Named& nb : batches) {
      const double d = energy_distance(nb.batch, fresh, cfg.threads);
      const double q = permutation_null_quantile(
          nb.batch, fresh, cfg.null_quantile, cfg.permutations,
          derive_seed(cfg.seed, SeedLane::Permutation, fnv1a64(nb.name)), cfg.threads);
      out << nb.name << "," << format_double(d) << "," << format_double(q) << ","
          << (d < q ? 1 : 0) << "\n";
      ed[nb.name] = {{"energy_distance", d}, {"null_quantile", q}, {"below_null", d < q}};
    }
    report["energy"] = std::move(ed);
  }

  // Moment tables.
  {
    std::ofstream out(paths.moments_csv());
    out << "batch";
    for (std::size_t k = 0; k < dim; ++k) out << ",mean" << k;
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = j; k < dim; ++k) out << ",cov" << j << k;
    }
    out << "\n";
    auto emit = [&](const std::string& name, const SampleBatch& b) {
      const Moments m = batch_moments(b);
      out << name;
      for (std::size_t k = 0; k < dim; ++k) out << "," << format_double(m.mean[k]);
      for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t k = j; k < dim; ++k) out << "," << format_double(m.cov[j * dim + k]);
      }
      out << "\n";
    };
    for (const Named& nb : batches) emit(nb.name, nb.batch);
    emit("reference", fresh);
  }

  // Scatter plots colored by Bayes class (2D only).
  if (dim == 2) {
    auto scatter = [&](const std::string& name, const SampleBatch& b) {
      SvgPlot plot("samples: " + name, "x0", "x1");
      if (have_gmm) {
        const BayesGmmClassifier clf(cfg.make_gmm());
        const std::size_t classes = clf.classes();
        std::vector<std::vector<double>> xs(classes), ys(classes);
        std::vector<double> probs(classes);
        for (std::size_t i = 0; i < b.size(); ++i) {
          clf.posterior(b.row(i), probs);
          const std::size_t k = static_cast<std::size_t>(
              std::max_element(probs.begin(), probs.end()) - probs.begin());
          xs[k].push_back(b.row(i)[0]);
          ys[k].push_back(b.row(i)[1]);
        }
        for (std::size_t k = 0; k < classes; ++k) {
          plot.add_points(xs[k], ys[k], SvgPlot::palette(k));
        }
      } else {
        std::vector<double> xs(b.size()), ys(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
          xs[i] = b.row(i)[0];
          ys[i] = b.row(i)[1];
        }
        plot.add_points(xs, ys, SvgPlot::palette(0));
      }
      plot.save(paths.eval_dir() / ("scatter_" + name + ".svg"));
    };
    for (const Named& nb : batches) scatter(nb.name, nb.batch);
    scatter("reference", fresh);
  }

  write_json(paths.report(), report);
}

bool oracle_check(const RunConfig& cfg) {
  const Paths paths = paths_for(cfg);
  ensure_dir(paths.oracle_dir());

  nlohmann::json checks = nlohmann::json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, double value, double threshold, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"threshold", threshold}, {"pass", pass}});
    all_pass = all_pass && pass;
  };

  // Exact 1D solution vs the stochastic solver on a fixed two-target instance.
  const TargetSet instance_1d(1, {-1.0, 1.0}, {0.75, 0.25});
  const std::vector<double> exact_h = solve_1d_exact(instance_1d);
  {
    SolverConfig sc;
    sc.n_samples = 4096;
    sc.lr = 0.02;
    sc.seed = derive_seed(cfg.seed, SeedLane::OracleRecount);
    sc.threads = cfg.threads;
    const FitResult fitted = otdiff::fit(instance_1d, sc);
    const double spread =
        *std::max_element(exact_h.begin(), exact_h.end()) -
        *std::min_element(exact_h.begin(), exact_h.end()) + 1.0;
    double err = 0.0;
    for (std::size_t i = 0; i < exact_h.size(); ++i) {
      err = std::max(err, std::abs(fitted.potential.heights()[i] - exact_h[i]) / spread);
    }
    record("solver_vs_1d_quantile_oracle", err, 0.02, err <= 0.02);
  }

  // Monte-Carlo convergence rate at the exact heights.
  {
    const BrenierPotential exact_potential(instance_1d, exact_h);
    const double boundary = 0.5 * (exact_h[0] - exact_h[1]);
    const double true_w1 = normal_cdf(boundary);
    const std::vector<std::size_t> sizes = {1000, 4000, 16000, 64000};
    std::vector<double> log_n, log_err;
    std::ofstream csv(paths.mc_rate_csv());
    csv << "n_samples,mean_abs_error\n";
    for (std::size_t n : sizes) {
      double total = 0.0;
      for (std::size_t s = 0; s < cfg.mc_rate_seeds; ++s) {
        const std::uint64_t seed = derive_seed(cfg.seed, SeedLane::McRate, n * 1000 + s);
        const std::vector<double> w = estimate_cell_volumes(exact_potential, n, seed, cfg.threads);
        total += std::abs(w[0] - true_w1);
      }
      const double mean_err = total / static_cast<double>(cfg.mc_rate_seeds);
      csv << n << "," << format_double(mean_err) << "\n";
      log_n.push_back(std::log10(static_cast<double>(n)));
      log_err.push_back(std::log10(mean_err));
    }
    const double slope = fit_slope(log_n, log_err);
    record("mc_rate_loglog_slope", slope, -0.5, slope >= -0.65 && slope <= -0.35);

    SvgPlot plot("Monte-Carlo volume error", "log10(N)", "log10(mean abs error)");
    plot.add_polyline(log_n, log_err, SvgPlot::palette(0));
    plot.add_points(log_n, log_err, SvgPlot::palette(1), 3.0);
    plot.save(paths.mc_rate_svg());
  }

  // Quadrature check of the fitted potential, when one exists in 2D.
  if (std::filesystem::exists(paths.potential()) && std::filesystem::exists(paths.fit_summary())) {
    const BrenierPotential potential = load_potential(paths.potential());
    if (potential.dim() == 2) {
      const nlohmann::json summary = read_json(paths.fit_summary());
      const double achieved = summary.at("achieved_tol").get<double>();
      const double dev =
          grid_validate_2d(potential, cfg.grid_resolution, cfg.grid_extent, cfg.threads);
      record("grid_validation_vs_achieved_tol", dev, 3.0 * achieved, dev <= 3.0 * achieved);
    }
  }

  nlohmann::json report;
  report["config_digest"] = to_hex(cfg.digest());
  report["instance_digest_1d"] =
      to_hex(Fnv1a64().update_doubles(instance_1d.points()).update_doubles(instance_1d.measure()).value());
  report["checks"] = std::move(checks);
  report["all_pass"] = all_pass;
  write_json(paths.oracle_report(), report);
  return all_pass;
}

bool run_all(const RunConfig& cfg) {
  make_latents(cfg);
  fit(cfg);
  sample(cfg);
  evaluate(cfg);
  return oracle_check(cfg);
}

}  // namespace otdiff::pipeline
