// Command-line driver for the transport-shortcut diffusion sampler pipeline.
//
// Subcommands mirror the pipeline stages; `all` chains them. Exit codes:
// 0 success, 2 configuration/input error, 3 numeric or divergence error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "otdiff/pipeline.hpp"
#include "otdiff/sdot.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Override the master seed");
  cmd->add_option("--out", opts.out, "Override the output directory");
  cmd->add_option("--threads", opts.threads, "Worker threads (0 = hardware)");
}

otdiff::RunConfig load_config(const CommonOptions& opts) {
  otdiff::RunConfig cfg = otdiff::RunConfig::from_file(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.out_dir = *opts.out;
  if (opts.threads) cfg.threads = *opts.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-discrete optimal transport shortcut for diffusion sampling"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string stage;
  for (const auto& name :
       {"make-latents", "fit", "sample", "eval", "oracle-check", "all"}) {
    CLI::App* cmd = app.add_subcommand(name, "");
    add_common(cmd, opts);
    cmd->callback([&stage, name]() { stage = name; });
  }
  app.get_subcommand("make-latents")->description("Draw data and diffuse it to the latent set");
  app.get_subcommand("fit")->description("Fit the transport potential to the latents");
  app.get_subcommand("sample")->description("Generate shortcut and baseline batches");
  app.get_subcommand("eval")->description("Mode-mixture, distances, moments and plots");
  app.get_subcommand("oracle-check")->description("Independent brute-force validation");
  app.get_subcommand("all")->description("Run the full pipeline");

  CLI11_PARSE(app, argc, argv);

  try {
    const otdiff::RunConfig cfg = load_config(opts);
    bool ok = true;
    if (stage == "make-latents") {
      otdiff::pipeline::make_latents(cfg);
    } else if (stage == "fit") {
      otdiff::pipeline::fit(cfg);
    } else if (stage == "sample") {
      otdiff::pipeline::sample(cfg);
    } else if (stage == "eval") {
      otdiff::pipeline::evaluate(cfg);
    } else if (stage == "oracle-check") {
      ok = otdiff::pipeline::oracle_check(cfg);
      if (!ok) std::cerr << "oracle-check: validation failed, see oracle_report.json\n";
    } else if (stage == "all") {
      ok = otdiff::pipeline::run_all(cfg);
      if (!ok) std::cerr << "all: oracle validation failed, see oracle_report.json\n";
    }
    return ok ? 0 : kExitNumeric;
  } catch (const otdiff::SolverDivergedError& e) {
    std::cerr << "solver diverged: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const otdiff::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const otdiff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const otdiff::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
