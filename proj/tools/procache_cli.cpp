// procache: run single simulations, sweeps and the verification suites.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "procache/config.hpp"
#include "procache/experiment.hpp"
#include "procache/verify.hpp"

namespace fs = std::filesystem;
using namespace procache;

namespace {

constexpr int kConfigError = 1;
constexpr int kVerifyFailure = 2;

ExperimentConfig load(const std::string& path) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

void emit(const std::vector<ResultRow>& rows, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) {
    emit_csv(rows, std::cout);
    return;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  const std::string path = (fs::path(out_dir) / name).string();
  write_csv(rows, path);
  std::cerr << "wrote " << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proactive caching simulator"};
  app.require_subcommand(1);
  std::string out_dir;
  app.add_option("--out", out_dir, "Directory for CSV output (stdout when omitted)");

  std::string config_path;
  std::string scheme_name;
  std::uint64_t seed = 1;
  auto* run_cmd = app.add_subcommand("run", "One scheme and seed over the configured grid");
  run_cmd->add_option("--config", config_path, "Config file (key = value)");
  run_cmd->add_option("--scheme", scheme_name, "epc | naive | oracle | optimal")->required();
  run_cmd->add_option("--seed", seed, "Run seed");
  run_cmd->add_option("--out", out_dir, "Directory for CSV output");

  auto* sweep_cmd = app.add_subcommand("sweep", "Every scheme, grid point and seed, with means");
  sweep_cmd->add_option("--config", config_path, "Config file (key = value)");
  sweep_cmd->add_option("--out", out_dir, "Directory for CSV output");
  bool quiet = false;
  sweep_cmd->add_flag("--quiet", quiet, "No progress on stderr");

  std::string suite;
  std::uint64_t verify_seed = 1;
  bool tie_bug = false;
  auto* verify_cmd = app.add_subcommand("verify", "Randomized oracle suites; JSON line per property");
  verify_cmd->add_option("--suite", suite, "knapsack | flat_equivalence | partial | quadrature");
  verify_cmd->add_option("--seed", verify_seed, "Instance seed");
  verify_cmd->add_flag("--inject-tie-bug", tie_bug, "Reverse tie-breaking in converged admission");

  auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
  config_cmd->add_option("--config", config_path, "Config file (key = value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) {
      ExperimentConfig cfg = load(config_path);
      const SchemeKind scheme = parse_scheme(scheme_name);
      std::shared_ptr<Topology> topo;
      if (cfg.topology == Topology::Kind::InternetScaled) topo = build_topology(cfg);
      std::vector<ResultRow> rows;
      for (auto skew : cfg.skews)
        for (double share : cfg.mid_share) {
          if (!scheme_applicable(scheme, share)) continue;
          for (auto tc : cfg.total_cache)
            for (double gamma : cfg.gamma) rows.push_back(run_point(cfg, scheme, skew, share, tc, gamma, seed, topo.get()));
        }
      if (rows.empty()) throw ConfigError("scheme " + scheme_name + " has no applicable grid point");
      emit(rows, out_dir, "run.csv");
      return 0;
    }
    if (*sweep_cmd) {
      ExperimentConfig cfg = load(config_path);
      if (out_dir.empty() && !config_path.empty() && cfg.output_dir != ".") out_dir = cfg.output_dir;
      auto rows = sweep(cfg, [&](const ResultRow& r) {
        if (!quiet)
          std::cerr << r.scheme << ' ' << r.skew << " mc/tc=" << r.mc_over_tc << " tc=" << r.tc << " gamma=" << r.gamma
                    << " seed=" << *r.seed << " gain=" << r.gain << '\n';
      });
      emit(rows, out_dir, "sweep.csv");
      return 0;
    }
    if (*config_cmd) {
      std::cout << render_config(load(config_path));
      return 0;
    }
    if (*verify_cmd) {
      VerifyOptions opt;
      opt.seed = verify_seed;
      opt.inject_tie_break_bug = tie_bug;
      std::vector<std::string> suites = suite.empty() ? verify_suites() : std::vector<std::string>{suite};
      bool ok = true;
      for (const auto& s : suites) {
        for (const auto& r : run_suite(s, opt)) {
          std::cout << to_json_line(r) << '\n';
          ok = ok && r.pass;
        }
      }
      return ok ? 0 : kVerifyFailure;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}
