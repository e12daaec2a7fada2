// sportsim: evaluate, benchmark, replay and serve sport environments.
//
// Exit codes: 0 success, 2 configuration error, 3 simulation fault or
// replay mismatch, 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "sportsim/bridge.hpp"
#include "sportsim/harness.hpp"

namespace {

using namespace sportsim;

constexpr int kExitConfig = 2;
constexpr int kExitFault = 3;

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kConfiguration:
    case ErrorCode::kDomain:
      return kExitConfig;
    case ErrorCode::kSimulationBlowup:
    case ErrorCode::kIntegrity:
    case ErrorCode::kIncompatible:
      return kExitFault;
    default:
      return 1;
  }
}

std::string default_root() {
  const char* root = std::getenv("SPORTSIM_CONFIG_ROOT");
  return root ? root : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batched humanoid sport environments"};
  app.require_subcommand(1);

  harness::RunSpec run;
  run.config_root = default_root();
  auto* eval = app.add_subcommand("eval", "run a fixed number of trials and report metrics");
  eval->add_option("--sport", run.env, "environment id")->required();
  eval->add_option("--policy", run.policy, "random, a scripted policy name or tcp://host:port")
      ->capture_default_str();
  eval->add_option("--batch", run.batch, "environments stepped together")->capture_default_str();
  eval->add_option("--trials", run.trials, "episodes to run")->capture_default_str();
  eval->add_option("--seed", run.seed, "base seed")->capture_default_str();
  eval->add_option("--config", run.config_path, "JSON overrides");
  eval->add_option("--config-root", run.config_root, "directory of per-environment JSON files");
  eval->add_option("--out", run.out_dir, "output directory");
  eval->add_option("--workers", run.workers, "worker threads")->capture_default_str();
  eval->add_flag("--log-trajectories", run.log_trajectories, "write trajectories.bin");

  harness::BenchSpec bench;
  std::string bench_config;
  auto* bench_cmd = app.add_subcommand("bench", "measure batched step throughput");
  bench_cmd->add_option("--sport", bench.env, "environment id")->capture_default_str();
  bench_cmd->add_option("--batch", bench.batch)->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers)->capture_default_str();
  bench_cmd->add_option("--seconds", bench.seconds)->capture_default_str();
  bench_cmd->add_option("--steps", bench.max_steps, "batch steps to time (overrides --seconds)");
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--config", bench_config, "JSON overrides");

  std::string log_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-execute a trajectory log and compare bitwise");
  replay_cmd->add_option("log", log_path)->required();

  std::string card_env, card_config;
  auto* card = app.add_subcommand("card", "print an environment card");
  card->add_option("--sport", card_env, "environment id")->required();
  card->add_option("--config", card_config, "JSON overrides");

  std::string dump_env, dump_config;
  auto* dump = app.add_subcommand("config", "print the resolved configuration as JSON");
  dump->add_option("--sport", dump_env, "environment id")->required();
  dump->add_option("--config", dump_config, "JSON overrides");

  std::string serve_env, serve_config;
  int port = 5555, serve_workers = 1, sessions = 0;
  auto* serve = app.add_subcommand("serve", "serve a batch over the loopback bridge protocol");
  serve->add_option("--sport", serve_env, "environment id")->required();
  serve->add_option("--config", serve_config, "JSON overrides");
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--workers", serve_workers)->capture_default_str();
  serve->add_option("--sessions", sessions, "exit after this many sessions (0: never)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) {
      const auto result = harness::run_eval(run);
      harness::write_outputs(run, result);
      std::cout << result.text();
      return result.faults > 0 ? kExitFault : 0;
    }
    if (*bench_cmd) {
      if (!bench_config.empty() || !default_root().empty())
        bench.config = load_config(bench.env, bench_config, default_root());
      std::cout << harness::run_bench(bench).text();
      return 0;
    }
    if (*replay_cmd) {
      const auto v = harness::replay_file(log_path);
      std::cout << (v.match ? "match" : "MISMATCH") << " episodes=" << v.episodes
                << " records=" << v.records << "\n";
      if (!v.match) std::cout << v.detail << "\n";
      return v.match ? 0 : kExitFault;
    }
    if (*card) {
      std::cout << envs::environment_card(load_config(card_env, card_config, default_root()));
      return 0;
    }
    if (*dump) {
      std::cout << load_config(dump_env, dump_config, default_root()).to_json() << "\n";
      return 0;
    }
    if (*serve) {
      const SportConfig cfg = load_config(serve_env, serve_config, default_root());
      bridge::serve(cfg, port, serve_workers, sessions, [](int p) {
        std::cout << "listening on 127.0.0.1:" << p << std::endl;
      });
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
