#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace coordfield::cli;

int main(int argc, char** argv) {
  CLI::App app{"coordfield: coordination-field UAV task allocation simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write metrics, trajectories and trace");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON")->required();
  run_cmd->add_option("--strategy", run.strategy, "coordfield, aco, gwo, woa or astar");
  run_cmd->add_option("--seed", run.seed, "Seed (also selects the generated city instance)");
  run_cmd->add_option("--steps", run.steps, "Step limit");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--snapshot-stride", run.snapshot_stride, "Write trajectories and trace every N steps");
  run_cmd->add_flag("--phi-dump", run.phi_dump, "Also write phi.csv with the final field");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run every (strategy, seed) pair and aggregate medians");
  bench_cmd->add_option("--scenario", bench.scenario, "Scenario JSON")->required();
  bench_cmd->add_option("--strategies", bench.strategies, "Comma separated list (default all)")->delimiter(',');
  bench_cmd->add_option("--seeds", bench.seeds, "Seeds 1..N per strategy");
  bench_cmd->add_option("--steps", bench.steps, "Step limit");
  bench_cmd->add_option("--out", bench.out, "Output directory")->required();
  bench_cmd->add_option("--workers", bench.workers, "Parallel runs (default $COORDFIELD_WORKERS or 1)");

  ServeOptions serve;
  serve.data_dir = "data";
  auto* serve_cmd = app.add_subcommand("serve", "Serve a live run over HTTP and WebSocket");
  serve_cmd->add_option("--scenario", serve.scenario, "Scenario JSON")->required();
  serve_cmd->add_option("--strategy", serve.strategy, "Initial strategy");
  serve_cmd->add_option("--seed", serve.seed, "Seed");
  serve_cmd->add_option("--steps", serve.steps, "Step limit");
  serve_cmd->add_option("--address", serve.address, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--rate", serve.rate, "Snapshots per second");
  serve_cmd->add_option("--snapshot-stride", serve.snapshot_stride, "Engine steps per snapshot");
  serve_cmd->add_option("--data-dir", serve.data_dir, "Corpus, scenarios and lexicon root");
  serve_cmd->add_option("--lexicon", serve.lexicon, "Place lexicon (default <data-dir>/lexicon.json)");
  serve_cmd->add_option("--external", serve.external, "External parser command line");
  serve_cmd->add_flag("--autostart", serve.autostart, "Start stepping without waiting for a start message");

  ParseOptions parse;
  parse.world = "data/corpus/world.json";
  parse.lexicon = "data/lexicon.json";
  auto* parse_cmd = app.add_subcommand("parse", "Parse instructions (arguments or stdin lines) to task JSON");
  parse_cmd->add_option("texts", parse.texts, "Instructions");
  parse_cmd->add_option("--world", parse.world, "Scenario giving the map and entities");
  parse_cmd->add_option("--lexicon", parse.lexicon, "Place lexicon");
  parse_cmd->add_option("--external", parse.external, "External parser command line");
  parse_cmd->add_option("--corpus", parse.corpus, "Gold corpus; print accuracy instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*run_cmd) return cmd_run(run);
  if (*bench_cmd) return cmd_bench(bench);
  if (*serve_cmd) return cmd_serve(serve);
  return cmd_parse(parse);
}
