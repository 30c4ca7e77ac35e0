#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "coordfield/gateway.hpp"
#include "coordfield/trace_io.hpp"

namespace coordfield::cli {

namespace fs = std::filesystem;

namespace {

SimConfig make_config(const Scenario& s, const std::optional<std::string>& strategy,
                      std::optional<std::uint64_t> seed, std::optional<long> steps) {
  SimConfig c;
  const std::string name = strategy.value_or(s.strategy.value_or("coordfield"));
  const auto kind = strategy_from_string(name);
  if (!kind) throw ConfigError("unknown strategy '" + name + "'", "strategy");
  c.strategy = *kind;
  // scenario params are tuned for the scenario's own strategy only
  if (s.strategy && *s.strategy == name) c.strategy_params = s.strategy_params;
  c.seed = seed.value_or(s.seed);
  if (steps) c.t_max = *steps;
  return c;
}

std::string run_id(const fs::path& scenario, std::string_view strategy, std::uint64_t seed) {
  return scenario.stem().string() + "-" + std::string(strategy) + "-" + std::to_string(seed);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::unique_ptr<CommandParser> make_parser(const fs::path& lexicon, const std::string& external) {
  if (!external.empty()) {
    auto argv = split_words(external);
    if (argv.empty()) throw ConfigError("empty external parser command", "external");
    return std::make_unique<ExternalParser>(std::move(argv));
  }
  return std::make_unique<GrammarParser>(load_lexicon_file(lexicon));
}

int config_failure(const std::exception& e) {
  std::cerr << "config error: " << e.what() << '\n';
  return kExitConfig;
}

}  // namespace

int cmd_run(const RunOptions& opt) {
  try {
    if (opt.snapshot_stride < 1) throw ConfigError("--snapshot-stride must be at least 1", "snapshot_stride");
    Scenario scenario = load_scenario_file(opt.scenario, opt.seed);
    SimConfig config = make_config(scenario, opt.strategy, opt.seed, opt.steps);
    config.snapshot_stride = opt.snapshot_stride;
    const std::string strategy(to_string(config.strategy));
    const std::string id = run_id(opt.scenario, strategy, config.seed);
    fs::create_directories(opt.out);

    Engine engine(std::move(scenario), config);
    std::ostringstream trajectories, trace;
    trajectories << kTrajectoryCsvHeader << '\n';
    auto record = [&](const Snapshot& s) {
      write_trajectory_rows(trajectories, s);
      write_trace_line(trace, s);
    };
    record(*engine.latest());

    std::optional<std::string> breach;
    try {
      while (!engine.done()) {
        const auto s = engine.step();
        if (s->step % config.snapshot_stride == 0 || engine.done()) record(*s);
      }
    } catch (const InvariantError& e) {
      breach = e.what();
      record(*engine.latest());  // the diagnostic snapshot
    }

    // a broken run may carry a trace the checker rejects; the tally is still meaningful
    const MetricsReport metrics = breach ? engine.metrics() : compute_metrics(engine.trace());
    nlohmann::json doc{{"run_id", id},
                       {"scenario", opt.scenario.string()},
                       {"strategy", strategy},
                       {"seed", config.seed},
                       {"steps", engine.step_index()},
                       {"status", breach ? "aborted" : "ok"},
                       {"metrics", to_json(metrics)}};
    if (breach) doc["error"] = *breach;

    write_file_atomic(opt.out / "metrics.json", doc.dump(2) + "\n");
    write_file_atomic(opt.out / "metrics.csv",
                      std::string(kMetricsCsvHeader) + "\n" + metrics_csv_row(id, strategy, config.seed, metrics) + "\n");
    write_file_atomic(opt.out / "trajectories.csv", trajectories.str());
    write_file_atomic(opt.out / "trace.jsonl", trace.str());
    if (opt.phi_dump) {
      std::ostringstream phi;
      write_phi_csv(phi, engine.field());
      write_file_atomic(opt.out / "phi.csv", phi.str());
    }
    if (breach) {
      std::cerr << "invariant breach at step " << engine.step_index() << ": " << *breach << '\n';
      return kExitInvariant;
    }
    std::cout << metrics_csv_row(id, strategy, config.seed, metrics) << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    return config_failure(e);
  } catch (const InvariantError& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const fs::filesystem_error& e) {
    return config_failure(e);
  }
}

namespace {

struct BenchJob {
  std::string strategy;
  std::uint64_t seed = 0;
  std::optional<MetricsReport> metrics;
  std::string error;
  int code = kExitOk;
};

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("COORDFIELD_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("COORDFIELD_WORKERS must be a positive integer, got '") + env + "'", "workers");
  }
  return 1;
}

}  // namespace

int cmd_bench(const BenchOptions& opt) {
  std::vector<BenchJob> jobs;
  int workers = 1;
  try {
    if (opt.seeds < 1) throw ConfigError("--seeds must be at least 1", "seeds");
    workers = worker_count(opt.workers);
    std::vector<std::string> strategies = opt.strategies;
    if (strategies.empty())
      for (StrategyKind k : kAllStrategies) strategies.emplace_back(to_string(k));
    for (const std::string& s : strategies)
      if (!strategy_from_string(s)) throw ConfigError("unknown strategy '" + s + "'", "strategies");
    // fail on a bad scenario before spawning anything
    (void)load_scenario_file(opt.scenario, std::uint64_t{1});
    for (const std::string& s : strategies)
      for (int seed = 1; seed <= opt.seeds; ++seed) jobs.push_back({s, static_cast<std::uint64_t>(seed), {}, {}, 0});
    fs::create_directories(opt.out / "runs");
  } catch (const ConfigError& e) {
    return config_failure(e);
  } catch (const fs::filesystem_error& e) {
    return config_failure(e);
  }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      BenchJob& job = jobs[k];
      try {
        Scenario s = load_scenario_file(opt.scenario, job.seed);
        const SimConfig c = make_config(s, job.strategy, job.seed, opt.steps);
        const RunResult r = run(std::move(s), c);
        job.metrics = r.metrics;
        const std::string id = run_id(opt.scenario, job.strategy, job.seed);
        write_file_atomic(opt.out / "runs" / (id + ".csv"),
                          metrics_csv_row(id, job.strategy, job.seed, r.metrics) + "\n");
      } catch (const ConfigError& e) {
        job.error = e.what();
        job.code = kExitConfig;
      } catch (const InvariantError& e) {
        job.error = e.what();
        job.code = kExitInvariant;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const BenchJob& job : jobs)
    if (job.code != kExitOk) {
      std::cerr << job.strategy << " seed " << job.seed << ": " << job.error << '\n';
      return job.code;
    }

  // merge in job order: strategies as listed, seeds ascending
  std::ostringstream runs;
  runs << kMetricsCsvHeader << '\n';
  for (const BenchJob& job : jobs)
    runs << metrics_csv_row(run_id(opt.scenario, job.strategy, job.seed), job.strategy, job.seed, *job.metrics)
         << '\n';

  std::ostringstream agg;
  agg << "strategy,runs,cr,ce,tlb,uur\n";
  for (std::size_t k = 0; k < jobs.size(); k += opt.seeds) {
    std::vector<double> cr, ce, tlb, uur;
    for (int s = 0; s < opt.seeds; ++s) {
      const MetricsReport& m = *jobs[k + s].metrics;
      cr.push_back(m.cr);
      ce.push_back(m.ce);
      tlb.push_back(m.tlb);
      uur.push_back(m.uur);
    }
    agg << jobs[k].strategy << ',' << opt.seeds << ',' << format_double(median(cr)) << ','
        << format_double(median(ce)) << ',' << format_double(median(tlb)) << ',' << format_double(median(uur))
        << '\n';
  }
  write_file_atomic(opt.out / "runs.csv", runs.str());
  write_file_atomic(opt.out / "aggregate.csv", agg.str());
  std::cout << agg.str();
  return kExitOk;
}

int cmd_serve(const ServeOptions& opt) {
  // block the stop signals before any thread exists, then wait for them here
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  std::unique_ptr<Gateway> gateway;
  unsigned short port = 0;
  try {
    Scenario scenario = load_scenario_file(opt.scenario, opt.seed);
    SimConfig config = make_config(scenario, opt.strategy, opt.seed, opt.steps);
    if (!opt.steps) config.t_max = 1'000'000;
    config.stop_when_complete = false;  // operators keep adding tasks
    config.snapshot_stride = opt.snapshot_stride;
    GatewayConfig g;
    g.address = opt.address;
    g.port = opt.port;
    g.snapshots_per_second = opt.rate;
    g.data_dir = opt.data_dir;
    g.autostart = opt.autostart;
    const fs::path lexicon = opt.lexicon.empty() ? opt.data_dir / "lexicon.json" : opt.lexicon;
    gateway = std::make_unique<Gateway>(std::move(scenario), config, make_parser(lexicon, opt.external), g);
    port = gateway->start();
  } catch (const ConfigError& e) {
    return config_failure(e);
  } catch (const std::system_error& e) {
    return config_failure(e);  // bind failures
  }
  std::cout << "listening on http://" << opt.address << ':' << port << " (ws at /ws)" << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  gateway->stop();
  return kExitOk;
}

int cmd_parse(const ParseOptions& opt) {
  std::unique_ptr<CommandParser> parser;
  std::optional<Scenario> world;
  try {
    parser = make_parser(opt.lexicon, opt.external);
    world = load_scenario_file(opt.world);
  } catch (const ConfigError& e) {
    return config_failure(e);
  }

  if (!opt.corpus.empty()) {
    std::vector<CorpusEntry> corpus;
    try {
      corpus = load_corpus(opt.corpus);
    } catch (const ConfigError& e) {
      return config_failure(e);
    }
    const auto results = evaluate_corpus(*parser, world->world, corpus);
    for (std::size_t k = 0; k < results.size(); ++k)
      if (!results[k].parsed || !tuples_match(results[k].gold, *results[k].parsed)) std::cout << "miss: " << corpus[k].text << '\n';
    std::cout << "tpa " << format_double(parsing_accuracy(results)) << " (" << results.size() << " instructions)\n";
    return kExitOk;
  }

  std::vector<std::string> texts = opt.texts;
  if (texts.empty())
    for (std::string line; std::getline(std::cin, line);)
      if (!line.empty()) texts.push_back(line);
  int code = kExitOk;
  for (const std::string& text : texts) {
    try {
      const ParsedCommand c = parser->parse({text, 0}, world->world);
      std::cout << to_json(c).dump() << '\n';
    } catch (const ParseError& e) {
      std::cout << nlohmann::json{{"error", e.reason()}, {"clause", e.clause()}, {"text", text}}.dump() << '\n';
      code = kExitParse;
    }
  }
  return code;
}

}  // namespace coordfield::cli
