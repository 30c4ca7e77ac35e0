#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace coordfield::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;  // parse: at least one instruction failed
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInvariant = 3;

struct RunOptions {
  std::filesystem::path scenario;
  std::optional<std::string> strategy;  // falls back to the scenario, then coordfield
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::filesystem::path out;
  int snapshot_stride = 1;
  bool phi_dump = false;
};

struct BenchOptions {
  std::filesystem::path scenario;
  std::vector<std::string> strategies;  // empty means all five
  int seeds = 50;
  std::optional<long> steps;
  std::filesystem::path out;
  int workers = 0;  // 0 reads COORDFIELD_WORKERS, default 1
};

struct ServeOptions {
  std::filesystem::path scenario;
  std::optional<std::string> strategy;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps;
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  double rate = 10.0;
  int snapshot_stride = 1;
  std::filesystem::path data_dir;
  std::filesystem::path lexicon;
  std::string external;  // command line of an external parser, split on spaces
  bool autostart = false;
};

struct ParseOptions {
  std::filesystem::path world;
  std::filesystem::path lexicon;
  std::string external;
  std::vector<std::string> texts;  // empty reads one instruction per stdin line
  std::filesystem::path corpus;    // when set, prints the corpus accuracy instead
};

int cmd_run(const RunOptions& opt);
int cmd_bench(const BenchOptions& opt);
int cmd_serve(const ServeOptions& opt);
int cmd_parse(const ParseOptions& opt);

}  // namespace coordfield::cli
