#pragma once

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include <nlohmann/json.hpp>

#include "coordfield/command_parse.hpp"
#include "coordfield/engine.hpp"

namespace coordfield {

// Wire messages, schema version 1. Every message is one JSON object with
// "v" and "type". Client to server: instruction, inject, control. Server to
// client: world, snapshot, status, ack, error.
inline constexpr int kWireVersion = 1;

nlohmann::json error_message(std::string_view where, std::string_view reason);
nlohmann::json world_message(const WorldMap& world, long run);
nlohmann::json snapshot_message(const Snapshot& s, long run);

struct GatewayConfig {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 binds any free port
  double snapshots_per_second = 10.0;
  /// Root for GET /corpus (corpus/gold_corpus.jsonl) and GET /scenarios.
  std::filesystem::path data_dir;
  bool autostart = false;
};

enum class RunState : unsigned char { paused, running, finished, aborted };
std::string_view to_string(RunState s);

/// Serves one engine to any number of WebSocket clients plus a few HTTP
/// endpoints. The engine is stepped on its own thread; connections only
/// touch it through handle() and the broadcast listeners.
class Gateway {
 public:
  Gateway(Scenario scenario, SimConfig sim, std::unique_ptr<CommandParser> parser, GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds, starts the network and simulation threads and returns the port.
  unsigned short start();
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

  /// One client message in, the direct reply (ack or error) out.
  nlohmann::json handle(const std::string& text);
  /// GET handling: HTTP status and JSON body.
  std::pair<int, std::string> http_get(std::string_view target) const;

  /// Advances one paced tick: snapshot_stride engine steps, then broadcasts.
  /// Called by the simulation thread; exposed so tests can drive it.
  void tick();

  using Listener = std::function<void(const std::string&)>;
  /// Registers a receiver of broadcasts and sends it the world and the
  /// latest snapshot. Returns a handle for remove_listener.
  int add_listener(Listener listener);
  void remove_listener(int id);

  RunState state() const;
  long run_id() const;
  std::shared_ptr<const Snapshot> latest() const;

 private:
  void broadcast(const nlohmann::json& message);
  void set_state(RunState s);
  nlohmann::json status_message() const;
  nlohmann::json handle_instruction(const nlohmann::json& msg);
  nlohmann::json handle_inject(const nlohmann::json& msg);
  nlohmann::json handle_control(const nlohmann::json& msg);
  void reset_engine(StrategyKind strategy);
  void sim_loop();

  Scenario scenario_;
  SimConfig sim_;
  std::unique_ptr<CommandParser> parser_;
  GatewayConfig config_;

  mutable std::mutex engine_mutex_;  // guards engine_, state_, run_
  std::unique_ptr<Engine> engine_;
  RunState state_ = RunState::paused;
  long run_ = 1;
  std::condition_variable wake_;
  bool stopping_ = false;

  std::mutex handle_mutex_;  // instructions are handled one at a time

  mutable std::mutex listeners_mutex_;
  std::map<int, Listener> listeners_;
  int next_listener_ = 1;

  struct Net;
  std::unique_ptr<Net> net_;
  std::thread sim_thread_;
};

}  // namespace coordfield
