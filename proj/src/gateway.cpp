#include "coordfield/gateway.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <fstream>
#include <optional>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "coordfield/trace_io.hpp"

namespace coordfield {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

std::string_view to_string(RunState s) {
  switch (s) {
    case RunState::paused: return "paused";
    case RunState::running: return "running";
    case RunState::finished: return "finished";
    case RunState::aborted: return "aborted";
  }
  return "?";
}

nlohmann::json error_message(std::string_view where, std::string_view reason) {
  return {{"v", kWireVersion}, {"type", "error"}, {"where", where}, {"reason", reason}};
}

nlohmann::json world_message(const WorldMap& world, long run) {
  nlohmann::json obstacles = nlohmann::json::array();
  // run-length rows of the mask; the console only needs rectangles
  const Mask& m = world.mask();
  for (int j = 0; j < m.height(); ++j)
    for (int i = 0; i < m.width();) {
      if (m(i, j) == 0) {
        ++i;
        continue;
      }
      const int start = i;
      while (i < m.width() && m(i, j) != 0) ++i;
      obstacles.push_back({start, j, i - start, 1});
    }
  return {{"v", kWireVersion}, {"type", "world"},           {"run", run},
          {"width", world.width()}, {"height", world.height()}, {"cell_size", world.cell_size()},
          {"obstacle_runs", obstacles}};
}

nlohmann::json snapshot_message(const Snapshot& s, long run) {
  nlohmann::json j = snapshot_to_json(s, true);
  j["v"] = kWireVersion;
  j["type"] = "snapshot";
  j["run"] = run;
  return j;
}

// ---------------------------------------------------------------------------
// Network sessions

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, Gateway& gateway) : ws_(std::move(socket)), gateway_(gateway) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(std::shared_ptr<const std::string> msg) {
    net::post(ws_.get_executor(), [self = shared_from_this(), msg = std::move(msg)] {
      if (self->closed_) return;
      // a stalled client loses messages rather than growing the queue
      if (self->queue_.size() >= kMaxQueue) return;
      self->queue_.push_back(msg);
      if (self->queue_.size() == 1) self->do_write();
    });
  }

 private:
  static constexpr std::size_t kMaxQueue = 256;

  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    listener_ = gateway_.add_listener([weak](const std::string& msg) {
      if (auto self = weak.lock()) self->send(std::make_shared<const std::string>(msg));
    });
    do_read();
  }

  void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    send(std::make_shared<const std::string>(gateway_.handle(text).dump()));
    do_read();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(*queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  void close() {
    closed_ = true;
    queue_.clear();
    if (listener_ >= 0) gateway_.remove_listener(std::exchange(listener_, -1));
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> queue_;
  Gateway& gateway_;
  int listener_ = -1;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, Gateway& gateway) : stream_(std::move(socket)), gateway_(gateway) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), gateway_)->run(std::move(req_));
      return;
    }
    int status = 405;
    std::string body = R"({"error":"method not allowed"})";
    if (req_.method() == http::verb::get) std::tie(status, body) = gateway_.http_get(std::string_view(req_.target().data(), req_.target().size()));
    res_ = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(status), req_.version());
    res_->set(http::field::content_type, "application/json");
    res_->set(http::field::access_control_allow_origin, "*");
    res_->keep_alive(req_.keep_alive());
    res_->body() = std::move(body);
    res_->prepare_payload();
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpSession::on_write, shared_from_this(), res_->need_eof()));
  }

  void on_write(bool close, beast::error_code ec, std::size_t) {
    if (ec) return;
    if (close) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    do_read();
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
  Gateway& gateway_;
};

class Acceptor : public std::enable_shared_from_this<Acceptor> {
 public:
  Acceptor(net::io_context& ioc, const tcp::endpoint& at, Gateway& gateway)
      : ioc_(ioc), acceptor_(ioc), gateway_(gateway) {
    acceptor_.open(at.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(at);
    acceptor_.listen(net::socket_base::max_listen_connections);
  }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }
  void run() { do_accept(); }

 private:
  void do_accept() {
    acceptor_.async_accept(net::make_strand(ioc_),
                           beast::bind_front_handler(&Acceptor::on_accept, shared_from_this()));
  }

  void on_accept(beast::error_code ec, tcp::socket socket) {
    if (!ec) std::make_shared<HttpSession>(std::move(socket), gateway_)->run();
    if (acceptor_.is_open()) do_accept();
  }

  net::io_context& ioc_;
  tcp::acceptor acceptor_;
  Gateway& gateway_;
};

}  // namespace

struct Gateway::Net {
  net::io_context ioc{1};
  std::thread thread;
};

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(Scenario scenario, SimConfig sim, std::unique_ptr<CommandParser> parser, GatewayConfig config)
    : scenario_(std::move(scenario)), sim_(std::move(sim)), parser_(std::move(parser)), config_(std::move(config)) {
  if (!parser_) throw std::invalid_argument("Gateway: a command parser is required");
  if (!(config_.snapshots_per_second > 0.0)) throw ConfigError("snapshot rate must be positive", "rate");
  engine_ = std::make_unique<Engine>(scenario_, sim_);
  if (config_.autostart) state_ = RunState::running;
}

Gateway::~Gateway() { stop(); }

unsigned short Gateway::start() {
  if (net_) throw std::logic_error("Gateway already started");
  net_ = std::make_unique<Net>();
  auto acceptor = std::make_shared<Acceptor>(
      net_->ioc, tcp::endpoint(net::ip::make_address(config_.address), config_.port), *this);
  const unsigned short port = acceptor->port();
  acceptor->run();
  net_->thread = std::thread([this] { net_->ioc.run(); });
  sim_thread_ = std::thread([this] { sim_loop(); });
  return port;
}

void Gateway::stop() {
  {
    std::lock_guard lock(engine_mutex_);
    if (stopping_) return;
    stopping_ = true;
  }
  wake_.notify_all();
  if (sim_thread_.joinable()) sim_thread_.join();
  if (net_) {
    net_->ioc.stop();
    if (net_->thread.joinable()) net_->thread.join();
  }
}

void Gateway::wait() {
  std::unique_lock lock(engine_mutex_);
  wake_.wait(lock, [this] { return stopping_; });
}

RunState Gateway::state() const {
  std::lock_guard lock(engine_mutex_);
  return state_;
}

long Gateway::run_id() const {
  std::lock_guard lock(engine_mutex_);
  return run_;
}

std::shared_ptr<const Snapshot> Gateway::latest() const {
  std::lock_guard lock(engine_mutex_);
  return engine_->latest();
}

int Gateway::add_listener(Listener listener) {
  std::shared_ptr<const Snapshot> snap;
  long run = 0;
  nlohmann::json status;
  {
    std::lock_guard lock(engine_mutex_);
    snap = engine_->latest();
    run = run_;
    status = status_message();
  }
  listener(world_message(snap->world, run).dump());
  listener(status.dump());
  listener(snapshot_message(*snap, run).dump());
  std::lock_guard lock(listeners_mutex_);
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

void Gateway::remove_listener(int id) {
  std::lock_guard lock(listeners_mutex_);
  listeners_.erase(id);
}

void Gateway::broadcast(const nlohmann::json& message) {
  const std::string text = message.dump();
  std::vector<Listener> targets;
  {
    std::lock_guard lock(listeners_mutex_);
    for (const auto& [id, l] : listeners_) targets.push_back(l);
  }
  for (const Listener& l : targets) l(text);
}

// engine_mutex_ held
nlohmann::json Gateway::status_message() const {
  return {{"v", kWireVersion},
          {"type", "status"},
          {"state", to_string(state_)},
          {"run", run_},
          {"step", engine_->step_index()},
          {"strategy", to_string(engine_->config().strategy)}};
}

// engine_mutex_ held
void Gateway::set_state(RunState s) {
  state_ = s;
  broadcast(status_message());
}

void Gateway::tick() {
  std::lock_guard lock(engine_mutex_);
  if (state_ != RunState::running) return;
  std::shared_ptr<const Snapshot> snap;
  try {
    for (int k = 0; k < sim_.snapshot_stride && !engine_->done(); ++k) snap = engine_->step();
  } catch (const InvariantError& e) {
    const auto diag = engine_->latest();
    broadcast(snapshot_message(*diag, run_));
    state_ = RunState::aborted;
    nlohmann::json status = status_message();
    status["reason"] = e.what();
    status["snapshot_step"] = diag->step;
    broadcast(status);
    return;
  }
  for (const auto& [task, reason] : engine_->take_rejected()) {
    nlohmann::json err = error_message("inject", reason);
    err["task"] = task_to_json(task);
    broadcast(err);
  }
  if (snap) broadcast(snapshot_message(*snap, run_));
  if (engine_->done()) set_state(RunState::finished);
}

void Gateway::sim_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / config_.snapshots_per_second));
  auto next = clock::now();
  while (true) {
    {
      std::unique_lock lock(engine_mutex_);
      wake_.wait(lock, [this] { return stopping_ || state_ == RunState::running; });
      if (stopping_) return;
    }
    tick();
    next += period;
    const auto now = clock::now();
    if (next < now) next = now;  // do not try to catch up after a slow tick
    std::unique_lock lock(engine_mutex_);
    wake_.wait_until(lock, next, [this] { return stopping_; });
    if (stopping_) return;
  }
}

// engine_mutex_ held
void Gateway::reset_engine(StrategyKind strategy) {
  // tuning parameters belong to one strategy
  if (strategy != sim_.strategy) sim_.strategy_params = nlohmann::json::object();
  sim_.strategy = strategy;
  engine_ = std::make_unique<Engine>(scenario_, sim_);
  ++run_;
  state_ = RunState::paused;
  broadcast(world_message(scenario_.world, run_));
  broadcast(status_message());
  broadcast(snapshot_message(*engine_->latest(), run_));
}

nlohmann::json Gateway::handle(const std::string& text) {
  std::lock_guard serial(handle_mutex_);
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return error_message("message", std::string("malformed JSON: ") + e.what());
  }
  if (!msg.is_object()) return error_message("message", "message must be a JSON object");
  if (!msg.contains("v") || msg.at("v") != kWireVersion)
    return error_message("message", "unsupported or missing schema version 'v' (expected 1)");
  if (!msg.contains("type") || !msg.at("type").is_string()) return error_message("message", "missing 'type'");
  const std::string type = msg.at("type").get<std::string>();
  if (type == "instruction") return handle_instruction(msg);
  if (type == "inject") return handle_inject(msg);
  if (type == "control") return handle_control(msg);
  return error_message("message", "unknown message type '" + type + "'");
}

namespace {

std::optional<std::string> unexpected_key(const nlohmann::json& msg, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : msg.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) return key;
  return std::nullopt;
}

nlohmann::json ack(std::string_view what) { return {{"v", kWireVersion}, {"type", "ack"}, {"for", what}}; }

}  // namespace

nlohmann::json Gateway::handle_instruction(const nlohmann::json& msg) {
  if (const auto key = unexpected_key(msg, {"v", "type", "text"}))
    return error_message("instruction", "unexpected key '" + *key + "'");
  if (!msg.contains("text") || !msg.at("text").is_string())
    return error_message("instruction", "missing 'text' string");
  const std::string text = msg.at("text").get<std::string>();
  const auto snap = latest();  // immutable; the parser never sees live state
  ParsedCommand parsed;
  try {
    parsed = parser_->parse({text, snap->step}, snap->world);
  } catch (const ParseError& e) {
    nlohmann::json err = error_message("instruction", e.reason());
    err["clause"] = e.clause();
    err["text"] = text;
    return err;
  }
  {
    std::lock_guard lock(engine_mutex_);
    for (const TaskDraft& d : parsed.tasks) engine_->inject(to_task(d));
  }
  nlohmann::json reply = ack("instruction");
  reply["text"] = text;
  reply["parsed"] = to_json(parsed);
  return reply;
}

nlohmann::json Gateway::handle_inject(const nlohmann::json& msg) {
  if (const auto key = unexpected_key(msg, {"v", "type", "x", "y", "w", "sigma", "task_type"}))
    return error_message("inject", "unexpected key '" + *key + "'");
  nlohmann::json task = nlohmann::json::object();
  for (const char* key : {"x", "y", "w", "sigma"})
    if (msg.contains(key)) task[key] = msg.at(key);
  if (msg.contains("task_type")) task["type"] = msg.at("task_type");
  const auto snap = latest();
  ParsedCommand parsed;
  try {
    parsed = parsed_command_from_json({{"tasks", nlohmann::json::array({task})}}, snap->world, msg.dump());
  } catch (const ParseError& e) {
    return error_message("inject", e.reason());
  }
  {
    std::lock_guard lock(engine_mutex_);
    engine_->inject(to_task(parsed.tasks.front()));
  }
  nlohmann::json reply = ack("inject");
  reply["parsed"] = to_json(parsed);
  return reply;
}

nlohmann::json Gateway::handle_control(const nlohmann::json& msg) {
  if (const auto key = unexpected_key(msg, {"v", "type", "action", "strategy"}))
    return error_message("control", "unexpected key '" + *key + "'");
  if (!msg.contains("action") || !msg.at("action").is_string()) return error_message("control", "missing 'action'");
  const std::string action = msg.at("action").get<std::string>();
  if (msg.contains("strategy") && action != "strategy")
    return error_message("control", "'strategy' only goes with action 'strategy'");
  std::unique_lock lock(engine_mutex_);
  if (action == "start") {
    if (state_ == RunState::finished || state_ == RunState::aborted)
      return error_message("control", "run is " + std::string(to_string(state_)) + "; reset first");
    set_state(RunState::running);
    lock.unlock();
    wake_.notify_all();
    return ack("control");
  }
  if (action == "pause") {
    if (state_ == RunState::running) set_state(RunState::paused);
    return ack("control");
  }
  if (action == "reset") {
    reset_engine(sim_.strategy);
    return ack("control");
  }
  if (action == "strategy") {
    if (!msg.contains("strategy") || !msg.at("strategy").is_string())
      return error_message("control", "missing 'strategy'");
    const auto kind = strategy_from_string(msg.at("strategy").get<std::string>());
    if (!kind) return error_message("control", "unknown strategy '" + msg.at("strategy").get<std::string>() + "'");
    if (engine_->step_index() != 0 || state_ != RunState::paused)
      return error_message("control", "strategy is fixed for a run; reset first");
    reset_engine(*kind);
    return ack("control");
  }
  return error_message("control", "unknown action '" + action + "'");
}

std::pair<int, std::string> Gateway::http_get(std::string_view target) const {
  const auto q = target.find('?');
  const std::string_view path = target.substr(0, q);
  if (path == "/health") {
    std::lock_guard lock(engine_mutex_);
    return {200, nlohmann::json{{"status", "ok"},
                                {"state", to_string(state_)},
                                {"run", run_},
                                {"step", engine_->step_index()}}
                     .dump()};
  }
  if (path == "/corpus") {
    try {
      nlohmann::json out = nlohmann::json::array();
      std::ifstream in(config_.data_dir / "corpus" / "gold_corpus.jsonl");
      if (!in) return {404, R"({"error":"no corpus"})"};
      for (std::string line; std::getline(in, line);)
        if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(nlohmann::json::parse(line));
      return {200, out.dump()};
    } catch (const std::exception& e) {
      return {500, nlohmann::json{{"error", e.what()}}.dump()};
    }
  }
  if (path == "/scenarios") {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(config_.data_dir / "scenarios", ec))
      if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return {200, nlohmann::json{{"scenarios", names}}.dump()};
  }
  return {404, R"({"error":"not found"})"};
}

}  // namespace coordfield
