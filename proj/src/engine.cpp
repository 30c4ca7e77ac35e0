#include "coordfield/engine.hpp"

#include <algorithm>
#include <cmath>

#include "coordfield/rng.hpp"

namespace coordfield {

void SimConfig::validate(const WorldMap& world) const {
  if (t_max < 1) throw ConfigError("t_max must be at least 1", "steps");
  if (snapshot_stride < 1) throw ConfigError("snapshot stride must be at least 1", "snapshot_stride");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive", "dt");
  if (phi_stride < 0) throw ConfigError("phi stride must not be negative", "phi_stride");
  field.validate(world.cell_size());
}

MetricsReport MetricsTally::report() const {
  MetricsReport m;
  m.cr = injected == 0 ? 1.0 : static_cast<double>(completed) / injected;
  m.ce = weight_injected <= 0.0 ? 1.0 : std::clamp(weight_serviced / weight_injected, 0.0, 1.0);
  m.per_uav_task_counts = credits;
  m.tlb = task_load_balance(credits);
  m.uur = steps == 0 ? 0.0 : busy_sum / static_cast<double>(steps);
  return m;
}

Engine::Engine(Scenario scenario, SimConfig config)
    : state_(std::move(scenario)),
      config_(std::move(config)),
      field_(state_.world.shared_mask(), state_.world.cell_size(), config_.field) {
  config_.validate(state_.world);
  strategy_ = make_strategy(config_.strategy, config_.strategy_params, derive_seed(config_.seed, "strategy"));
  trace_.seed = config_.seed;
  trace_.strategy = std::string(to_string(config_.strategy));
  for (const Uav& u : state_.uavs) trace_.uav_ids.push_back(u.id);
  tally_.credits.assign(state_.uavs.size(), 0);
  for (const Task& t : state_.tasks) {
    record_injection(t);
    next_task_id_ = std::max(next_task_id_, t.id + 1);
  }
  field_.rebuild_phi(state_.tasks);
  for (Uav& u : state_.uavs) u = update_capability(u, state_.tasks);
  check_invariants();
  publish();
}

void Engine::inject(Task draft) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back(std::move(draft));
}

std::vector<std::pair<Task, std::string>> Engine::take_rejected() {
  std::lock_guard lock(queue_mutex_);
  return std::exchange(rejected_, {});
}

void Engine::record_injection(const Task& t) {
  trace_.events.push_back({step_, TaskEventKind::injected, t.id, t.weight, {}});
  ++tally_.injected;
  tally_.weight_injected += t.weight;
}

void Engine::drain_queue() {
  std::deque<Task> pending;
  {
    std::lock_guard lock(queue_mutex_);
    pending.swap(queue_);
  }
  for (Task& t : pending) {
    if (t.id == 0) t.id = next_task_id_;
    t.created_at = step_;
    t.state = TaskState::active;
    t.completed_at = -1;
    t.completed_by.clear();
    try {
      state_.tasks = inject_task(state_.tasks, t, state_.world);  // copy: a rejection keeps the set
    } catch (const ConfigError& e) {
      std::lock_guard lock(queue_mutex_);
      rejected_.emplace_back(t, e.what());
      continue;
    }
    next_task_id_ = std::max(next_task_id_, t.id + 1);
    record_injection(t);
  }
}

std::shared_ptr<const Snapshot> Engine::step() {
  ++step_;
  try {
    advance();
  } catch (const InvariantError&) {
    publish();  // diagnostic snapshot of the broken state
    throw;
  }
  return publish();
}

void Engine::advance() {
  drain_queue();
  field_.rebuild_phi(state_.tasks);
  if (strategy_->uses_velocity_field()) field_.advance_velocity();
  for (Uav& u : state_.uavs) u = update_capability(u, state_.tasks);

  const StepContext ctx{state_.world, state_.tasks, state_.uavs, field_, step_, config_.dt};
  std::vector<Uav> moved = strategy_->step(ctx);
  if (moved.size() != state_.uavs.size()) throw InvariantError("strategy changed the roster size");
  state_.uavs = std::move(moved);

  ServiceOutcome service = service_tick(state_.tasks, state_.uavs, config_.dt, step_);
  state_.tasks = std::move(service.tasks);
  for (const ServiceRecord& rec : service.records) {
    trace_.events.push_back({step_, TaskEventKind::serviced, rec.task_id, rec.amount, rec.uav_ids});
    tally_.weight_serviced += rec.amount;
    if (!rec.completed) continue;
    const Task* t = find_task(state_.tasks, rec.task_id);
    trace_.events.push_back({step_, TaskEventKind::completed, rec.task_id, 0.0, t->completed_by});
    ++tally_.completed;
    for (int id : t->completed_by)
      for (std::size_t k = 0; k < trace_.uav_ids.size(); ++k)
        if (trace_.uav_ids[k] == id) ++tally_.credits[k];
  }

  state_.world = step_entities(state_.world, config_.dt);

  std::vector<UavStatus> row;
  row.reserve(state_.uavs.size());
  for (const Uav& u : state_.uavs) row.push_back(u.status);
  if (!row.empty())
    tally_.busy_sum += static_cast<double>(std::count_if(row.begin(), row.end(),
                                                         [](UavStatus s) { return s != UavStatus::idle; })) /
                       static_cast<double>(row.size());
  trace_.statuses.push_back(std::move(row));
  ++tally_.steps;
  trace_.steps = step_;

  check_invariants();
}

bool Engine::done() const {
  if (step_ >= config_.t_max) return true;
  if (!config_.stop_when_complete || tally_.injected == 0 || tally_.completed < tally_.injected) return false;
  std::lock_guard lock(queue_mutex_);
  return queue_.empty();
}

std::shared_ptr<const Snapshot> Engine::latest() const {
  std::lock_guard lock(snapshot_mutex_);
  return latest_;
}

void Engine::check_invariants() const {
  check_world_invariants(state_.world);
  check_task_invariants(state_.tasks, state_.world);
  check_uav_invariants(state_.uavs, state_.world.mask(), state_.world.cell_size(), config_.field.v_max);
  if (config_.check_every_step) {
    field_.check_invariants();
    check_trace(trace_);
  }
}

std::shared_ptr<const Snapshot> Engine::publish() {
  const int w = state_.world.width();
  const int h = state_.world.height();
  int stride = config_.phi_stride;
  if (stride == 0) stride = std::max(1, (std::max(w, h) + 99) / 100);
  auto snap = std::make_shared<Snapshot>(Snapshot{step_, state_.world, state_.tasks, state_.uavs, stride, {}, tally_.report()});
  const int sw = (w + stride - 1) / stride;
  const int sh = (h + stride - 1) / stride;
  for (Role r : kRoles) {
    ScalarLattice coarse(sw, sh, 0.0);
    const ScalarLattice& full = field_.phi(r);
    for (int j = 0; j < sh; ++j)
      for (int i = 0; i < sw; ++i) coarse(i, j) = full(i * stride, j * stride);
    snap->phi[role_index(r)] = std::move(coarse);
  }
  std::shared_ptr<const Snapshot> out = std::move(snap);
  std::lock_guard lock(snapshot_mutex_);
  latest_ = out;
  return out;
}

RunResult run(Scenario scenario, const SimConfig& config, const SnapshotSink& sink) {
  Engine engine(std::move(scenario), config);
  std::shared_ptr<const Snapshot> last = engine.latest();
  if (sink) sink(*last);
  while (!engine.done()) {
    last = engine.step();
    if (sink && (last->step % config.snapshot_stride == 0 || engine.done())) sink(*last);
  }
  RunResult result{engine.trace(), compute_metrics(engine.trace()), last};
  return result;
}

}  // namespace coordfield
