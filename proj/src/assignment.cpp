#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "coordfield/baselines.hpp"
#include "coordfield/rng.hpp"

namespace coordfield {

AssignmentProblem::AssignmentProblem(std::vector<int> uav_ids, std::vector<int> task_ids,
                                     std::vector<double> pair_costs, double lambda_balance)
    : uav_ids_(std::move(uav_ids)), task_ids_(std::move(task_ids)), pair_(std::move(pair_costs)),
      lambda_(lambda_balance) {
  if (pair_.size() != uav_ids_.size() * task_ids_.size())
    throw std::invalid_argument("AssignmentProblem: cost matrix size mismatch");
}

AssignmentProblem AssignmentProblem::build(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                                           DistanceCache* cache, double lambda_balance) {
  DistanceCache local(world);
  DistanceCache& distances = cache ? *cache : local;
  const double mismatch = world.extent_x() + world.extent_y();
  std::vector<int> uav_ids;
  std::vector<const Task*> active;
  std::vector<int> task_ids;
  for (const Uav& u : uavs) uav_ids.push_back(u.id);
  for (const Task& t : tasks)
    if (t.active()) {
      active.push_back(&t);
      task_ids.push_back(t.id);
    }
  std::vector<double> cost;
  cost.reserve(uavs.size() * active.size());
  for (const Uav& u : uavs)
    for (const Task* t : active) {
      double d = distances.distance(*t, u.position);
      if (!std::isfinite(d)) d = kUnreachableCost;
      cost.push_back(d + (u.type == t->type ? 0.0 : mismatch));
    }
  return AssignmentProblem(std::move(uav_ids), std::move(task_ids), std::move(cost), lambda_balance);
}

int AssignmentProblem::cap() const {
  if (task_ids_.empty()) return 0;
  const auto u = static_cast<int>(uav_ids_.size());
  const auto t = static_cast<int>(task_ids_.size());
  return (u + t - 1) / t + 1;
}

bool AssignmentProblem::feasible(std::span<const int> choice) const {
  if (choice.size() != uav_ids_.size()) return false;
  std::vector<int> counts(task_ids_.size(), 0);
  for (int t : choice) {
    if (t < 0 || static_cast<std::size_t>(t) >= task_ids_.size()) return false;
    if (++counts[static_cast<std::size_t>(t)] > cap()) return false;
  }
  return true;
}

double AssignmentProblem::evaluate(std::span<const int> choice) const {
  if (task_ids_.empty()) return 0.0;
  if (!feasible(choice)) throw std::invalid_argument("AssignmentProblem: infeasible choice");
  std::vector<double> counts(task_ids_.size(), 0.0);
  double sum = 0.0;
  for (std::size_t u = 0; u < choice.size(); ++u) {
    sum += pair(u, static_cast<std::size_t>(choice[u]));
    counts[static_cast<std::size_t>(choice[u])] += 1.0;
  }
  const double mean = static_cast<double>(choice.size()) / static_cast<double>(counts.size());
  double var = 0.0;
  for (double c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size());
  return sum + lambda_ * var;
}

Assignment AssignmentProblem::to_assignment(std::span<const int> choice) const {
  Assignment a;
  std::vector<int> counts(task_ids_.size(), 0);
  for (std::size_t u = 0; u < choice.size(); ++u) {
    a.pairs.emplace_back(uav_ids_[u], task_ids_[static_cast<std::size_t>(choice[u])]);
    ++counts[static_cast<std::size_t>(choice[u])];
  }
  std::sort(a.pairs.begin(), a.pairs.end());
  for (std::size_t t = 0; t < task_ids_.size(); ++t)
    if (counts[t] == 0) a.unassigned.push_back(task_ids_[t]);
  return a;
}

bool BestChoice::offer(const std::vector<int>& candidate, double candidate_cost) {
  if (choice.empty()) {
    choice = candidate;
    cost = candidate_cost;
    return true;
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(cost));
  const bool better = candidate_cost < cost - tol;
  const bool tie = !better && std::abs(candidate_cost - cost) <= tol && candidate < choice;
  if (better || tie) {
    choice = candidate;
    cost = candidate_cost;
    return true;
  }
  return false;
}

std::vector<int> decode_scores(const AssignmentProblem& problem, std::span<const double> scores) {
  const std::size_t nt = problem.task_count();
  std::vector<int> choice(problem.uav_count(), 0);
  std::vector<int> counts(nt, 0);
  for (std::size_t u = 0; u < problem.uav_count(); ++u) {
    std::size_t best = nt;
    for (std::size_t t = 0; t < nt; ++t) {
      if (counts[t] >= problem.cap()) continue;
      if (best == nt || scores[u * nt + t] < scores[u * nt + best]) best = t;
    }
    choice[u] = static_cast<int>(best);
    ++counts[best];
  }
  return choice;
}

std::vector<int> solve_greedy(const AssignmentProblem& problem) {
  const std::size_t nt = problem.task_count();
  if (nt == 0) return {};
  std::vector<int> choice(problem.uav_count(), 0);
  std::vector<int> counts(nt, 0);
  for (std::size_t u = 0; u < problem.uav_count(); ++u) {
    std::size_t best = nt;
    for (int pass = 0; pass < 2 && best == nt; ++pass) {
      const int limit = pass == 0 ? 1 : problem.cap();
      for (std::size_t t = 0; t < nt; ++t) {
        if (counts[t] >= limit) continue;
        if (best == nt || problem.pair(u, t) < problem.pair(u, best)) best = t;
      }
    }
    choice[u] = static_cast<int>(best);
    ++counts[best];
  }
  return choice;
}

std::vector<int> solve_aco(const AssignmentProblem& problem, const AcoParams& params, std::uint64_t seed) {
  const std::size_t nu = problem.uav_count();
  const std::size_t nt = problem.task_count();
  if (nt == 0 || nu == 0) return {};
  Rng rng = make_rng(seed, "baseline.aco");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> pheromone(nu * nt, 1.0);
  std::vector<double> desirability(nu * nt);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t t = 0; t < nt; ++t)
      desirability[u * nt + t] = std::pow(1.0 / (problem.pair(u, t) + 1.0), params.beta);

  BestChoice best;
  // Deposit scale: cost of the greedy tour, so deposits start near 1.
  const double q = problem.evaluate(solve_greedy(problem));
  std::vector<double> weights(nt);
  std::vector<std::vector<int>> tours(static_cast<std::size_t>(params.n_ants));
  std::vector<double> costs(static_cast<std::size_t>(params.n_ants));

  for (int it = 0; it < params.iterations; ++it) {
    for (int ant = 0; ant < params.n_ants; ++ant) {
      std::vector<int> counts(nt, 0);
      std::vector<int>& tour = tours[static_cast<std::size_t>(ant)];
      tour.assign(nu, 0);
      for (std::size_t u = 0; u < nu; ++u) {
        double total = 0.0;
        for (std::size_t t = 0; t < nt; ++t) {
          const double tau = pheromone[u * nt + t];
          weights[t] = counts[t] < problem.cap()
                           ? (params.alpha == 1.0 ? tau : std::pow(tau, params.alpha)) * desirability[u * nt + t]
                           : 0.0;
          total += weights[t];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
          double r = unit(rng) * total;
          pick = nt - 1;
          for (std::size_t t = 0; t < nt; ++t) {
            if (weights[t] == 0.0) continue;
            if (r < weights[t]) {
              pick = t;
              break;
            }
            r -= weights[t];
          }
          while (weights[pick] == 0.0) --pick;
        } else {
          while (counts[pick] >= problem.cap()) ++pick;
        }
        tour[u] = static_cast<int>(pick);
        ++counts[pick];
      }
      costs[static_cast<std::size_t>(ant)] = problem.evaluate(tour);
      best.offer(tour, costs[static_cast<std::size_t>(ant)]);
    }
    for (double& p : pheromone) p = std::max(p * (1.0 - params.evaporation), 1e-12);
    for (int ant = 0; ant < params.n_ants; ++ant)
      for (std::size_t u = 0; u < nu; ++u)
        pheromone[u * nt + static_cast<std::size_t>(tours[static_cast<std::size_t>(ant)][u])] +=
            q / costs[static_cast<std::size_t>(ant)];
    // elitist reinforcement of the best tour so far
    for (std::size_t u = 0; u < nu; ++u) pheromone[u * nt + static_cast<std::size_t>(best.choice[u])] += q / best.cost;
  }
  return best.choice;
}

namespace {

struct Agent {
  std::vector<double> x;
  double fitness = std::numeric_limits<double>::infinity();
};

double evaluate_scores(const AssignmentProblem& problem, const std::vector<double>& x, BestChoice& best) {
  const auto choice = decode_scores(problem, x);
  const double cost = problem.evaluate(choice);
  best.offer(choice, cost);
  return cost;
}

// Folds a coordinate back into [0, 1]. Clamping piles keys onto the bounds,
// where the argmin decoding sees ties.
double reflect_unit(double v) {
  v = std::fmod(std::abs(v), 2.0);
  return v > 1.0 ? 2.0 - v : v;
}

std::vector<Agent> random_population(std::size_t n, std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Agent> pop(n);
  for (Agent& a : pop) {
    a.x.resize(dim);
    for (double& v : a.x) v = unit(rng);
  }
  return pop;
}

}  // namespace

std::vector<int> solve_gwo(const AssignmentProblem& problem, const GwoParams& params, std::uint64_t seed) {
  const std::size_t dim = problem.uav_count() * problem.task_count();
  if (dim == 0) return {};
  Rng rng = make_rng(seed, "baseline.gwo");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pack = random_population(static_cast<std::size_t>(params.pack_size), dim, rng);
  BestChoice best;
  Agent alpha, beta, delta;
  const auto rank = [&](const Agent& w) {
    if (w.fitness < alpha.fitness) {
      delta = beta;
      beta = alpha;
      alpha = w;
    } else if (w.fitness < beta.fitness) {
      delta = beta;
      beta = w;
    } else if (w.fitness < delta.fitness) {
      delta = w;
    }
  };
  for (Agent& w : pack) {
    w.fitness = evaluate_scores(problem, w.x, best);
    rank(w);
  }
  if (beta.x.empty()) beta = alpha;
  if (delta.x.empty()) delta = beta;

  for (int it = 0; it < params.iterations; ++it) {
    const double a = 2.0 - 2.0 * it / params.iterations;
    for (Agent& w : pack) {
      for (std::size_t d = 0; d < dim; ++d) {
        double sum = 0.0;
        for (const Agent* leader : {&alpha, &beta, &delta}) {
          const double big_a = 2.0 * a * unit(rng) - a;
          const double c = 2.0 * unit(rng);
          const double dist = std::abs(c * leader->x[d] - w.x[d]);
          sum += leader->x[d] - big_a * dist;
        }
        w.x[d] = reflect_unit(sum / 3.0);
      }
    }
    for (Agent& w : pack) {
      w.fitness = evaluate_scores(problem, w.x, best);
      rank(w);
    }
  }
  return best.choice;
}

std::vector<int> solve_woa(const AssignmentProblem& problem, const WoaParams& params, std::uint64_t seed) {
  const std::size_t dim = problem.uav_count() * problem.task_count();
  if (dim == 0) return {};
  Rng rng = make_rng(seed, "baseline.woa");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(params.pod_size) - 1);
  auto pod = random_population(static_cast<std::size_t>(params.pod_size), dim, rng);
  BestChoice best;
  Agent leader;
  for (Agent& w : pod) {
    w.fitness = evaluate_scores(problem, w.x, best);
    if (w.fitness < leader.fitness) leader = w;
  }

  for (int it = 0; it < params.iterations; ++it) {
    const double a = 2.0 - 2.0 * it / params.iterations;
    for (Agent& w : pod) {
      const double big_a = 2.0 * a * unit(rng) - a;
      const double l = 2.0 * unit(rng) - 1.0;
      const double p = unit(rng);
      if (p < 0.5) {
        // encircle the leader, or search around a random whale when |A| >= 1
        const std::vector<double> target = std::abs(big_a) < 1.0 ? leader.x : pod[pick(rng)].x;
        // A and C are random vectors; one scalar per whale would only rescale
        // the leader's keys, which the argmin decoding cannot see
        for (std::size_t d = 0; d < dim; ++d) {
          const double ad = 2.0 * a * unit(rng) - a;
          const double cd = 2.0 * unit(rng);
          const double dist = std::abs(cd * target[d] - w.x[d]);
          w.x[d] = reflect_unit(target[d] - ad * dist);
        }
      } else {
        const double spiral = std::exp(params.spiral_b * l) * std::cos(2.0 * std::numbers::pi * l);
        for (std::size_t d = 0; d < dim; ++d) {
          const double dist = std::abs(leader.x[d] - w.x[d]);
          w.x[d] = reflect_unit(dist * spiral + leader.x[d]);
        }
      }
    }
    for (Agent& w : pod) {
      w.fitness = evaluate_scores(problem, w.x, best);
      if (w.fitness < leader.fitness) leader = w;
    }
  }
  return best.choice;
}

Assignment assign_aco(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const AcoParams& params, std::uint64_t seed) {
  const auto problem = AssignmentProblem::build(world, tasks, uavs);
  return problem.to_assignment(solve_aco(problem, params, seed));
}

Assignment assign_gwo(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const GwoParams& params, std::uint64_t seed) {
  const auto problem = AssignmentProblem::build(world, tasks, uavs);
  return problem.to_assignment(solve_gwo(problem, params, seed));
}

Assignment assign_woa(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const WoaParams& params, std::uint64_t seed) {
  const auto problem = AssignmentProblem::build(world, tasks, uavs);
  return problem.to_assignment(solve_woa(problem, params, seed));
}

}  // namespace coordfield
