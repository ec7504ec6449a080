#include "origins/transit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "origins/csv.hpp"
#include "origins/error.hpp"

namespace origins {

std::string_view to_string(CostForm f) { return f == CostForm::Literal ? "literal" : "ratio"; }

std::optional<CostForm> parse_cost_form(std::string_view s) {
  const std::string v = csv::lower(s);
  if (v == "literal") return CostForm::Literal;
  if (v == "ratio") return CostForm::Ratio;
  return std::nullopt;
}

std::size_t nearest_node(LonLat point, const TradeNetwork& network) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (network.node(i).absorbing) continue;
    const double d = degree_distance(point, network.node(i).location);
    // Strict comparison keeps the first, i.e. lowest-id, node on ties.
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (!best) throw InvariantError("network has no non-absorbing node");
  return *best;
}

double edge_conflict(LonLat a, LonLat b, const ConflictDensity& density) {
  const GridSpec& grid = density.grid;
  if (!grid.bbox().contains(a) || !grid.bbox().contains(b)) {
    throw InvariantError("edge endpoint outside the conflict grid");
  }
  const double length = degree_distance(a, b);
  const auto steps =
      static_cast<std::size_t>(std::max(1.0, std::ceil(length / grid.resolution() - 1e-9)));
  double best = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(steps);
    const LonLat p{a.lon + t * (b.lon - a.lon), a.lat + t * (b.lat - a.lat)};
    const auto cell = grid.cell_containing(p);
    if (!cell) throw InvariantError("edge sample outside the conflict grid");
    best = std::max(best, density.at(*cell));
  }
  return best;
}

double edge_cost(double length, double conflict, double conflict_max, double lambda,
                 CostForm form) {
  if (form == CostForm::Literal) return length * (1.0 + lambda * conflict) / conflict_max;
  return length * (1.0 + lambda * conflict / conflict_max);
}

MovementCosts::MovementCosts(const TradeNetwork& network, const ConflictDensity& density,
                             double lambda, CostForm form)
    : conflict_max_(density.max()), lambda_(lambda), form_(form) {
  if (!(lambda >= 0.0)) throw InvariantError("lambda must be non-negative");
  if (!(conflict_max_ > 0.0)) throw InvariantError("conflict density has no positive cell");
  const std::size_t n = network.size();
  lengths_.resize(n);
  conflicts_.resize(n);
  costs_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : network.successors(i)) {
      const LonLat a = network.node(i).location;
      const LonLat b = network.node(j).location;
      const double d = degree_distance(a, b);
      if (!(d > 0.0)) {
        throw InvariantError("zero-length edge between " + network.node(i).name + " and " +
                             network.node(j).name);
      }
      const double c = edge_conflict(a, b, density);
      lengths_[i].push_back(d);
      conflicts_[i].push_back(c);
      costs_[i].push_back(edge_cost(d, c, conflict_max_, lambda, form));
    }
  }
}

double MovementCosts::cost(const TradeNetwork& network, std::size_t from, std::size_t to) const {
  const auto succ = network.successors(from);
  auto it = std::lower_bound(succ.begin(), succ.end(), to);
  if (it == succ.end() || *it != to) throw InvariantError("no edge between the given nodes");
  return costs_[from][static_cast<std::size_t>(it - succ.begin())];
}

RewardDistribution RewardDistribution::equal(std::size_t ports, double mean, double variance) {
  return {std::vector<double>(ports, mean), variance};
}

std::vector<double> draw_terminal_rewards(const RewardDistribution& dist, RandomStream& rng) {
  if (dist.variance < 0.0) throw InvariantError("reward variance must be non-negative");
  std::vector<double> out(dist.mean);
  if (dist.variance == 0.0) return out;
  const double sd = std::sqrt(dist.variance);
  for (auto& v : out) v += sd * rng.normal();
  return out;
}

double MdpInstance::terminal_reward(std::size_t node) const {
  return terminal_rewards[*network->absorbing_slot(node)];
}

MdpInstance build_mdp(std::shared_ptr<const TradeNetwork> network, const ConflictDensity& density,
                      double lambda, std::vector<double> terminal_rewards, CostForm form,
                      double move_success) {
  if (terminal_rewards.size() != network->absorbing_count()) {
    throw InvariantError("terminal reward vector length differs from the number of ports");
  }
  if (!(move_success > 0.0 && move_success <= 1.0)) {
    throw InvariantError("move success probability must lie in (0, 1]");
  }
  auto costs = std::make_shared<const MovementCosts>(*network, density, lambda, form);
  return {std::move(network), std::move(costs), std::move(terminal_rewards), move_success};
}

Policy shortest_hop_policy(const TradeNetwork& network) {
  const std::size_t n = network.size();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> hops(n, kUnset);
  std::deque<std::size_t> frontier;
  for (auto a : network.absorbing()) {
    hops[a] = 0;
    frontier.push_back(a);
  }
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop_front();
    for (std::size_t u = 0; u < n; ++u) {
      if (hops[u] == kUnset && network.adjacent(u, v) && u != v) {
        hops[u] = hops[v] + 1;
        frontier.push_back(u);
      }
    }
  }
  Policy policy{std::vector<std::size_t>(n)};
  for (std::size_t s = 0; s < n; ++s) {
    if (network.node(s).absorbing) {
      policy.action[s] = s;
      continue;
    }
    std::size_t best = kUnset;
    for (auto t : network.successors(s)) {
      if (best == kUnset || hops[t] < hops[best]) best = t;
    }
    policy.action[s] = best;
  }
  return policy;
}

std::vector<double> evaluate_policy(const MdpInstance& mdp, const Policy& policy) {
  const TradeNetwork& net = *mdp.network;
  const std::size_t n = net.size();
  const double p = mdp.move_success;
  std::vector<double> value(n, 0.0);
  // 0 = pending, 1 = on the current chain, 2 = solved
  std::vector<std::uint8_t> state(n, 0);
  for (auto a : net.absorbing()) {
    value[a] = mdp.terminal_reward(a);
    state[a] = 2;
  }
  std::vector<std::size_t> chain;
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s] == 2) continue;
    chain.clear();
    std::size_t v = s;
    while (state[v] == 0) {
      state[v] = 1;
      chain.push_back(v);
      v = policy.action[v];
    }
    if (state[v] == 1) throw InvariantError("policy is improper: it cycles without absorbing");
    // Row s of (I - P_pi) V = r_pi reads p V(s) - p V(a) = -p c(s, a).
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const std::size_t u = *it;
      const std::size_t next = policy.action[u];
      const double rhs = p * (value[next] - mdp.costs->cost(net, u, next));
      value[u] = rhs / p;
      state[u] = 2;
    }
  }
  return value;
}

PolicySolution policy_iteration(const MdpInstance& mdp,
                                std::vector<std::vector<double>>* value_history) {
  const TradeNetwork& net = *mdp.network;
  const std::size_t n = net.size();
  std::size_t transit_states = 0;
  std::size_t max_degree = 1;
  for (std::size_t s = 0; s < n; ++s) {
    if (net.node(s).absorbing) continue;
    ++transit_states;
    max_degree = std::max(max_degree, net.successors(s).size());
  }
  const std::size_t cap = transit_states * max_degree + 2;

  PolicySolution sol{shortest_hop_policy(net), {}, 0};
  for (;;) {
    sol.value = evaluate_policy(mdp, sol.policy);
    if (value_history) value_history->push_back(sol.value);

    bool changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (net.node(s).absorbing) continue;
      const auto succ = net.successors(s);
      const auto costs = mdp.costs->costs(s);
      // The stay branch adds (1 - p) V(s) to every action alike, so the
      // greedy choice only compares V(next) - cost.
      double best_q = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < succ.size(); ++k) {
        best_q = std::max(best_q, sol.value[succ[k]] - costs[k]);
      }
      const double tol = 1e-12 * std::max(1.0, std::abs(best_q));
      std::size_t choice = succ.front();
      for (std::size_t k = 0; k < succ.size(); ++k) {
        if (sol.value[succ[k]] - costs[k] >= best_q - tol) {
          choice = succ[k];
          break;
        }
      }
      if (choice != sol.policy.action[s]) {
        sol.policy.action[s] = choice;
        changed = true;
      }
    }
    if (!changed) return sol;
    if (++sol.improvement_rounds > cap) {
      throw InvariantError("policy iteration did not converge within " + std::to_string(cap) +
                           " rounds");
    }
  }
}

std::size_t TransitTrace::attempts() const {
  std::size_t total = path.empty() ? 0 : path.size() - 1;
  for (auto d : dwell) total += d;
  return total;
}

TransitTrace simulate_trajectory(const Policy& policy, std::size_t start, const MdpInstance& mdp,
                                 RandomStream& rng) {
  const TradeNetwork& net = *mdp.network;
  constexpr std::uint32_t kMaxDwell = 1u << 24;
  TransitTrace trace;
  trace.start_node = start;
  trace.path.push_back(start);
  trace.dwell.push_back(0);
  std::size_t current = start;
  while (!net.node(current).absorbing) {
    if (trace.path.size() > net.size()) {
      throw InvariantError("trajectory exceeded the node count; the policy cycles");
    }
    const std::size_t next = policy.action[current];
    if (rng.uniform() < mdp.move_success) {
      trace.movement_cost += mdp.costs->cost(net, current, next);
      trace.path.push_back(next);
      trace.dwell.push_back(0);
      current = next;
    } else if (++trace.dwell.back() > kMaxDwell) {
      throw InvariantError("trajectory step cap exceeded");
    }
  }
  trace.exit_node = current;
  return trace;
}

}  // namespace origins
