#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "origins/geometry.hpp"
#include "origins/ingest.hpp"
#include "origins/random.hpp"
#include "origins/surface.hpp"

namespace origins {

// How edge length, conflict and the grid maximum combine into a move cost.
//   Literal: D * (1 + lambda * C) / C_max
//   Ratio:   D * (1 + lambda * C / C_max)
enum class CostForm { Literal, Ratio };

std::string_view to_string(CostForm f);
std::optional<CostForm> parse_cost_form(std::string_view s);

// Closest non-absorbing node by degree distance; ties go to the lowest id.
std::size_t nearest_node(LonLat point, const TradeNetwork& network);

// Maximum pmf value met when walking the segment a-b in steps of one grid
// resolution (nearest-cell lookup, both endpoints included). Throws
// InvariantError when an endpoint lies outside the grid.
double edge_conflict(LonLat a, LonLat b, const ConflictDensity& density);

double edge_cost(double length, double conflict, double conflict_max, double lambda,
                 CostForm form = CostForm::Literal);

// Length, conflict and cost of every directed move, laid out parallel to
// TradeNetwork::successors().
class MovementCosts {
 public:
  MovementCosts(const TradeNetwork& network, const ConflictDensity& density, double lambda,
                CostForm form = CostForm::Literal);

  std::span<const double> costs(std::size_t from) const { return costs_[from]; }
  std::span<const double> lengths(std::size_t from) const { return lengths_[from]; }
  std::span<const double> conflicts(std::size_t from) const { return conflicts_[from]; }
  double conflict_max() const { return conflict_max_; }
  double lambda() const { return lambda_; }
  CostForm form() const { return form_; }
  // Cost of moving from -> to; throws when they are not adjacent.
  double cost(const TradeNetwork& network, std::size_t from, std::size_t to) const;

 private:
  std::vector<std::vector<double>> lengths_;
  std::vector<std::vector<double>> conflicts_;
  std::vector<std::vector<double>> costs_;
  double conflict_max_ = 0.0;
  double lambda_ = 0.0;
  CostForm form_ = CostForm::Literal;
};

struct RewardDistribution {
  std::vector<double> mean;  // one entry per absorbing node
  double variance = 0.1;

  static RewardDistribution equal(std::size_t ports, double mean, double variance);
};

// Independent N(mean_i, variance) draws, one per absorbing node.
std::vector<double> draw_terminal_rewards(const RewardDistribution& dist, RandomStream& rng);

// One decision problem: the shared network and movement costs plus this
// individual's terminal rewards. Discount is fixed at 1.
struct MdpInstance {
  std::shared_ptr<const TradeNetwork> network;
  std::shared_ptr<const MovementCosts> costs;
  std::vector<double> terminal_rewards;  // indexed by absorbing slot
  double move_success = 0.98;

  double terminal_reward(std::size_t node) const;
};

MdpInstance build_mdp(std::shared_ptr<const TradeNetwork> network, const ConflictDensity& density,
                      double lambda, std::vector<double> terminal_rewards,
                      CostForm form = CostForm::Literal, double move_success = 0.98);

// Successor chosen at every node; absorbing nodes map to themselves.
struct Policy {
  std::vector<std::size_t> action;

  friend bool operator==(const Policy&, const Policy&) = default;
};

// Policy that steps to the successor with the fewest hops to any absorbing
// node (lowest id on ties). Always proper.
Policy shortest_hop_policy(const TradeNetwork& network);

// Expected total reward from each node under `policy`: absorbing nodes are
// worth their terminal reward, a transit node is worth p * (V(next) - cost)
// + (1 - p) * V(self). Solved exactly by back-substitution along the policy
// graph; throws InvariantError when the policy cycles.
std::vector<double> evaluate_policy(const MdpInstance& mdp, const Policy& policy);

struct PolicySolution {
  Policy policy;
  std::vector<double> value;
  std::size_t improvement_rounds = 0;
};

// Howard policy iteration from the shortest-hop policy. Greedy ties (within
// a relative 1e-12) go to the lower node id. When `value_history` is
// non-null the value vector after every evaluation is appended to it.
PolicySolution policy_iteration(const MdpInstance& mdp,
                                std::vector<std::vector<double>>* value_history = nullptr);

struct TransitTrace {
  int year = 0;
  std::size_t individual = 0;
  CapturePoint capture;
  std::size_t start_node = 0;
  std::vector<std::size_t> path;      // distinct successive nodes, start..exit
  std::vector<std::uint32_t> dwell;   // failed move attempts at each path node
  std::size_t exit_node = 0;
  double movement_cost = 0.0;

  std::size_t attempts() const;
};

// Follows the policy from `start` until an absorbing node is entered. Each
// attempt succeeds with probability move_success; failures only add dwell.
// Cost is charged on successful moves.
TransitTrace simulate_trajectory(const Policy& policy, std::size_t start, const MdpInstance& mdp,
                                 RandomStream& rng);

}  // namespace origins
