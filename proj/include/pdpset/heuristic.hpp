#pragma once

#include <optional>
#include <vector>

#include "pdpset/instance.hpp"
#include "pdpset/plan.hpp"

namespace pdpset {

struct HeuristicOptions {
  // Re-run the transfer pass until no candidate improves the plan. Later
  // passes anchor after the most recent transfer.
  bool phase2_repeat = false;
  // Worker threads for candidate evaluation; 0 or 1 means serial.
  int threads = 1;
  // Drop-off sets up to this size are sequenced exactly.
  int exact_resequence_limit = 6;
};

// Greedy insertion of every request, one at a time, at the cheapest
// (request, vehicle, pickup position, dropoff position).
Plan phase1_construct(const Instance& inst);

struct TransferCandidate {
  int k = -1;  // vehicle indices, k < l
  int l = -1;
  NodeId node = 0;
  std::vector<int> k_to_l;  // request indices
  std::vector<int> l_to_k;
  std::vector<int> seq_k;  // drop-off order after the transfer
  std::vector<int> seq_l;
  double arrival_k = 0.0;
  double arrival_l = 0.0;
  double total = 0.0;    // cost of the plan with this transfer applied
  double savings = 0.0;  // incumbent total minus `total`
};

// Best transfer between vehicles k and l after their last pickup (or last
// transfer), or nullopt when nothing beats the incumbent plan.
std::optional<TransferCandidate> best_transfer_for_pair(const Instance& inst, const Plan& plan,
                                                        int k, int l,
                                                        const HeuristicOptions& opt = {});

// Replaces the tails of both routes with the transfer and the new drop-off
// sequences.
Plan apply_transfer(const Instance& inst, const Plan& plan, const TransferCandidate& cand);

Plan phase2_improve(const Instance& inst, const Plan& plan, const HeuristicOptions& opt = {});

struct VehicleState {
  int vehicle = 0;  // index
  NodeId node = 1;
  double time = 0.0;
};

struct DropoffSequence {
  std::vector<int> order;  // request indices
  double cost = 0.0;       // weighted cost of serving the order from the state
};

// Weighted cost of dropping `order` (all on board) starting from `state`,
// including the final leg to a physical destination.
double dropoff_tail_cost(const Instance& inst, const VehicleState& state,
                         const std::vector<int>& order);

DropoffSequence resequence_dropoffs(const Instance& inst, const VehicleState& state,
                                    const std::vector<int>& dropoffs, int exact_limit = 6);
DropoffSequence cheapest_insertion_dropoffs(const Instance& inst, const VehicleState& state,
                                            const std::vector<int>& dropoffs);

struct SolveResult {
  Plan pdp_plan;
  CostBreakdown pdp_cost;
  Plan pdpset_plan;
  CostBreakdown pdpset_cost;
  double phase1_seconds = 0.0;
  double phase2_seconds = 0.0;
};

// Phase I followed by Phase II (skipped when phase1_only).
SolveResult solve(const Instance& inst, const HeuristicOptions& opt = {}, bool phase1_only = false);

}  // namespace pdpset
