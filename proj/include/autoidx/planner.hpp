#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "autoidx/cost_model.hpp"
#include "autoidx/decision_tree.hpp"
#include "autoidx/partial_index.hpp"
#include "autoidx/workload_monitor.hpp"

namespace autoidx {

struct PlannerParams {
  double theta_freq = 3.0;         // window occurrences before a candidate is admitted
  double redundancy_lambda = 0.2;  // utility multiplier for prefix-redundant candidates
  double u_min_base = 1000.0;      // page scan cost x window size x 0.01 by default
  double write_scale = 2.0;        // U_min scaling under a write-intensive label
  double read_scale = 0.5;
  std::uint64_t storage_budget = 256ull << 20;
  std::uint32_t exact_knapsack_items = 20;
  std::uint32_t pages_per_step = 32;  // per-cycle build cap per index
  double build_aggressiveness = 0.1;  // fraction of remaining pages per cycle
  std::uint32_t min_pages_step = 4;
};

enum class CandidateState { Proposed, Building, Built, Dropped };
enum class CandidateSource { NewCandidate, Forecasted };

struct CandidateIndex {
  IndexKeySpec spec;
  CandidateState state = CandidateState::Proposed;
  CandidateSource source = CandidateSource::NewCandidate;
  double utility = 0.0;
  std::uint64_t footprint = 0;  // estimated final size in bytes
};

struct KnapsackItem {
  double utility = 0.0;
  std::uint64_t footprint = 0;  // bytes, > 0
};

// 0-1 knapsack over footprints quantized to 1 KiB units: exact dynamic
// program for small item sets, density greedy with single-swap improvement
// beyond that. Returns chosen item indexes.
std::vector<std::size_t> solve_knapsack(std::span<const KnapsackItem> items,
                                        std::uint64_t budget_bytes,
                                        std::uint32_t exact_items_limit = 20);

struct PlanItem {
  IndexKeySpec spec;
  double utility = 0.0;
  std::uint64_t footprint = 0;
  bool update_protected = false;  // used by UPDATE-predicate scans in the window
};

struct TransitionPlan {
  std::vector<IndexKeySpec> creates;  // ordered by descending utility
  std::vector<IndexKeySpec> drops;
  std::vector<std::uint32_t> build_schedule;  // projected per-cycle page budgets
  double scaled_u_min = 0.0;
};

class ActionPlanner {
 public:
  ActionPlanner(Database& db, IndexRegistry& registry, PlannerParams params)
      : db_(&db), registry_(&registry), params_(params) {}

  const PlannerParams& params() const { return params_; }
  PlannerParams& params() { return params_; }

  // Candidates from the monitored window: one single-attribute candidate per
  // predicate attribute above the admission frequency, composites for
  // attribute sets co-occurring in one conjunct list, join attributes as
  // singles. Specs already in the configuration are excluded.
  std::vector<CandidateIndex> enumerate_candidates(std::span<const QueryRecord> window,
                                                   double theta_freq) const;

  // Query processing utility: summed cost savings over the window's scans,
  // with the candidate assumed fully built.
  double qpu(const IndexKeySpec& spec, std::span<const QueryRecord> window) const;
  // Index maintenance cost over the window's mutators.
  double imc(const IndexKeySpec& spec, std::span<const QueryRecord> window,
             std::uint64_t entry_count) const;
  double overall_utility(const IndexKeySpec& spec, std::span<const QueryRecord> window,
                         std::uint64_t entry_count) const;

  // Multiplies the utility of candidates whose attribute list is a proper
  // prefix of another candidate's or existing index's list by lambda.
  void dampen_redundant(std::vector<CandidateIndex>& candidates,
                        std::span<const IndexKeySpec> existing) const;

  // U_min scaling by classification, pre-knapsack drop of low-utility
  // existing indexes (update-protected ones are kept), knapsack selection
  // under the storage budget, and the projected build schedule.
  TransitionPlan plan_transition(std::vector<PlanItem> existing,
                                 std::vector<CandidateIndex> candidates,
                                 Classification classification) const;

  std::uint64_t candidate_footprint(const IndexKeySpec& spec) const;
  std::uint64_t candidate_entry_estimate(const IndexKeySpec& spec) const;
  // Projected per-cycle page budgets for `remaining_pages`.
  std::vector<std::uint32_t> build_schedule(std::uint64_t remaining_pages) const;
  std::uint32_t next_build_budget(std::uint64_t remaining_pages) const;

 private:
  bool applicable(const IndexKeySpec& spec, const TableAccessRecord& access) const;
  double best_scan_cost(const TableAccessRecord& access, const IndexKeySpec* extra) const;

  Database* db_;
  IndexRegistry* registry_;
  PlannerParams params_;
};

}  // namespace autoidx
