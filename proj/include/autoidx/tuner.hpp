#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "autoidx/decision_tree.hpp"
#include "autoidx/executor.hpp"
#include "autoidx/holt_winters.hpp"
#include "autoidx/planner.hpp"
#include "autoidx/workload_monitor.hpp"

namespace autoidx {

enum class DecisionLogicKind { Immediate, Retrospective, Predictive };
enum class TuningFrequency { Fast, Mod, Slow, Disabled };

const char* to_string(DecisionLogicKind dl);
const char* to_string(TuningFrequency f);
std::uint64_t frequency_interval_ms(TuningFrequency f);

struct TunerConfig {
  TuningFrequency frequency = TuningFrequency::Mod;
  DecisionLogicKind decision_logic = DecisionLogicKind::Predictive;
  IndexScheme scheme = IndexScheme::VAP;
  // Deterministic every-Q-queries scheduling used by the harness and tests;
  // wall-clock intervals exist for live runs.
  std::uint32_t queries_per_cycle = 50;
  PlannerParams planner;
  HoltWintersParams holt_winters;
  std::size_t k_min = 20;
  std::uint32_t histogram_refresh_cycles = 10;
  // Lookahead for forecast-driven candidates; 0 derives it from the build
  // schedule length (build an index early enough to be ready when needed).
  std::uint64_t forecast_horizon = 0;
  std::string classifier_tree;  // serialized tree; empty selects the fallback
  bool vbp_immediate = true;    // complete demanded subdomains in one call
};

struct CycleReport {
  std::uint64_t cycle = 0;
  Classification classification = Classification::Insufficient;
  std::vector<std::string> creates;
  std::vector<std::string> drops;
  std::vector<std::pair<std::string, double>> forecasts;  // built indexes
  std::uint64_t budget_used = 0;
  std::uint32_t pages_built = 0;
  std::uint64_t entries_built = 0;
  double elapsed_ms = 0.0;
  bool skipped = false;  // overlapped a still-running cycle
};

std::string cycle_report_csv_header();
std::string cycle_report_csv_row(const CycleReport& report);

// Background index configuration driver: classify, act, learn, once per
// tuning cycle.
class IndexTuner {
 public:
  IndexTuner(Executor& executor, WorkloadMonitor& monitor, TunerConfig config);
  ~IndexTuner();

  CycleReport tuning_cycle();

  // Harness helper: drop every built index (retained in the forecaster).
  std::vector<IndexKeySpec> drop_all_indexes();

  UtilityForecaster& forecaster() { return forecaster_; }
  ActionPlanner& planner() { return planner_; }
  const TunerConfig& config() const { return config_; }
  std::uint64_t cycles_run() const { return cycle_; }

  // Wall-clock mode: periodic cycles on a background thread. A tick that
  // fires while a cycle is still running is skipped, not queued.
  void start();
  void stop();

 private:
  std::vector<QueryRecord> window_for_dl(const WorkloadSnapshot& snapshot) const;
  std::vector<CandidateIndex> assemble_candidates(const std::vector<QueryRecord>& window);
  std::uint64_t forecast_horizon_for(const IndexKeySpec& spec) const;
  void build_vbp_step(PartialIndex& index, const Table& table,
                      const std::vector<QueryRecord>& window, CycleReport& report);

  Executor* executor_;
  WorkloadMonitor* monitor_;
  TunerConfig config_;
  ActionPlanner planner_;
  UtilityForecaster forecaster_;
  std::unique_ptr<TreeNode> tree_;
  std::uint64_t cycle_ = 0;
  std::mutex cycle_mutex_;
  std::set<IndexKeySpec> bootstrapped_;

  std::thread thread_;
  std::atomic<bool> running_{false};
};

}  // namespace autoidx
