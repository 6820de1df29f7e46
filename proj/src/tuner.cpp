#include "autoidx/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

namespace autoidx {

const char* to_string(DecisionLogicKind dl) {
  switch (dl) {
    case DecisionLogicKind::Immediate: return "immediate";
    case DecisionLogicKind::Retrospective: return "retrospective";
    case DecisionLogicKind::Predictive: return "predictive";
  }
  return "?";
}

const char* to_string(TuningFrequency f) {
  switch (f) {
    case TuningFrequency::Fast: return "FAST";
    case TuningFrequency::Mod: return "MOD";
    case TuningFrequency::Slow: return "SLOW";
    case TuningFrequency::Disabled: return "DIS";
  }
  return "?";
}

std::uint64_t frequency_interval_ms(TuningFrequency f) {
  switch (f) {
    case TuningFrequency::Fast: return 100;
    case TuningFrequency::Mod: return 1000;
    case TuningFrequency::Slow: return 10000;
    case TuningFrequency::Disabled: return 0;
  }
  return 0;
}

std::string cycle_report_csv_header() {
  return "cycle,classification,creates,drops,budget_bytes";
}

namespace {

std::string join_specs(const std::vector<std::string>& specs) {
  std::string out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i) out += ";";
    out += specs[i];
  }
  return out;
}

}  // namespace

std::string cycle_report_csv_row(const CycleReport& report) {
  std::ostringstream out;
  out << report.cycle << "," << to_string(report.classification) << ","
      << join_specs(report.creates) << "," << join_specs(report.drops) << ","
      << report.budget_used;
  return out.str();
}

IndexTuner::IndexTuner(Executor& executor, WorkloadMonitor& monitor, TunerConfig config)
    : executor_(&executor),
      monitor_(&monitor),
      config_(std::move(config)),
      planner_(executor.db(), executor.registry(), config_.planner),
      forecaster_(config_.holt_winters) {
  tree_ = config_.classifier_tree.empty() ? fallback_tree() : parse_tree(config_.classifier_tree);
}

IndexTuner::~IndexTuner() { stop(); }

std::vector<QueryRecord> IndexTuner::window_for_dl(const WorkloadSnapshot& snapshot) const {
  if (config_.decision_logic == DecisionLogicKind::Immediate && !snapshot.records.empty()) {
    return {snapshot.records.back()};
  }
  return snapshot.records;
}

std::uint64_t IndexTuner::forecast_horizon_for(const IndexKeySpec& spec) const {
  if (config_.forecast_horizon > 0) return config_.forecast_horizon;
  const Table& table = executor_->db().table(spec.table);
  return planner_.build_schedule(table.page_count()).size() + 1;
}

std::vector<CandidateIndex> IndexTuner::assemble_candidates(
    const std::vector<QueryRecord>& window) {
  const double theta =
      config_.decision_logic == DecisionLogicKind::Immediate ? 1.0 : config_.planner.theta_freq;
  std::vector<CandidateIndex> candidates = planner_.enumerate_candidates(window, theta);

  // Utilities: newly encountered candidates carry their overall utility over
  // the window; specs the forecaster already knows carry forecasted utility.
  const bool predictive = config_.decision_logic == DecisionLogicKind::Predictive;
  for (auto& candidate : candidates) {
    const HoltWintersState* known =
        predictive ? forecaster_.lookup(candidate.spec) : nullptr;
    if (known != nullptr) {
      candidate.source = CandidateSource::Forecasted;
      const std::uint64_t horizon = forecast_horizon_for(candidate.spec);
      double best = 0.0;
      for (std::uint64_t h = 1; h <= horizon; ++h) {
        best = std::max(best, known->forecast(h));
      }
      candidate.utility = best;
    } else {
      candidate.utility = planner_.overall_utility(
          candidate.spec, window, planner_.candidate_entry_estimate(candidate.spec));
    }
  }

  if (predictive) {
    // Retired or otherwise known specs re-enter through their retained
    // forecasting state even when absent from the current window.
    std::set<IndexKeySpec> present;
    for (const auto& c : candidates) present.insert(c.spec);
    for (const auto& spec : executor_->registry().specs()) present.insert(spec);
    for (const auto& spec : forecaster_.known_specs()) {
      if (present.contains(spec)) continue;
      const std::uint64_t horizon = forecast_horizon_for(spec);
      double best = 0.0;
      for (std::uint64_t h = 1; h <= horizon; ++h) {
        best = std::max(best, *forecaster_.forecast(spec, h));
      }
      if (best <= 0.0) continue;
      CandidateIndex candidate;
      candidate.spec = spec;
      candidate.source = CandidateSource::Forecasted;
      candidate.utility = best;
      candidate.footprint = planner_.candidate_footprint(spec);
      candidates.push_back(std::move(candidate));
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const CandidateIndex& a, const CandidateIndex& b) { return a.spec < b.spec; });
  }
  return candidates;
}

CycleReport IndexTuner::tuning_cycle() {
  std::unique_lock lock(cycle_mutex_, std::try_to_lock);
  CycleReport report;
  if (!lock.owns_lock()) {
    report.skipped = true;
    return report;
  }
  const auto t0 = std::chrono::steady_clock::now();
  report.cycle = ++cycle_;
  monitor_->advance_cycle(cycle_);
  if (config_.histogram_refresh_cycles > 0 &&
      cycle_ % config_.histogram_refresh_cycles == 0) {
    executor_->histograms().refresh();
  }

  IndexRegistry& registry = executor_->registry();

  // Stage I: workload classification.
  const WorkloadSnapshot snapshot = monitor_->snapshot();
  report.classification = classify(*tree_, snapshot, config_.k_min);

  // Stage II: action generation.
  const std::vector<QueryRecord> window = window_for_dl(snapshot);
  std::vector<CandidateIndex> candidates = assemble_candidates(window);

  const bool predictive = config_.decision_logic == DecisionLogicKind::Predictive;
  std::set<IndexKeySpec> update_protected;
  for (const auto& rec : window) {
    if (rec.kind != QueryKind::Update) continue;
    for (const auto& spec : rec.indexes_used) update_protected.insert(spec);
  }

  std::vector<PlanItem> existing;
  std::vector<IndexKeySpec> existing_specs;
  for (const auto& index : registry.all()) {
    PlanItem item;
    item.spec = index->spec();
    item.footprint = planner_.candidate_footprint(item.spec);
    item.update_protected = update_protected.contains(item.spec);
    if (predictive && forecaster_.lookup(item.spec) != nullptr) {
      item.utility = *forecaster_.forecast(item.spec, 1);
    } else {
      item.utility = planner_.overall_utility(item.spec, window, index->entry_count());
    }
    existing_specs.push_back(item.spec);
    existing.push_back(std::move(item));
  }

  planner_.dampen_redundant(candidates, existing_specs);
  TransitionPlan plan = planner_.plan_transition(existing, candidates, report.classification);

  // Apply, amortized: at most one drop per cycle, creations gated by the
  // estimated post-build footprint, one budgeted build step per index.
  if (!plan.drops.empty()) {
    const IndexKeySpec& victim = plan.drops.front();
    if (registry.drop_index(victim)) {
      forecaster_.retire(victim);
      report.drops.push_back(victim.to_string());
    }
  }

  std::uint64_t projected = 0;
  for (const auto& index : registry.all()) {
    projected += planner_.candidate_footprint(index->spec());
  }
  std::map<IndexKeySpec, double> candidate_utility;
  for (const auto& c : candidates) candidate_utility[c.spec] = c.utility;
  for (const auto& spec : plan.creates) {
    const std::uint64_t footprint = planner_.candidate_footprint(spec);
    if (projected + footprint > config_.planner.storage_budget) continue;
    if (registry.find(spec) != nullptr) continue;
    registry.create_partial_index(spec, config_.scheme);
    forecaster_.bootstrap(spec, candidate_utility.count(spec) ? candidate_utility[spec] : 0.0,
                          cycle_);
    bootstrapped_.insert(spec);
    projected += footprint;
    report.creates.push_back(spec.to_string());
  }

  for (const auto& index : registry.all()) {
    const Table& table = executor_->db().table(index->spec().table);
    if (index->scheme() == IndexScheme::VBP) {
      build_vbp_step(*index, table, window, report);
      continue;
    }
    if (index->complete()) continue;
    const std::int64_t rho = index->rho_i();
    const std::uint64_t total_pages = table.page_count();
    const std::uint64_t remaining =
        total_pages > static_cast<std::uint64_t>(rho + 1)
            ? total_pages - static_cast<std::uint64_t>(rho + 1)
            : 0;
    const std::uint32_t pages = planner_.next_build_budget(std::max<std::uint64_t>(remaining, 1));
    BuildBudget budget;
    budget.pages_per_step = std::max<std::uint32_t>(pages, 1);
    const BuildProgress progress = index->build_step(table, budget);
    report.pages_built += progress.pages_indexed;
    report.entries_built += progress.entries_added;
  }

  // Stage III: feed realized utilities back into the forecaster.
  std::set<IndexKeySpec> observe_set;
  for (const auto& spec : registry.specs()) observe_set.insert(spec);
  for (const auto& c : candidates) observe_set.insert(c.spec);
  for (const auto& spec : forecaster_.known_specs()) observe_set.insert(spec);
  for (const auto& spec : observe_set) {
    if (bootstrapped_.contains(spec)) continue;  // seeded this cycle already
    const auto index = registry.find(spec);
    const std::uint64_t entries =
        index ? index->entry_count() : planner_.candidate_entry_estimate(spec);
    const double y = planner_.overall_utility(spec, snapshot.records, entries);
    forecaster_.observe(spec, y, cycle_);
  }
  bootstrapped_.clear();

  for (const auto& index : registry.all()) {
    if (auto f = forecaster_.forecast(index->spec(), 1)) {
      report.forecasts.emplace_back(index->spec().to_string(), *f);
    }
  }
  report.budget_used = registry.total_footprint();
  report.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void IndexTuner::build_vbp_step(PartialIndex& index, const Table& table,
                                const std::vector<QueryRecord>& window, CycleReport& report) {
  if (config_.vbp_immediate) return;  // the executor populates on the query path
  // Most demanded uncovered interval among the window's scans.
  std::map<std::pair<CompositeKey, CompositeKey>, std::uint64_t> demand;
  for (const auto& rec : window) {
    if (rec.kind != QueryKind::Scan) continue;
    for (const auto& access : rec.tables) {
      if (access.table != index.spec().table) continue;
      if (usable_prefix(index, access.predicates) == 0) continue;
      const KeyInterval bounds = probe_bounds(index, access.predicates);
      if (index.covers_interval(bounds)) continue;
      demand[{bounds.lo, bounds.hi}] += 1;
    }
  }
  if (demand.empty()) return;
  auto best = demand.begin();
  for (auto it = demand.begin(); it != demand.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  BuildBudget budget;
  budget.pages_per_step = config_.planner.pages_per_step;
  budget.max_visits_per_step =
      static_cast<std::uint64_t>(config_.planner.pages_per_step) * table.page_capacity();
  const SubdomainProgress progress = index.build_subdomain_step(
      table, {best->first.first, best->first.second}, budget, /*immediate=*/false);
  report.entries_built += progress.entries_added;
}

std::vector<IndexKeySpec> IndexTuner::drop_all_indexes() {
  std::lock_guard lock(cycle_mutex_);
  IndexRegistry& registry = executor_->registry();
  std::vector<IndexKeySpec> dropped = registry.specs();
  for (const auto& spec : dropped) {
    registry.drop_index(spec);
    forecaster_.retire(spec);
  }
  return dropped;
}

void IndexTuner::start() {
  if (config_.frequency == TuningFrequency::Disabled || running_.load()) return;
  running_.store(true);
  thread_ = std::thread([this] {
    const auto interval = std::chrono::milliseconds(frequency_interval_ms(config_.frequency));
    while (running_.load()) {
      std::this_thread::sleep_for(interval);
      if (!running_.load()) break;
      tuning_cycle();
    }
  });
}

void IndexTuner::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
}

}  // namespace autoidx
