#include "autoidx/planner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace autoidx {

namespace {

std::uint32_t usable_prefix_attrs(const std::vector<std::uint32_t>& index_attrs,
                                  const Conjuncts& conjuncts) {
  std::uint32_t prefix = 0;
  for (std::uint32_t attr : index_attrs) {
    bool found = false;
    for (const auto& c : conjuncts) {
      if (c.attr == attr) {
        found = true;
        break;
      }
    }
    if (!found) break;
    ++prefix;
  }
  return prefix;
}

}  // namespace

std::vector<std::size_t> solve_knapsack(std::span<const KnapsackItem> items,
                                        std::uint64_t budget_bytes,
                                        std::uint32_t exact_items_limit) {
  constexpr std::uint64_t kUnit = 1024;
  const std::uint64_t capacity = budget_bytes / kUnit;
  std::vector<std::uint64_t> weights(items.size());
  std::uint64_t weight_sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].footprint == 0) throw ConfigError("knapsack item with zero footprint");
    if (items[i].utility < 0) throw ConfigError("knapsack item with negative utility");
    weights[i] = (items[i].footprint + kUnit - 1) / kUnit;
    weight_sum += weights[i];
  }
  if (items.empty() || capacity == 0) return {};

  const std::uint64_t w_cap = std::min(capacity, weight_sum);
  constexpr std::uint64_t kDpCapLimit = 1ull << 22;
  if (items.size() <= exact_items_limit && w_cap <= kDpCapLimit) {
    const auto cap = static_cast<std::size_t>(w_cap);
    std::vector<double> dp(cap + 1, 0.0);
    std::vector<std::vector<bool>> take(items.size(), std::vector<bool>(cap + 1, false));
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::uint64_t w = weights[i];
      if (w > cap) continue;
      for (std::size_t c = cap; c + 1 > w; --c) {
        const double with = dp[c - w] + items[i].utility;
        if (with > dp[c]) {
          dp[c] = with;
          take[i][c] = true;
        }
      }
    }
    std::vector<std::size_t> chosen;
    std::size_t c = cap;
    for (std::size_t i = items.size(); i-- > 0;) {
      if (take[i][c]) {
        chosen.push_back(i);
        c -= static_cast<std::size_t>(weights[i]);
      }
    }
    std::reverse(chosen.begin(), chosen.end());
    return chosen;
  }

  // Density greedy with one single-swap improvement pass.
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = items[a].utility / static_cast<double>(weights[a]);
    const double db = items[b].utility / static_cast<double>(weights[b]);
    return da > db || (da == db && a < b);
  });
  std::vector<bool> chosen_mask(items.size(), false);
  std::uint64_t used = 0;
  for (std::size_t i : order) {
    if (used + weights[i] <= capacity) {
      chosen_mask[i] = true;
      used += weights[i];
    }
  }
  for (std::size_t out = 0; out < items.size(); ++out) {
    if (chosen_mask[out]) continue;
    for (std::size_t in = 0; in < items.size(); ++in) {
      if (!chosen_mask[in]) continue;
      if (used - weights[in] + weights[out] <= capacity &&
          items[out].utility > items[in].utility) {
        chosen_mask[in] = false;
        chosen_mask[out] = true;
        used = used - weights[in] + weights[out];
        break;
      }
    }
  }
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (chosen_mask[i]) chosen.push_back(i);
  }
  return chosen;
}

std::uint64_t ActionPlanner::candidate_entry_estimate(const IndexKeySpec& spec) const {
  // A built index eventually covers every version in the table.
  return db_->table(spec.table).version_count();
}

std::uint64_t ActionPlanner::candidate_footprint(const IndexKeySpec& spec) const {
  const std::uint64_t per_entry = spec.arity() * sizeof(Value) + 8 + 48;
  return std::max<std::uint64_t>(1, candidate_entry_estimate(spec)) * per_entry;
}

std::vector<CandidateIndex> ActionPlanner::enumerate_candidates(
    std::span<const QueryRecord> window, double theta_freq) const {
  // Window frequency per single attribute and per co-occurring attribute set.
  std::map<std::pair<std::string, std::uint32_t>, double> single_freq;
  std::map<std::pair<std::string, std::vector<std::uint32_t>>, double> set_freq;
  for (const auto& rec : window) {
    if (rec.kind == QueryKind::Insert) continue;
    for (const auto& access : rec.tables) {
      std::vector<std::uint32_t> pred_attrs;
      for (const auto& c : access.predicates) pred_attrs.push_back(c.attr);
      std::sort(pred_attrs.begin(), pred_attrs.end());
      pred_attrs.erase(std::unique(pred_attrs.begin(), pred_attrs.end()), pred_attrs.end());
      for (std::uint32_t attr : pred_attrs) single_freq[{access.table, attr}] += 1.0;
      if (pred_attrs.size() >= 2 && pred_attrs.size() <= kMaxKeyArity) {
        set_freq[{access.table, pred_attrs}] += 1.0;
      }
      for (std::uint32_t attr : access.join_attrs) single_freq[{access.table, attr}] += 1.0;
    }
  }

  const std::set<IndexKeySpec> existing = [&] {
    std::set<IndexKeySpec> out;
    for (const auto& spec : registry_->specs()) out.insert(spec);
    return out;
  }();

  std::vector<CandidateIndex> candidates;
  auto add = [&](const std::string& table, const std::vector<std::uint32_t>& attrs) {
    const Schema& schema = db_->table(table).schema();
    IndexKeySpec spec;
    spec.table = table;
    for (std::uint32_t attr : attrs) spec.attributes.push_back(schema.attributes[attr].name);
    if (existing.contains(spec)) return;
    for (const auto& c : candidates) {
      if (c.spec == spec) return;
    }
    CandidateIndex candidate;
    candidate.spec = spec;
    candidate.footprint = candidate_footprint(spec);
    candidates.push_back(std::move(candidate));
  };

  for (const auto& [key, freq] : single_freq) {
    if (freq >= theta_freq) add(key.first, {key.second});
  }
  for (const auto& [key, freq] : set_freq) {
    if (freq < theta_freq) continue;
    // Composite attribute order: descending single-attribute window
    // frequency, then attribute id.
    std::vector<std::uint32_t> ordered = key.second;
    std::sort(ordered.begin(), ordered.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double fa = single_freq.count({key.first, a}) ? single_freq.at({key.first, a}) : 0.0;
      const double fb = single_freq.count({key.first, b}) ? single_freq.at({key.first, b}) : 0.0;
      return fa > fb || (fa == fb && a < b);
    });
    add(key.first, ordered);
  }
  std::sort(candidates.begin(), candidates.end(), [](const CandidateIndex& a,
                                                     const CandidateIndex& b) {
    return a.spec < b.spec;
  });
  return candidates;
}

bool ActionPlanner::applicable(const IndexKeySpec& spec,
                               const TableAccessRecord& access) const {
  if (spec.table != access.table) return false;
  const auto attrs = spec.resolve(db_->table(spec.table).schema());
  return usable_prefix_attrs(attrs, access.predicates) > 0;
}

double ActionPlanner::best_scan_cost(const TableAccessRecord& access,
                                     const IndexKeySpec* extra) const {
  TableStatsView stats;
  stats.tuple_count = access.table_tuples;
  stats.selectivity = access.realized_selectivity;
  double best = table_scan_cost(stats);
  for (const auto& index : registry_->indexes_for_table(access.table)) {
    if (usable_prefix_attrs(index->attr_indexes(), access.predicates) == 0) continue;
    double cost = best;
    switch (index->scheme()) {
      case IndexScheme::VAP:
        cost = hybrid_scan_cost(
            stats, index->complete()
                       ? 1.0
                       : watermark_fraction(*index, db_->table(access.table)));
        break;
      case IndexScheme::FULL:
        if (!index->complete()) continue;
        cost = index_scan_full_cost(stats);
        break;
      case IndexScheme::VBP:
        if (!index->covers_interval(probe_bounds(*index, access.predicates))) continue;
        cost = index_scan_full_cost(stats);
        break;
    }
    best = std::min(best, cost);
  }
  if (extra != nullptr && applicable(*extra, access)) {
    best = std::min(best, hybrid_scan_cost(stats, 1.0));
  }
  return best;
}

double ActionPlanner::qpu(const IndexKeySpec& spec, std::span<const QueryRecord> window) const {
  double total = 0.0;
  for (const auto& rec : window) {
    if (rec.kind != QueryKind::Scan) continue;
    for (const auto& access : rec.tables) {
      if (!applicable(spec, access)) continue;
      const double without = best_scan_cost(access, nullptr);
      const double with = best_scan_cost(access, &spec);
      total += std::max(0.0, without - with);
    }
  }
  return total;
}

double ActionPlanner::imc(const IndexKeySpec& spec, std::span<const QueryRecord> window,
                          std::uint64_t entry_count) const {
  const double maintain_cost =
      2.0 * std::log2(std::max<double>(static_cast<double>(entry_count), 2.0));
  double total = 0.0;
  for (const auto& rec : window) {
    if (rec.kind == QueryKind::Scan) continue;
    for (const auto& access : rec.tables) {
      if (access.table != spec.table) continue;
      total += static_cast<double>(rec.tuples_written) * maintain_cost;
    }
  }
  return total;
}

double ActionPlanner::overall_utility(const IndexKeySpec& spec,
                                      std::span<const QueryRecord> window,
                                      std::uint64_t entry_count) const {
  return std::max(0.0, qpu(spec, window) - imc(spec, window, entry_count));
}

void ActionPlanner::dampen_redundant(std::vector<CandidateIndex>& candidates,
                                     std::span<const IndexKeySpec> existing) const {
  auto is_proper_prefix = [](const IndexKeySpec& a, const IndexKeySpec& b) {
    if (a.table != b.table || a.attributes.size() >= b.attributes.size()) return false;
    return std::equal(a.attributes.begin(), a.attributes.end(), b.attributes.begin());
  };
  for (auto& candidate : candidates) {
    bool redundant = false;
    for (const auto& other : candidates) {
      if (&other != &candidate && is_proper_prefix(candidate.spec, other.spec)) {
        redundant = true;
        break;
      }
    }
    if (!redundant) {
      for (const auto& spec : existing) {
        if (is_proper_prefix(candidate.spec, spec)) {
          redundant = true;
          break;
        }
      }
    }
    if (redundant) candidate.utility *= params_.redundancy_lambda;
  }
}

std::uint32_t ActionPlanner::next_build_budget(std::uint64_t remaining_pages) const {
  if (remaining_pages == 0) return 0;
  const auto proportional = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(remaining_pages) * params_.build_aggressiveness));
  const std::uint64_t raw = std::max<std::uint64_t>(proportional, params_.min_pages_step);
  return static_cast<std::uint32_t>(
      std::min<std::uint64_t>({raw, params_.pages_per_step, remaining_pages}));
}

std::vector<std::uint32_t> ActionPlanner::build_schedule(std::uint64_t remaining_pages) const {
  std::vector<std::uint32_t> schedule;
  while (remaining_pages > 0 && schedule.size() < 100000) {
    const std::uint32_t step = next_build_budget(remaining_pages);
    schedule.push_back(step);
    remaining_pages -= step;
  }
  return schedule;
}

TransitionPlan ActionPlanner::plan_transition(std::vector<PlanItem> existing,
                                              std::vector<CandidateIndex> candidates,
                                              Classification classification) const {
  TransitionPlan plan;
  double scale = 1.0;
  if (classification == Classification::WriteIntensive) scale = params_.write_scale;
  if (classification == Classification::ReadIntensive) scale = params_.read_scale;
  const double u_min = params_.u_min_base * scale;
  plan.scaled_u_min = u_min;

  // Update-protected indexes are kept outright; if they alone overflow the
  // budget, the lowest-utility ones lose protection.
  std::vector<PlanItem> protected_items;
  std::vector<PlanItem> free_items;
  for (auto& item : existing) {
    (item.update_protected ? protected_items : free_items).push_back(item);
  }
  std::sort(protected_items.begin(), protected_items.end(),
            [](const PlanItem& a, const PlanItem& b) { return a.utility > b.utility; });
  std::uint64_t protected_bytes = 0;
  for (const auto& item : protected_items) protected_bytes += item.footprint;
  while (!protected_items.empty() && protected_bytes > params_.storage_budget) {
    protected_bytes -= protected_items.back().footprint;
    plan.drops.push_back(protected_items.back().spec);
    protected_items.pop_back();
  }

  // Low-utility existing indexes are dropped before the knapsack runs.
  std::vector<KnapsackItem> items;
  std::vector<std::pair<IndexKeySpec, bool>> item_specs;  // (spec, is_existing)
  for (const auto& item : free_items) {
    if (item.utility < u_min) {
      plan.drops.push_back(item.spec);
      continue;
    }
    items.push_back({item.utility, std::max<std::uint64_t>(1, item.footprint)});
    item_specs.emplace_back(item.spec, true);
  }
  std::vector<const CandidateIndex*> admitted;
  for (const auto& candidate : candidates) {
    if (candidate.utility < u_min) continue;
    items.push_back({candidate.utility, std::max<std::uint64_t>(1, candidate.footprint)});
    item_specs.emplace_back(candidate.spec, false);
    admitted.push_back(&candidate);
  }

  const std::uint64_t capacity = params_.storage_budget > protected_bytes
                                     ? params_.storage_budget - protected_bytes
                                     : 0;
  const auto chosen = solve_knapsack(items, capacity, params_.exact_knapsack_items);
  std::vector<bool> selected(items.size(), false);
  for (std::size_t i : chosen) selected[i] = true;

  std::vector<std::pair<double, IndexKeySpec>> creates;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [spec, is_existing] = item_specs[i];
    if (selected[i]) {
      if (!is_existing) creates.emplace_back(items[i].utility, spec);
    } else if (is_existing) {
      plan.drops.push_back(spec);
    }
  }
  std::sort(creates.begin(), creates.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (auto& [_, spec] : creates) plan.creates.push_back(std::move(spec));

  // Projected schedule for the largest pending construction.
  std::uint64_t max_pages = 0;
  for (const auto& spec : plan.creates) {
    const Table& table = db_->table(spec.table);
    max_pages = std::max<std::uint64_t>(max_pages, table.page_count());
  }
  plan.build_schedule = build_schedule(max_pages);
  return plan;
}

}  // namespace autoidx
