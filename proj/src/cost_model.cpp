#include "autoidx/cost_model.hpp"

#include <algorithm>
#include <cmath>

namespace autoidx {

double table_scan_cost(const TableStatsView& t) {
  return static_cast<double>(t.tuple_count);
}

double index_scan_full_cost(const TableStatsView& t) {
  const double n = static_cast<double>(t.tuple_count);
  return std::log2(std::max(n, 2.0)) + kRandomAccessPenalty * t.selectivity * n;
}

double hybrid_scan_cost(const TableStatsView& t, double w) {
  w = std::clamp(w, 0.0, 1.0);
  const double n = static_cast<double>(t.tuple_count);
  return w * std::log2(std::max(n, 2.0)) + kRandomAccessPenalty * t.selectivity * n * w +
         (1.0 - w) * n;
}

double estimate_cost(AccessPath path, const TableStatsView& t, const IndexStateView& index) {
  switch (path) {
    case AccessPath::TableScan:
      return table_scan_cost(t);
    case AccessPath::IndexScanFull:
      return index_scan_full_cost(t);
    case AccessPath::HybridScan:
      return hybrid_scan_cost(t, index.complete ? 1.0 : index.watermark_fraction);
    case AccessPath::VbpScan:
      return index.covers_interval ? index_scan_full_cost(t) : table_scan_cost(t);
  }
  return table_scan_cost(t);
}

std::uint32_t usable_prefix(const PartialIndex& index, const Conjuncts& conjuncts) {
  std::uint32_t prefix = 0;
  for (std::uint32_t attr : index.attr_indexes()) {
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

KeyInterval probe_bounds(const PartialIndex& index, const Conjuncts& conjuncts) {
  const std::uint32_t prefix = usable_prefix(index, conjuncts);
  CompositeKey lo;
  CompositeKey hi;
  for (std::uint32_t i = 0; i < kMaxKeyArity; ++i) {
    lo.v[i] = kValueMin;
    hi.v[i] = kValueMax;
  }
  for (std::uint32_t i = 0; i < prefix; ++i) {
    const std::uint32_t attr = index.attr_indexes()[i];
    for (const auto& c : conjuncts) {
      if (c.attr == attr) {
        lo.v[i] = std::max(lo.v[i], c.lo);
        hi.v[i] = std::min(hi.v[i], c.hi);
      }
    }
  }
  return {lo, hi};
}

double watermark_fraction(const PartialIndex& index, const Table& table) {
  if (index.complete()) return 1.0;
  const std::uint64_t tail = table.tail_linear();
  if (tail == 0) return 1.0;
  const std::int64_t rho = index.rho_i();
  const std::uint64_t covered =
      rho < 0 ? 0 : (static_cast<std::uint64_t>(rho) + 1) * table.page_capacity();
  return std::clamp(static_cast<double>(covered) / static_cast<double>(tail), 0.0, 1.0);
}

namespace {

int tie_rank(AccessPath p) {
  switch (p) {
    case AccessPath::TableScan: return 0;
    case AccessPath::HybridScan: return 1;
    case AccessPath::IndexScanFull: return 2;
    case AccessPath::VbpScan: return 3;
  }
  return 4;
}

TablePlan choose_for_table(const Database& db, PlannerContext& ctx, const TableRef& ref) {
  const Table& table = db.table(ref.table);
  TableStatsView stats;
  stats.tuple_count = table.version_count();
  stats.selectivity =
      ref.predicates.empty() ? 1.0
                             : ctx.histograms->estimate_selectivity(ref.table, ref.predicates);

  TablePlan best;
  best.path = AccessPath::TableScan;
  best.cost = table_scan_cost(stats);

  if (ctx.registry == nullptr || ref.predicates.empty()) return best;
  for (const auto& index : ctx.registry->indexes_for_table(ref.table)) {
    if (usable_prefix(*index, ref.predicates) == 0) continue;
    TablePlan candidate;
    candidate.index = index;
    IndexStateView state;
    switch (index->scheme()) {
      case IndexScheme::VAP: {
        candidate.path = AccessPath::HybridScan;
        state.watermark_fraction = watermark_fraction(*index, table);
        state.complete = index->complete();
        break;
      }
      case IndexScheme::FULL: {
        if (!index->complete()) continue;  // unusable until fully built
        candidate.path = AccessPath::IndexScanFull;
        state.complete = true;
        break;
      }
      case IndexScheme::VBP: {
        candidate.path = AccessPath::VbpScan;
        state.covers_interval = index->covers_interval(probe_bounds(*index, ref.predicates));
        break;
      }
    }
    candidate.cost = estimate_cost(candidate.path, stats, state);
    const bool vbp_preferred = ctx.prefer_vbp && candidate.path == AccessPath::VbpScan;
    if (candidate.cost < best.cost ||
        (vbp_preferred && candidate.cost <= best.cost &&
         best.path == AccessPath::TableScan) ||
        (candidate.cost == best.cost && tie_rank(candidate.path) < tie_rank(best.path))) {
      best = candidate;
    }
  }
  return best;
}

}  // namespace

Plan choose_access_path(const Database& db, PlannerContext& ctx, const Query& query) {
  Plan plan;
  if (query.kind == QueryKind::Insert) {
    plan.per_table.push_back(TablePlan{AccessPath::TableScan, nullptr, 0.0});
    return plan;
  }
  for (const auto& ref : query.tables) {
    plan.per_table.push_back(choose_for_table(db, ctx, ref));
    plan.cost += plan.per_table.back().cost;
  }
  if (query.join && query.tables.size() == 2) {
    plan.join = JoinStrategy::HashJoin;
    // Index nested loop needs a usable complete ordered index whose leading
    // attribute is the inner join attribute.
    if (ctx.registry != nullptr) {
      for (const auto& index : ctx.registry->indexes_for_table(query.tables[1].table)) {
        if (index->scheme() == IndexScheme::VBP || !index->complete()) continue;
        if (index->attr_indexes()[0] == query.join->second) {
          plan.join = JoinStrategy::IndexNestedLoop;
          break;
        }
      }
    }
  }
  return plan;
}

}  // namespace autoidx
