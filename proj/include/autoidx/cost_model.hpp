#pragma once

#include <memory>
#include <vector>

#include "autoidx/histogram.hpp"
#include "autoidx/partial_index.hpp"
#include "autoidx/query.hpp"
#include "autoidx/storage.hpp"

namespace autoidx {

// Two-constant analytic cost model: unit cost per tuple scanned, and a
// random-access penalty for index entry fetches.
inline constexpr double kRandomAccessPenalty = 2.0;  // kappa

struct TableStatsView {
  std::uint64_t tuple_count = 0;
  double selectivity = 1.0;  // estimated fraction matching the predicate
};

struct IndexStateView {
  double watermark_fraction = 0.0;  // w: fraction of the table covered
  bool complete = false;
  bool covers_interval = false;  // VBP: query interval inside completed subdomains
};

double table_scan_cost(const TableStatsView& t);
double index_scan_full_cost(const TableStatsView& t);
// Linear interpolation between a full table scan (w=0) and a full index
// scan (w=1): w*log2(max(N,2)) + kappa*s*N*w + (1-w)*N.
double hybrid_scan_cost(const TableStatsView& t, double watermark_fraction);

double estimate_cost(AccessPath path, const TableStatsView& t, const IndexStateView& index);

// Longest prefix of the index key present in the conjuncts; 0 means the
// index is not applicable.
std::uint32_t usable_prefix(const PartialIndex& index, const Conjuncts& conjuncts);

// Lexicographic probe bounds for the usable prefix of `index`; bounds are
// a superset of the predicate box, so callers re-check the residual.
KeyInterval probe_bounds(const PartialIndex& index, const Conjuncts& conjuncts);

struct TablePlan {
  AccessPath path = AccessPath::TableScan;
  std::shared_ptr<PartialIndex> index;
  double cost = 0.0;
};

struct Plan {
  std::vector<TablePlan> per_table;
  JoinStrategy join = JoinStrategy::None;
  double cost = 0.0;
};

struct PlannerContext {
  IndexRegistry* registry = nullptr;
  HistogramCatalog* histograms = nullptr;
  // Holistic/VBP mode: route applicable scans through the value-based index
  // even when the interval is uncovered, so the immediate population policy
  // can run.
  bool prefer_vbp = false;
};

// Minimal-cost applicable path per table; ties break toward the simpler
// path: TableScan, then HybridScan, then IndexScanFull.
Plan choose_access_path(const Database& db, PlannerContext& ctx, const Query& query);

double watermark_fraction(const PartialIndex& index, const Table& table);

}  // namespace autoidx
