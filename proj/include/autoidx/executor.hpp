#pragma once

#include <functional>
#include <memory>

#include "autoidx/cost_model.hpp"
#include "autoidx/histogram.hpp"
#include "autoidx/partial_index.hpp"
#include "autoidx/query.hpp"
#include "autoidx/storage.hpp"

namespace autoidx {

using RowVisitor = std::function<void(Location, std::span<const Value>)>;

// Query execution against the store and the current index configuration.
// Scans pin an epoch and a watermark snapshot at start; mutators are
// serialized with each other by the caller (single mutator model).
class Executor {
 public:
  Executor(Database& db, IndexRegistry& registry, HistogramCatalog& histograms)
      : db_(&db), registry_(&registry), histograms_(&histograms) {}

  Database& db() { return *db_; }
  IndexRegistry& registry() { return *registry_; }
  HistogramCatalog& histograms() { return *histograms_; }

  // Value-agnostic hybrid scan: index phase over the probed entries below
  // the start page, table phase from max(rho_m, rho_i+1), duplicates in the
  // overlapping page removed via a sorted slot set. Emits every visible
  // matching tuple exactly once.
  void hybrid_scan(const Table& table, const PartialIndex& index, const Conjuncts& conjuncts,
                   Epoch epoch, const RowVisitor& emit, QueryStats* stats = nullptr) const;

  // Value-based scan: pure index scan when the queried interval lies inside
  // the completed subdomains, otherwise a table scan; with the immediate
  // population policy the uncovered interval is indexed on the spot (the
  // latency-spike path).
  void vbp_scan(const Table& table, PartialIndex& index, const Conjuncts& conjuncts,
                Epoch epoch, const RowVisitor& emit, QueryStats* stats = nullptr);

  // Pure index scan; requires a complete index.
  void index_scan_full(const Table& table, const PartialIndex& index,
                       const Conjuncts& conjuncts, Epoch epoch, const RowVisitor& emit,
                       QueryStats* stats = nullptr) const;

  QueryResult execute_query(const Query& query, Epoch epoch, const Plan& plan,
                            QueryStats& stats);

  // Immediate subdomain population on uncovered VBP scans (holistic policy).
  bool vbp_immediate_population = true;
  // Keep result rows for scans (tests); joins always materialize.
  bool materialize_scan_rows = false;

 private:
  void scan_with_plan(const TableRef& ref, const TablePlan& tplan, Epoch epoch,
                      const RowVisitor& emit, QueryStats& stats);
  QueryResult run_scan(const Query& query, Epoch epoch, const Plan& plan, QueryStats& stats);
  QueryResult run_join(const Query& query, Epoch epoch, const Plan& plan, QueryStats& stats);
  QueryResult run_update(const Query& query, const Plan& plan, QueryStats& stats);
  QueryResult run_insert(const Query& query, QueryStats& stats);
  // Index maintenance for a freshly appended version (inserts and update
  // successors); returns entries added across indexes.
  std::uint64_t maintain_indexes(const std::string& table, Location loc,
                                 std::span<const Value> row);

  Database* db_;
  IndexRegistry* registry_;
  HistogramCatalog* histograms_;
};

}  // namespace autoidx
