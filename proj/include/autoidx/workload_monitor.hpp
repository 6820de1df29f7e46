#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "autoidx/partial_index.hpp"
#include "autoidx/query.hpp"

namespace autoidx {

// Attribute roles a query can reference, tracked per table.
struct TableAccessRecord {
  std::string table;
  std::vector<std::uint32_t> equality_attrs;
  std::vector<std::uint32_t> range_attrs;
  std::vector<std::uint32_t> join_attrs;
  std::vector<std::uint32_t> groupby_attrs;  // unused by the templates, kept for parity
  std::vector<std::uint32_t> other_attrs;    // projection and set-clause targets
  Conjuncts predicates;
  double realized_selectivity = 0.0;
  std::uint64_t table_tuples = 0;
};

struct QueryRecord {
  QueryKind kind = QueryKind::Scan;
  QueryTemplate tmpl = QueryTemplate::LowS;
  std::vector<TableAccessRecord> tables;
  std::uint64_t tuples_scanned = 0;
  std::uint64_t tuples_via_index = 0;
  std::uint64_t tuples_written = 0;
  std::uint64_t cycle = 0;
  AccessPath access_path = AccessPath::TableScan;
  std::vector<IndexKeySpec> indexes_used;
};

struct WorkloadSnapshot {
  std::vector<QueryRecord> records;  // last k, oldest first
  double f1 = 0.0;  // scan/mutator ratio (mutators clamped to >= 1)
  double f2 = 0.0;  // fraction of tuples accessed through indexes
  double f3 = 0.0;  // mean tuples scanned per query
  bool insufficient = true;

  std::array<double, 3> features() const { return {f1, f2, f3}; }
};

// Ring buffer of the last k query records plus per-table attribute demand
// counters. Single writer (the query path); snapshots are consistent.
class WorkloadMonitor {
 public:
  explicit WorkloadMonitor(std::size_t window = 100) : window_(window) {}

  void record(const Query& query, const QueryStats& stats, std::uint64_t table_tuples,
              const std::vector<IndexKeySpec>& indexes_used = {});
  WorkloadSnapshot snapshot() const;

  // Called by the tuner once per cycle; decays the demand counters by 0.5
  // every 100 cycles so stale predicates stop generating candidates.
  void advance_cycle(std::uint64_t cycle);
  std::uint64_t current_cycle() const;

  double demand(const std::string& table, const std::vector<std::uint32_t>& attrs) const;
  std::size_t window() const { return window_; }

 private:
  std::size_t window_;
  mutable std::mutex mutex_;
  std::deque<QueryRecord> records_;
  std::uint64_t cycle_ = 0;
  std::map<std::pair<std::string, std::vector<std::uint32_t>>, double> demand_;
};

// Builds the per-table access record from a structured query.
QueryRecord make_query_record(const Query& query, const QueryStats& stats,
                              std::uint64_t table_tuples,
                              const std::vector<IndexKeySpec>& indexes_used);

}  // namespace autoidx
