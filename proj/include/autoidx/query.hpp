#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "autoidx/common.hpp"

namespace autoidx {

enum class QueryKind { Scan, Update, Insert };

enum class QueryTemplate { LowS, ModS, HighS, LowU, HighU, Ins };

const char* to_string(QueryTemplate t);
const char* to_string(QueryKind k);

struct SetClause {
  std::uint32_t attr = 0;
  Value value = 0;
  bool increment = false;  // a_k = a_k + value instead of a_k = value
};

struct TableRef {
  std::string table;
  Conjuncts predicates;
};

// A structured query; no SQL parsing, the harness builds these directly.
struct Query {
  QueryKind kind = QueryKind::Scan;
  QueryTemplate tmpl = QueryTemplate::LowS;
  std::vector<TableRef> tables;  // 1 or (HighS) 2
  // HighS equi-join: left attr on tables[0], right attr on tables[1].
  std::optional<std::pair<std::uint32_t, std::uint32_t>> join;
  std::vector<std::uint32_t> projection;
  std::optional<std::uint32_t> sum_attr;       // scans aggregate SUM(a_k)
  std::vector<SetClause> set_clauses;          // updates
  std::vector<std::vector<Value>> insert_rows;  // inserts

  void validate() const;  // throws ConfigError
};

enum class AccessPath { TableScan, HybridScan, IndexScanFull, VbpScan };
enum class JoinStrategy { None, HashJoin, IndexNestedLoop };

const char* to_string(AccessPath p);

struct QueryStats {
  double latency_us = 0.0;
  std::uint64_t tuples_scanned = 0;     // table-phase versions visited
  std::uint64_t index_entries_read = 0;  // index-phase entries fetched
  std::uint64_t tuples_written = 0;      // versions created by mutators
  std::uint64_t index_entries_maintained = 0;
  std::uint64_t matches = 0;  // rows satisfying the predicate pre-aggregation
  AccessPath access_path = AccessPath::TableScan;
};

struct QueryResult {
  std::uint64_t row_count = 0;
  std::int64_t aggregate = 0;
  // Joined/projected rows, kept only for joins and small scans in tests.
  std::vector<std::vector<Value>> rows;
  std::uint64_t digest = 0;  // order-insensitive content hash
};

}  // namespace autoidx
