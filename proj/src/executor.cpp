#include "autoidx/executor.hpp"

#include <algorithm>
#include <unordered_map>

namespace autoidx {

const char* to_string(QueryTemplate t) {
  switch (t) {
    case QueryTemplate::LowS: return "LOW-S";
    case QueryTemplate::ModS: return "MOD-S";
    case QueryTemplate::HighS: return "HIGH-S";
    case QueryTemplate::LowU: return "LOW-U";
    case QueryTemplate::HighU: return "HIGH-U";
    case QueryTemplate::Ins: return "INS";
  }
  return "?";
}

const char* to_string(QueryKind k) {
  switch (k) {
    case QueryKind::Scan: return "scan";
    case QueryKind::Update: return "update";
    case QueryKind::Insert: return "insert";
  }
  return "?";
}

const char* to_string(AccessPath p) {
  switch (p) {
    case AccessPath::TableScan: return "table_scan";
    case AccessPath::HybridScan: return "hybrid_scan";
    case AccessPath::IndexScanFull: return "index_scan";
    case AccessPath::VbpScan: return "vbp_scan";
  }
  return "?";
}

void Query::validate() const {
  if (tables.empty() || tables.size() > 2) throw ConfigError("query must reference 1-2 tables");
  for (const auto& ref : tables) {
    for (const auto& c : ref.predicates) {
      if (c.lo > c.hi) throw ConfigError("predicate with lo > hi");
    }
  }
  if (tmpl == QueryTemplate::HighS && !join) throw ConfigError("HIGH-S requires a join pair");
  if (join && tables.size() != 2) throw ConfigError("join requires two tables");
}

namespace {

std::uint64_t row_hash(Location loc, std::span<const Value> row) {
  std::uint64_t h = fnv1a(row.data(), row.size_bytes());
  h = fnv1a_u64((static_cast<std::uint64_t>(loc.page) << 32) | loc.slot, h);
  return h;
}

}  // namespace

void Executor::hybrid_scan(const Table& table, const PartialIndex& index,
                           const Conjuncts& conjuncts, Epoch epoch, const RowVisitor& emit,
                           QueryStats* stats) const {
  if (index.scheme() != IndexScheme::VAP) {
    throw ConfigError("hybrid_scan requires a VAP scheme index");
  }
  const KeyInterval bounds = probe_bounds(index, conjuncts);

  std::vector<Location> hits;
  const ProbeResult snap =
      index.probe_visit(bounds.lo, bounds.hi,
                        [&](const CompositeKey&, Location loc) { hits.push_back(loc); });
  if (stats) stats->index_entries_read += hits.size();

  const std::int64_t start_page =
      snap.rho_m >= 0 ? std::max(snap.rho_m, snap.rho_i + 1) : snap.rho_i + 1;
  const bool overlap = snap.rho_m > snap.rho_i;

  // Duplicate-elimination set: slots of index hits in the overlapping page.
  std::vector<std::uint32_t> dedup;
  if (overlap) {
    for (Location loc : hits) {
      if (static_cast<std::int64_t>(loc.page) == snap.rho_m) dedup.push_back(loc.slot);
    }
    std::sort(dedup.begin(), dedup.end());
  }

  // Index phase: emit hits below the start page, plus the overlapping page's
  // hits (the table phase skips those). Residual predicate and visibility
  // are re-checked against the fetched tuple.
  for (Location loc : hits) {
    const bool below = static_cast<std::int64_t>(loc.page) < start_page;
    const bool in_overlap = overlap && static_cast<std::int64_t>(loc.page) == snap.rho_m;
    if (!below && !in_overlap) continue;
    if (!table.visible_at(loc, epoch)) continue;
    auto row = table.values_at(loc);
    if (!matches(conjuncts, row)) continue;
    emit(loc, row);
  }

  // Table phase from the start page, skipping deduplicated slots.
  if (start_page <= table.page_count()) {
    const std::uint64_t visited = table.scan_visible(
        static_cast<std::uint32_t>(start_page), epoch, conjuncts,
        [&](Location loc, std::span<const Value> row) {
          if (overlap && static_cast<std::int64_t>(loc.page) == snap.rho_m &&
              std::binary_search(dedup.begin(), dedup.end(), loc.slot)) {
            return;
          }
          emit(loc, row);
        });
    if (stats) stats->tuples_scanned += visited;
  }
}

void Executor::vbp_scan(const Table& table, PartialIndex& index, const Conjuncts& conjuncts,
                        Epoch epoch, const RowVisitor& emit, QueryStats* stats) {
  if (index.scheme() != IndexScheme::VBP) {
    throw ConfigError("vbp_scan requires a VBP scheme index");
  }
  const KeyInterval bounds = probe_bounds(index, conjuncts);
  if (index.covers_interval(bounds)) {
    std::uint64_t read = 0;
    index.probe_visit(bounds.lo, bounds.hi, [&](const CompositeKey&, Location loc) {
      ++read;
      if (!table.visible_at(loc, epoch)) return;
      auto row = table.values_at(loc);
      if (!matches(conjuncts, row)) return;
      emit(loc, row);
    });
    if (stats) stats->index_entries_read += read;
    return;
  }
  const std::uint64_t visited = table.scan_visible(0, epoch, conjuncts, emit);
  if (stats) stats->tuples_scanned += visited;
  if (vbp_immediate_population) {
    // Immediate holistic policy: index the whole subdomain while the query
    // is being processed.
    const SubdomainProgress progress =
        index.build_subdomain_step(table, bounds, BuildBudget{}, /*immediate=*/true);
    if (stats) stats->index_entries_maintained += progress.entries_added;
  }
}

void Executor::index_scan_full(const Table& table, const PartialIndex& index,
                               const Conjuncts& conjuncts, Epoch epoch,
                               const RowVisitor& emit, QueryStats* stats) const {
  if (!index.complete()) throw ConfigError("index_scan_full requires a complete index");
  const KeyInterval bounds = probe_bounds(index, conjuncts);
  std::uint64_t read = 0;
  index.probe_visit(bounds.lo, bounds.hi, [&](const CompositeKey&, Location loc) {
    ++read;
    if (!table.visible_at(loc, epoch)) return;
    auto row = table.values_at(loc);
    if (!matches(conjuncts, row)) return;
    emit(loc, row);
  });
  if (stats) stats->index_entries_read += read;
}

void Executor::scan_with_plan(const TableRef& ref, const TablePlan& tplan, Epoch epoch,
                              const RowVisitor& emit, QueryStats& stats) {
  const Table& table = db_->table(ref.table);
  switch (tplan.path) {
    case AccessPath::TableScan:
      stats.tuples_scanned += table.scan_visible(0, epoch, ref.predicates, emit);
      break;
    case AccessPath::HybridScan:
      hybrid_scan(table, *tplan.index, ref.predicates, epoch, emit, &stats);
      break;
    case AccessPath::IndexScanFull:
      index_scan_full(table, *tplan.index, ref.predicates, epoch, emit, &stats);
      break;
    case AccessPath::VbpScan:
      vbp_scan(table, *tplan.index, ref.predicates, epoch, emit, &stats);
      break;
  }
}

QueryResult Executor::run_scan(const Query& query, Epoch epoch, const Plan& plan,
                               QueryStats& stats) {
  QueryResult result;
  const TableRef& ref = query.tables[0];
  std::uint64_t digest = 0;
  const bool materialize = materialize_scan_rows;
  scan_with_plan(ref, plan.per_table[0], epoch, [&](Location loc, std::span<const Value> row) {
    ++result.row_count;
    if (query.sum_attr) result.aggregate += row[*query.sum_attr];
    // Projection cost model: touch the projected attributes.
    std::int64_t touched = 0;
    for (std::uint32_t attr : query.projection) touched += row[attr];
    (void)touched;
    digest += row_hash(loc, row);
    if (materialize) {
      std::vector<Value> out;
      out.reserve(query.projection.size());
      for (std::uint32_t attr : query.projection) out.push_back(row[attr]);
      result.rows.push_back(std::move(out));
    }
  }, stats);
  stats.matches = result.row_count;
  result.digest = fnv1a_u64(result.row_count, fnv1a_u64(static_cast<std::uint64_t>(result.aggregate), digest));
  return result;
}

QueryResult Executor::run_join(const Query& query, Epoch epoch, const Plan& plan,
                               QueryStats& stats) {
  QueryResult result;
  const TableRef& left_ref = query.tables[0];
  const TableRef& right_ref = query.tables[1];
  const auto [left_attr, right_attr] = *query.join;
  std::uint64_t digest = 0;

  auto project_pair = [&](std::span<const Value> l, std::span<const Value> r) {
    std::vector<Value> out;
    out.reserve(query.projection.size() * 2);
    for (std::uint32_t attr : query.projection) out.push_back(l[attr]);
    for (std::uint32_t attr : query.projection) out.push_back(r[attr]);
    return out;
  };
  auto emit_pair = [&](std::span<const Value> l, std::span<const Value> r) {
    ++result.row_count;
    auto row = project_pair(l, r);
    digest += fnv1a(row.data(), row.size() * sizeof(Value));
    result.rows.push_back(std::move(row));
  };

  if (plan.join == JoinStrategy::IndexNestedLoop) {
    const Table& right = db_->table(right_ref.table);
    std::shared_ptr<PartialIndex> right_index;
    for (const auto& index : registry_->indexes_for_table(right_ref.table)) {
      if (index->scheme() != IndexScheme::VBP && index->complete() &&
          index->attr_indexes()[0] == right_attr) {
        right_index = index;
        break;
      }
    }
    if (!right_index) throw ConfigError("index nested loop without inner index");
    scan_with_plan(left_ref, plan.per_table[0], epoch,
                   [&](Location, std::span<const Value> lrow) {
                     const Value key = lrow[left_attr];
                     const CompositeKey lo = pad_lower({&key, 1}, 1);
                     const CompositeKey hi = pad_upper({&key, 1}, 1);
                     right_index->probe_visit(lo, hi, [&](const CompositeKey&, Location rloc) {
                       ++stats.index_entries_read;
                       if (!right.visible_at(rloc, epoch)) return;
                       auto rrow = right.values_at(rloc);
                       if (!matches(right_ref.predicates, rrow)) return;
                       emit_pair(lrow, rrow);
                     });
                   },
                   stats);
  } else {
    // Hash join: build on the filtered inner side.
    std::unordered_multimap<Value, std::vector<Value>> hash;
    scan_with_plan(right_ref, plan.per_table[1], epoch,
                   [&](Location, std::span<const Value> rrow) {
                     hash.emplace(rrow[right_attr], std::vector<Value>(rrow.begin(), rrow.end()));
                   },
                   stats);
    scan_with_plan(left_ref, plan.per_table[0], epoch,
                   [&](Location, std::span<const Value> lrow) {
                     auto [first, last] = hash.equal_range(lrow[left_attr]);
                     for (auto it = first; it != last; ++it) {
                       emit_pair(lrow, it->second);
                     }
                   },
                   stats);
  }
  stats.matches = result.row_count;
  result.digest = fnv1a_u64(result.row_count, digest);
  return result;
}

QueryResult Executor::run_update(const Query& query, const Plan& plan, QueryStats& stats) {
  QueryResult result;
  Table& table = db_->table(query.tables[0].table);
  const Epoch epoch = table.committed_epoch();

  std::vector<Table::UpdateSpec> updates;
  scan_with_plan(query.tables[0], plan.per_table[0], epoch,
                 [&](Location loc, std::span<const Value> row) {
                   Table::UpdateSpec spec;
                   spec.location = loc;
                   spec.new_values.assign(row.begin(), row.end());
                   for (const auto& clause : query.set_clauses) {
                     if (clause.increment) {
                       spec.new_values[clause.attr] += clause.value;
                     } else {
                       spec.new_values[clause.attr] = clause.value;
                     }
                   }
                   updates.push_back(std::move(spec));
                 },
                 stats);
  stats.matches = updates.size();

  const auto update_result = table.update(updates);
  stats.tuples_written = update_result.versions_created;
  for (std::size_t i = 0; i < update_result.new_locations.size(); ++i) {
    const Location loc = update_result.new_locations[i];
    stats.index_entries_maintained +=
        maintain_indexes(query.tables[0].table, loc, table.values_at(loc));
  }
  result.row_count = update_result.versions_created;
  result.digest = fnv1a_u64(result.row_count, 0x9e3779b97f4a7c15ull);
  return result;
}

QueryResult Executor::run_insert(const Query& query, QueryStats& stats) {
  QueryResult result;
  Table& table = db_->table(query.tables[0].table);
  for (const auto& row : query.insert_rows) {
    const Location loc = table.insert(row);
    stats.index_entries_maintained += maintain_indexes(query.tables[0].table, loc, row);
    ++stats.tuples_written;
  }
  result.row_count = query.insert_rows.size();
  result.digest = fnv1a_u64(result.row_count, 0xdeadbeefcafef00dull);
  return result;
}

std::uint64_t Executor::maintain_indexes(const std::string& table, Location loc,
                                         std::span<const Value> row) {
  std::uint64_t maintained = 0;
  for (const auto& index : registry_->indexes_for_table(table)) {
    if (index->maintain_append(loc, row)) ++maintained;
  }
  return maintained;
}

QueryResult Executor::execute_query(const Query& query, Epoch epoch, const Plan& plan,
                                    QueryStats& stats) {
  query.validate();
  switch (query.kind) {
    case QueryKind::Scan:
      if (query.join) return run_join(query, epoch, plan, stats);
      return run_scan(query, epoch, plan, stats);
    case QueryKind::Update:
      return run_update(query, plan, stats);
    case QueryKind::Insert:
      return run_insert(query, stats);
  }
  throw ConfigError("unknown query kind");
}

}  // namespace autoidx
