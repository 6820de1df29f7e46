#include "autoidx/workload_monitor.hpp"

#include <algorithm>

namespace autoidx {

namespace {

void sorted_unique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

QueryRecord make_query_record(const Query& query, const QueryStats& stats,
                              std::uint64_t table_tuples,
                              const std::vector<IndexKeySpec>& indexes_used) {
  QueryRecord rec;
  rec.kind = query.kind;
  rec.tmpl = query.tmpl;
  rec.tuples_scanned = stats.tuples_scanned;
  rec.tuples_via_index = stats.index_entries_read;
  rec.tuples_written = stats.tuples_written;
  rec.access_path = stats.access_path;
  rec.indexes_used = indexes_used;
  for (std::size_t t = 0; t < query.tables.size(); ++t) {
    const auto& ref = query.tables[t];
    TableAccessRecord access;
    access.table = ref.table;
    access.predicates = ref.predicates;
    access.table_tuples = table_tuples;
    for (const auto& c : ref.predicates) {
      (c.is_equality() ? access.equality_attrs : access.range_attrs).push_back(c.attr);
    }
    if (query.join) {
      access.join_attrs.push_back(t == 0 ? query.join->first : query.join->second);
    }
    for (std::uint32_t attr : query.projection) access.other_attrs.push_back(attr);
    for (const auto& clause : query.set_clauses) access.other_attrs.push_back(clause.attr);
    sorted_unique(access.equality_attrs);
    sorted_unique(access.range_attrs);
    sorted_unique(access.join_attrs);
    sorted_unique(access.other_attrs);
    if (table_tuples > 0) {
      access.realized_selectivity =
          static_cast<double>(stats.matches) / static_cast<double>(table_tuples);
    }
    rec.tables.push_back(std::move(access));
  }
  return rec;
}

void WorkloadMonitor::record(const Query& query, const QueryStats& stats,
                             std::uint64_t table_tuples,
                             const std::vector<IndexKeySpec>& indexes_used) {
  QueryRecord rec = make_query_record(query, stats, table_tuples, indexes_used);
  std::lock_guard lock(mutex_);
  rec.cycle = cycle_;
  for (const auto& access : rec.tables) {
    std::vector<std::uint32_t> pred_attrs;
    for (const auto& c : access.predicates) pred_attrs.push_back(c.attr);
    sorted_unique(pred_attrs);
    for (std::uint32_t attr : pred_attrs) {
      demand_[{access.table, {attr}}] += 1.0;
    }
    if (pred_attrs.size() > 1) {
      demand_[{access.table, pred_attrs}] += 1.0;
    }
    for (std::uint32_t attr : access.join_attrs) {
      demand_[{access.table, {attr}}] += 1.0;
    }
  }
  records_.push_back(std::move(rec));
  while (records_.size() > window_) records_.pop_front();
}

WorkloadSnapshot WorkloadMonitor::snapshot() const {
  std::lock_guard lock(mutex_);
  WorkloadSnapshot snap;
  snap.records.assign(records_.begin(), records_.end());
  if (snap.records.empty()) return snap;
  std::uint64_t scans = 0;
  std::uint64_t mutators = 0;
  std::uint64_t via_index = 0;
  std::uint64_t scanned = 0;
  for (const auto& rec : snap.records) {
    if (rec.kind == QueryKind::Scan) {
      ++scans;
    } else {
      ++mutators;
    }
    via_index += rec.tuples_via_index;
    scanned += rec.tuples_scanned;
  }
  snap.f1 = static_cast<double>(scans) / static_cast<double>(std::max<std::uint64_t>(1, mutators));
  snap.f2 = static_cast<double>(via_index) /
            static_cast<double>(std::max<std::uint64_t>(1, via_index + scanned));
  snap.f3 = static_cast<double>(scanned) / static_cast<double>(snap.records.size());
  snap.insufficient = false;
  return snap;
}

void WorkloadMonitor::advance_cycle(std::uint64_t cycle) {
  std::lock_guard lock(mutex_);
  const std::uint64_t before = cycle_ / 100;
  const std::uint64_t after = cycle / 100;
  cycle_ = cycle;
  for (std::uint64_t i = before; i < after; ++i) {
    for (auto& [_, count] : demand_) count *= 0.5;
  }
}

std::uint64_t WorkloadMonitor::current_cycle() const {
  std::lock_guard lock(mutex_);
  return cycle_;
}

double WorkloadMonitor::demand(const std::string& table,
                               const std::vector<std::uint32_t>& attrs) const {
  std::lock_guard lock(mutex_);
  auto it = demand_.find({table, attrs});
  return it == demand_.end() ? 0.0 : it->second;
}

}  // namespace autoidx
