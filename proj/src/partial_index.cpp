#include "autoidx/partial_index.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace autoidx {

const char* to_string(IndexScheme scheme) {
  switch (scheme) {
    case IndexScheme::VAP: return "VAP";
    case IndexScheme::VBP: return "VBP";
    case IndexScheme::FULL: return "FULL";
  }
  return "?";
}

std::string IndexKeySpec::to_string() const {
  std::string out = table + "(";
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (i) out += ",";
    out += attributes[i];
  }
  out += ")";
  return out;
}

std::vector<std::uint32_t> IndexKeySpec::resolve(const Schema& schema) const {
  if (attributes.empty() || attributes.size() > kMaxKeyArity) {
    throw ConfigError("index spec arity must be 1.." + std::to_string(kMaxKeyArity));
  }
  std::set<std::string> seen;
  std::vector<std::uint32_t> indexes;
  for (const auto& name : attributes) {
    if (!seen.insert(name).second) {
      throw ConfigError("index spec repeats attribute '" + name + "'");
    }
    auto idx = schema.attr_index(name);
    if (!idx) throw ConfigError("index spec names unknown attribute '" + name + "'");
    indexes.push_back(*idx);
  }
  return indexes;
}

CompositeKey key_successor(CompositeKey k) {
  for (int i = kMaxKeyArity - 1; i >= 0; --i) {
    if (k.v[i] < kValueMax) {
      ++k.v[i];
      return k;
    }
    k.v[i] = kValueMin;
  }
  return k;  // saturates at the global maximum's wraparound; callers guard
}

CompositeKey key_predecessor(CompositeKey k) {
  for (int i = kMaxKeyArity - 1; i >= 0; --i) {
    if (k.v[i] > kValueMin) {
      --k.v[i];
      return k;
    }
    k.v[i] = kValueMax;
  }
  return k;
}

void IntervalSet::add(const KeyInterval& interval) {
  if (!interval.valid()) throw ConfigError("interval with lo > hi");
  std::vector<KeyInterval> out;
  KeyInterval merged = interval;
  for (const auto& iv : intervals_) {
    if (iv.hi < merged.lo || merged.hi < iv.lo) {
      out.push_back(iv);
    } else {
      merged.lo = std::min(merged.lo, iv.lo);
      merged.hi = std::max(merged.hi, iv.hi);
    }
  }
  out.push_back(merged);
  std::sort(out.begin(), out.end(),
            [](const KeyInterval& a, const KeyInterval& b) { return a.lo < b.lo; });
  intervals_ = std::move(out);
}

bool IntervalSet::covers(const KeyInterval& interval) const {
  for (const auto& iv : intervals_) {
    if (iv.lo <= interval.lo && interval.hi <= iv.hi) return true;
  }
  return false;
}

std::vector<KeyInterval> IntervalSet::gaps(const KeyInterval& interval) const {
  std::vector<KeyInterval> out;
  CompositeKey cursor = interval.lo;
  bool open = true;
  for (const auto& iv : intervals_) {
    if (iv.hi < cursor) continue;
    if (iv.lo > interval.hi) break;
    if (iv.lo > cursor) {
      out.push_back({cursor, std::min(interval.hi, key_predecessor(iv.lo))});
    }
    if (iv.hi >= interval.hi) {
      open = false;
      break;
    }
    cursor = key_successor(iv.hi);
    if (cursor > interval.hi) {
      open = false;
      break;
    }
  }
  if (open && cursor <= interval.hi) out.push_back({cursor, interval.hi});
  return out;
}

PartialIndex::PartialIndex(IndexKeySpec spec, IndexScheme scheme, const Table& table)
    : spec_(std::move(spec)),
      scheme_(scheme),
      attr_indexes_(spec_.resolve(table.schema())),
      page_capacity_(table.page_capacity()),
      runs_(std::make_shared<const RunList>()),
      subdomains_(std::make_shared<const IntervalSet>()) {
  if (scheme_ != IndexScheme::VBP && table.tail_linear() == 0) {
    complete_.store(true, std::memory_order_release);
  }
}

CompositeKey PartialIndex::key_for_row(std::span<const Value> row) const {
  CompositeKey k;
  for (std::size_t i = 0; i < attr_indexes_.size(); ++i) k.v[i] = row[attr_indexes_[i]];
  return k;
}

PartialIndex::Snapshot PartialIndex::snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return Snapshot{runs_, delta_, covered_, complete_.load(std::memory_order_relaxed)};
}

std::int64_t PartialIndex::rho_from_covered(std::uint64_t covered) const {
  return static_cast<std::int64_t>(covered / page_capacity_) - 1;
}

std::int64_t PartialIndex::rho_i() const {
  std::lock_guard lock(publish_mutex_);
  return rho_from_covered(covered_);
}

std::pair<const IndexEntry*, const IndexEntry*> PartialIndex::run_equal_range(
    const Run& run, const CompositeKey& lo, const CompositeKey& hi) {
  auto first = std::lower_bound(run.entries.data(), run.entries.data() + run.entries.size(),
                                lo, [](const IndexEntry& e, const CompositeKey& k) {
                                  return e.key < k;
                                });
  auto last = std::upper_bound(first, run.entries.data() + run.entries.size(), hi,
                               [](const CompositeKey& k, const IndexEntry& e) {
                                 return k < e.key;
                               });
  return {first, last};
}

PartialIndex::RunList PartialIndex::compacted(const RunList& runs,
                                              std::vector<IndexEntry> fresh) const {
  // k-way merge of all runs plus the fresh entries into a single run.
  struct Cursor {
    const IndexEntry* it;
    const IndexEntry* end;
  };
  auto cmp = [](const Cursor& a, const Cursor& b) { return *b.it < *a.it; };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(cmp)> heap(cmp);
  std::size_t total = fresh.size();
  for (const auto& r : runs) {
    total += r->entries.size();
    if (!r->entries.empty()) {
      heap.push({r->entries.data(), r->entries.data() + r->entries.size()});
    }
  }
  std::sort(fresh.begin(), fresh.end());
  if (!fresh.empty()) heap.push({fresh.data(), fresh.data() + fresh.size()});
  auto merged = std::make_shared<Run>();
  merged->entries.reserve(total);
  while (!heap.empty()) {
    Cursor c = heap.top();
    heap.pop();
    merged->entries.push_back(*c.it);
    if (++c.it != c.end) heap.push(c);
  }
  RunList out;
  out.push_back(std::move(merged));
  return out;
}

void PartialIndex::publish(std::vector<IndexEntry> entries, std::uint64_t new_covered,
                           bool new_complete) {
  constexpr std::size_t kCompactAt = 24;
  entry_count_.fetch_add(entries.size(), std::memory_order_release);
  std::shared_ptr<const RunList> next;
  if (!entries.empty() && runs_->size() + 1 >= kCompactAt) {
    next = std::make_shared<const RunList>(compacted(*runs_, std::move(entries)));
  } else {
    auto list = std::make_shared<RunList>(*runs_);
    if (!entries.empty()) {
      std::sort(entries.begin(), entries.end());
      auto run = std::make_shared<Run>();
      run->entries = std::move(entries);
      list->push_back(std::move(run));
    }
    next = std::move(list);
  }
  {
    std::lock_guard lock(publish_mutex_);
    runs_ = std::move(next);
    covered_ = new_covered;
    complete_.store(new_complete, std::memory_order_release);
  }
}

std::uint64_t PartialIndex::covered_snapshot() const {
  std::lock_guard lock(publish_mutex_);
  return covered_;
}

BuildProgress PartialIndex::build_step(const Table& table, const BuildBudget& budget) {
  if (scheme_ == IndexScheme::VBP) {
    throw ConfigError("build_step requires a VAP or FULL scheme index");
  }
  if (budget.pages_per_step == 0) throw ConfigError("pages_per_step must be positive");
  std::lock_guard build_lock(builder_mutex_);

  BuildProgress progress;
  const std::uint64_t tail = table.tail_linear();
  const std::uint32_t pages = table.page_count();
  const std::uint64_t covered = covered_snapshot();
  const std::int64_t rho_before = rho_from_covered(covered);
  progress.rho_i = rho_before;
  progress.complete = complete_.load(std::memory_order_relaxed);
  if (pages == 0 || covered >= tail) {
    if (covered >= tail) {
      complete_.store(true, std::memory_order_release);
      progress.complete = true;
    }
    return progress;
  }

  const std::uint32_t last_page = pages - 1;
  const std::uint32_t target_page = static_cast<std::uint32_t>(
      std::min<std::int64_t>(rho_before + budget.pages_per_step, last_page));
  const std::uint64_t page_bound =
      static_cast<std::uint64_t>(target_page + 1) * page_capacity_;
  const std::uint64_t new_covered = std::min(tail, page_bound);

  std::vector<IndexEntry> entries;
  entries.reserve(new_covered - covered);
  table.visit_versions(covered, new_covered, [&](Location loc, std::span<const Value> row) {
    entries.push_back({key_for_row(row), loc});
  });
  progress.entries_added = entries.size();
  const bool complete = new_covered == tail && target_page == last_page;
  publish(std::move(entries), new_covered, complete);
  progress.rho_i = rho_from_covered(new_covered);
  progress.pages_indexed = static_cast<std::uint32_t>(progress.rho_i - rho_before);
  progress.complete = complete;
  return progress;
}

BuildProgress PartialIndex::build_to_completion(const Table& table) {
  BuildProgress total;
  for (;;) {
    BuildProgress step = build_step(table, BuildBudget{.pages_per_step = 1u << 20});
    total.pages_indexed += step.pages_indexed;
    total.entries_added += step.entries_added;
    total.rho_i = step.rho_i;
    total.complete = step.complete;
    if (step.complete || step.entries_added == 0) break;
  }
  return total;
}

SubdomainProgress PartialIndex::build_subdomain_step(const Table& table,
                                                     const KeyInterval& interval,
                                                     const BuildBudget& budget,
                                                     bool immediate) {
  if (scheme_ != IndexScheme::VBP) {
    throw ConfigError("build_subdomain_step requires a VBP scheme index");
  }
  if (!interval.valid()) throw ConfigError("subdomain interval with lo > hi");
  std::lock_guard build_lock(builder_mutex_);

  SubdomainProgress progress;
  if (!vbp_build_ || !(vbp_build_->target.lo == interval.lo &&
                       vbp_build_->target.hi == interval.hi)) {
    auto subs = subdomains();
    auto gaps = subs->gaps(interval);
    if (gaps.empty()) {
      progress.interval_complete = true;
      return progress;
    }
    vbp_build_ = SubdomainBuild{interval, std::move(gaps), 0, {}};
  }

  SubdomainBuild& build = *vbp_build_;
  const std::uint64_t tail = table.tail_linear();
  const std::uint64_t upper =
      immediate ? tail : std::min(tail, build.scan_pos + budget.max_visits_per_step);
  std::uint64_t visited = 0;
  bool entry_budget_hit = false;
  table.visit_versions(build.scan_pos, upper, [&](Location loc, std::span<const Value> row) {
    if (entry_budget_hit) return;
    ++visited;
    build.scan_pos = linear_index(loc, page_capacity_) + 1;
    const CompositeKey key = key_for_row(row);
    for (const auto& gap : build.gaps) {
      if (gap.contains(key)) {
        build.pending.push_back({key, loc});
        ++progress.entries_added;
        if (!immediate && progress.entries_added >= budget.entries_per_step) {
          entry_budget_hit = true;
        }
        break;
      }
    }
  });
  progress.tuples_visited = visited;

  if (build.scan_pos >= tail) {
    auto next = std::make_shared<IntervalSet>(*subdomains());
    next->add(build.target);
    publish_subdomains(std::move(build.pending), *next);
    vbp_build_.reset();
    progress.interval_complete = true;
  }
  return progress;
}

void PartialIndex::publish_subdomains(std::vector<IndexEntry> entries,
                                      const IntervalSet& subdomains) {
  auto list = std::make_shared<RunList>(*runs_);
  if (!entries.empty()) {
    std::sort(entries.begin(), entries.end());
    auto run = std::make_shared<Run>();
    run->entries = std::move(entries);
    entry_count_.fetch_add(run->entries.size(), std::memory_order_release);
    list->push_back(std::move(run));
  }
  auto subs = std::make_shared<const IntervalSet>(subdomains);
  std::lock_guard lock(publish_mutex_);
  runs_ = std::move(list);
  subdomains_ = std::move(subs);
}

ProbeResult PartialIndex::probe_range(const CompositeKey& lo, const CompositeKey& hi) const {
  if (hi < lo) throw ConfigError("probe_range with lo > hi");
  std::vector<ProbeMatch> matches;
  ProbeResult result = probe_visit(lo, hi, [&](const CompositeKey& key, Location loc) {
    matches.push_back({key, loc});
  });
  result.entries = std::move(matches);
  std::sort(result.entries.begin(), result.entries.end(),
            [](const ProbeMatch& a, const ProbeMatch& b) {
              return a.key < b.key || (a.key == b.key && a.loc < b.loc);
            });
  return result;
}

bool PartialIndex::covers_interval(const KeyInterval& interval) const {
  return subdomains()->covers(interval);
}

std::shared_ptr<const IntervalSet> PartialIndex::subdomains() const {
  std::lock_guard lock(publish_mutex_);
  return subdomains_;
}

bool PartialIndex::maintain_append(Location loc, std::span<const Value> row) {
  std::lock_guard build_lock(builder_mutex_);
  const CompositeKey key = key_for_row(row);
  const std::uint64_t linear = linear_index(loc, page_capacity_);
  if (scheme_ == IndexScheme::VBP) {
    if (!subdomains()->covers({key, key})) return false;
  } else {
    if (!complete_.load(std::memory_order_relaxed)) return false;
    if (linear < covered_snapshot()) return false;  // already indexed by the builder
  }

  constexpr std::size_t kDeltaFold = 4096;
  std::shared_ptr<const Run> old_delta;
  {
    std::lock_guard lock(publish_mutex_);
    old_delta = delta_;
  }
  auto next = std::make_shared<Run>();
  if (old_delta) next->entries = old_delta->entries;
  IndexEntry entry{key, loc};
  next->entries.insert(std::upper_bound(next->entries.begin(), next->entries.end(), entry),
                       entry);
  entry_count_.fetch_add(1, std::memory_order_release);

  if (next->entries.size() >= kDeltaFold) {
    auto list = std::make_shared<RunList>(*runs_);
    list->push_back(std::move(next));
    std::lock_guard lock(publish_mutex_);
    runs_ = std::move(list);
    delta_ = nullptr;
    if (scheme_ != IndexScheme::VBP) covered_ = std::max(covered_, linear + 1);
  } else {
    std::lock_guard lock(publish_mutex_);
    delta_ = std::move(next);
    if (scheme_ != IndexScheme::VBP) covered_ = std::max(covered_, linear + 1);
  }
  return true;
}

std::shared_ptr<PartialIndex> IndexRegistry::create_partial_index(const IndexKeySpec& spec,
                                                                  IndexScheme scheme) {
  const Table& table = db_->table(spec.table);
  auto index = std::make_shared<PartialIndex>(spec, scheme, table);
  std::lock_guard lock(mutex_);
  auto [it, inserted] = indexes_.emplace(spec, std::move(index));
  if (!inserted) throw ConfigError("duplicate index spec " + spec.to_string());
  return it->second;
}

bool IndexRegistry::drop_index(const IndexKeySpec& spec) {
  std::lock_guard lock(mutex_);
  return indexes_.erase(spec) > 0;
}

std::shared_ptr<PartialIndex> IndexRegistry::find(const IndexKeySpec& spec) const {
  std::lock_guard lock(mutex_);
  auto it = indexes_.find(spec);
  return it == indexes_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<PartialIndex>> IndexRegistry::indexes_for_table(
    const std::string& table) const {
  std::lock_guard lock(mutex_);
  std::vector<std::shared_ptr<PartialIndex>> out;
  for (const auto& [spec, index] : indexes_) {
    if (spec.table == table) out.push_back(index);
  }
  return out;
}

std::vector<std::shared_ptr<PartialIndex>> IndexRegistry::all() const {
  std::lock_guard lock(mutex_);
  std::vector<std::shared_ptr<PartialIndex>> out;
  for (const auto& [_, index] : indexes_) out.push_back(index);
  return out;
}

std::vector<IndexKeySpec> IndexRegistry::specs() const {
  std::lock_guard lock(mutex_);
  std::vector<IndexKeySpec> out;
  for (const auto& [spec, _] : indexes_) out.push_back(spec);
  return out;
}

std::size_t IndexRegistry::size() const {
  std::lock_guard lock(mutex_);
  return indexes_.size();
}

std::uint64_t IndexRegistry::total_footprint() const {
  std::lock_guard lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& [_, index] : indexes_) total += index->footprint();
  return total;
}

}  // namespace autoidx
