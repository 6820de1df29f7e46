#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "autoidx/common.hpp"
#include "autoidx/storage.hpp"

namespace autoidx {

enum class IndexScheme { VAP, VBP, FULL };

const char* to_string(IndexScheme scheme);

struct IndexKeySpec {
  std::string table;
  std::vector<std::string> attributes;  // ordered, arity 1..3

  std::uint32_t arity() const { return static_cast<std::uint32_t>(attributes.size()); }
  std::string to_string() const;
  auto operator<=>(const IndexKeySpec&) const = default;

  // throws ConfigError on arity/duplicate/unknown-attribute problems
  std::vector<std::uint32_t> resolve(const Schema& schema) const;
};

struct BuildBudget {
  std::uint32_t pages_per_step = 32;     // VAP/FULL
  std::uint32_t entries_per_step = 32768;  // VBP: entries added per step
  // VBP steps are scan-bound; cap the tuples visited per step so a step's
  // work stays comparable to a pages_per_step page build.
  std::uint64_t max_visits_per_step = 32 * 1024;
};

struct IndexEntry {
  CompositeKey key;
  Location loc;

  bool operator<(const IndexEntry& other) const {
    return key < other.key || (key == other.key && loc < other.loc);
  }
};

// Closed interval in composite-key space.
struct KeyInterval {
  CompositeKey lo;
  CompositeKey hi;

  bool valid() const { return lo <= hi; }
  bool contains(const CompositeKey& k) const { return lo <= k && k <= hi; }
};

CompositeKey key_successor(CompositeKey k);
CompositeKey key_predecessor(CompositeKey k);

// Sorted disjoint list of closed key intervals; merges on overlap.
class IntervalSet {
 public:
  void add(const KeyInterval& interval);
  bool covers(const KeyInterval& interval) const;
  // Parts of `interval` not yet covered.
  std::vector<KeyInterval> gaps(const KeyInterval& interval) const;
  const std::vector<KeyInterval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<KeyInterval> intervals_;  // sorted by lo, disjoint
};

struct BuildProgress {
  std::uint32_t pages_indexed = 0;
  std::uint64_t entries_added = 0;
  std::int64_t rho_i = -1;
  bool complete = false;
};

struct SubdomainProgress {
  std::uint64_t entries_added = 0;
  std::uint64_t tuples_visited = 0;
  bool interval_complete = false;
};

struct ProbeMatch {
  CompositeKey key;
  Location loc;
};

struct ProbeResult {
  std::vector<ProbeMatch> entries;  // sorted by key
  std::int64_t rho_m = -1;          // largest page among matches
  std::int64_t rho_i = -1;          // watermark snapshot, taken with the probe
  bool complete = false;            // build caught up with the table tail
};

// An ordered partial index built incrementally. Entries live in immutable
// sorted runs; the run list, the linear coverage watermark, and the VBP
// subdomain list are published together so a reader always sees the entries
// its watermark promises. One builder/maintainer at a time; readers never
// take the builder path.
class PartialIndex {
 public:
  PartialIndex(IndexKeySpec spec, IndexScheme scheme, const Table& table);

  const IndexKeySpec& spec() const { return spec_; }
  IndexScheme scheme() const { return scheme_; }
  std::uint32_t arity() const { return static_cast<std::uint32_t>(attr_indexes_.size()); }
  const std::vector<std::uint32_t>& attr_indexes() const { return attr_indexes_; }

  std::int64_t rho_i() const;
  bool complete() const { return complete_.load(std::memory_order_acquire); }
  std::uint64_t entry_count() const { return entry_count_.load(std::memory_order_acquire); }
  std::uint64_t footprint() const {
    return entry_count() * bytes_per_entry();
  }
  std::uint64_t bytes_per_entry() const { return arity() * sizeof(Value) + 8 + 48; }

  // VAP/FULL: indexes pages rho_i+1 .. rho_i+pages_per_step in ascending
  // order; a partially filled tail page is covered up to its current slots
  // and re-scanned on the next step. The watermark advances only past fully
  // indexed full pages.
  BuildProgress build_step(const Table& table, const BuildBudget& budget);
  // FULL convenience: iterate build_step to completion in one call.
  BuildProgress build_to_completion(const Table& table);

  // VBP: adds matching entries for the interval, skipping already-covered
  // subranges. With immediate=true the budget is ignored and the interval
  // completes in one call.
  SubdomainProgress build_subdomain_step(const Table& table, const KeyInterval& interval,
                                         const BuildBudget& budget, bool immediate = false);

  // All entries with key in [lo, hi], sorted by key, plus the watermark
  // snapshot taken atomically with the probe.
  ProbeResult probe_range(const CompositeKey& lo, const CompositeKey& hi) const;

  // Visitor variant used on the query hot path; emission order is
  // run-by-run, not globally key-sorted. Returns the same snapshot info.
  template <typename Fn>
  ProbeResult probe_visit(const CompositeKey& lo, const CompositeKey& hi, Fn&& fn) const {
    Snapshot snap = snapshot();
    ProbeResult result;
    result.rho_i = rho_from_covered(snap.covered);
    result.complete = snap.complete;
    auto visit_run = [&](const Run& run) {
      auto [first, last] = run_equal_range(run, lo, hi);
      for (auto it = first; it != last; ++it) {
        result.rho_m = std::max<std::int64_t>(result.rho_m, it->loc.page);
        fn(it->key, it->loc);
      }
    };
    for (const auto& run : *snap.runs) visit_run(*run);
    if (snap.delta) visit_run(*snap.delta);
    return result;
  }

  // VBP coverage check for a query interval.
  bool covers_interval(const KeyInterval& interval) const;
  std::shared_ptr<const IntervalSet> subdomains() const;

  // Executor-side maintenance for a freshly appended version. VAP/FULL
  // propagate only once construction has caught up with the tail; VBP
  // propagates when the key lies in a completed subdomain. Returns true if
  // an entry was added.
  bool maintain_append(Location loc, std::span<const Value> row);

  CompositeKey key_for_row(std::span<const Value> row) const;

 private:
  struct Run {
    std::vector<IndexEntry> entries;  // sorted
  };
  using RunList = std::vector<std::shared_ptr<const Run>>;

  struct Snapshot {
    std::shared_ptr<const RunList> runs;
    std::shared_ptr<const Run> delta;  // copy-on-write maintenance tail
    std::uint64_t covered = 0;
    bool complete = false;
  };

  Snapshot snapshot() const;
  std::uint64_t covered_snapshot() const;
  std::int64_t rho_from_covered(std::uint64_t covered) const;
  static std::pair<const IndexEntry*, const IndexEntry*> run_equal_range(
      const Run& run, const CompositeKey& lo, const CompositeKey& hi);

  // Publishes a new run plus updated coverage; compacts when fragmented.
  void publish(std::vector<IndexEntry> entries, std::uint64_t new_covered,
               bool new_complete);
  void publish_subdomains(std::vector<IndexEntry> entries, const IntervalSet& subdomains);
  RunList compacted(const RunList& runs, std::vector<IndexEntry> fresh) const;

  IndexKeySpec spec_;
  IndexScheme scheme_;
  std::vector<std::uint32_t> attr_indexes_;
  std::uint32_t page_capacity_;

  mutable std::mutex publish_mutex_;  // guards the pointer/watermark group
  std::shared_ptr<const RunList> runs_;
  std::shared_ptr<const Run> delta_;
  std::uint64_t covered_ = 0;  // linear coverage bound (VAP/FULL)
  std::shared_ptr<const IntervalSet> subdomains_;  // VBP

  std::mutex builder_mutex_;  // one builder/maintainer at a time
  std::atomic<bool> complete_{false};
  std::atomic<std::uint64_t> entry_count_{0};

  // VBP in-progress interval build state (builder-private).
  struct SubdomainBuild {
    KeyInterval target;
    std::vector<KeyInterval> gaps;
    std::uint64_t scan_pos = 0;
    std::vector<IndexEntry> pending;
  };
  std::optional<SubdomainBuild> vbp_build_;
};

// The index configuration: all ad-hoc indexes currently built, keyed by
// spec. Creation validates against the table schema. Handles are shared so
// a drop cannot invalidate an index pinned by an in-flight query.
class IndexRegistry {
 public:
  explicit IndexRegistry(Database& db) : db_(&db) {}

  std::shared_ptr<PartialIndex> create_partial_index(const IndexKeySpec& spec,
                                                     IndexScheme scheme);
  bool drop_index(const IndexKeySpec& spec);
  std::shared_ptr<PartialIndex> find(const IndexKeySpec& spec) const;
  std::vector<std::shared_ptr<PartialIndex>> indexes_for_table(const std::string& table) const;
  std::vector<std::shared_ptr<PartialIndex>> all() const;
  std::vector<IndexKeySpec> specs() const;
  std::size_t size() const;
  std::uint64_t total_footprint() const;

 private:
  Database* db_;
  mutable std::mutex mutex_;
  std::map<IndexKeySpec, std::shared_ptr<PartialIndex>> indexes_;
};

}  // namespace autoidx
