#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autoidx/common.hpp"

namespace autoidx {

enum class AttributeKind { Integer, Timestamp };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::Integer;
};

struct Schema {
  std::string table_name;
  std::vector<Attribute> attributes;

  std::uint32_t arity() const { return static_cast<std::uint32_t>(attributes.size()); }
  std::optional<std::uint32_t> attr_index(const std::string& name) const;
  void validate() const;  // throws ConfigError
};

// A fixed-capacity page of versioned tuples. Slots are append-only: values
// and begin epochs never change after publication; the end epoch can be set
// once, from infinity to a finite epoch.
class Page {
 public:
  Page(std::uint32_t id, std::uint32_t arity, std::uint32_t capacity);

  std::uint32_t id() const { return id_; }
  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t used() const { return used_.load(std::memory_order_acquire); }
  bool full() const { return used() == capacity_; }

  std::span<const Value> row(std::uint32_t slot) const {
    return {values_.data() + static_cast<std::size_t>(slot) * arity_, arity_};
  }
  Epoch begin_epoch(std::uint32_t slot) const { return begin_[slot]; }
  Epoch end_epoch(std::uint32_t slot) const {
    return end_[slot].load(std::memory_order_relaxed);
  }
  Location origin(std::uint32_t slot) const { return origin_[slot]; }

  bool visible_at(std::uint32_t slot, Epoch epoch) const {
    return begin_[slot] <= epoch && epoch < end_epoch(slot);
  }

 private:
  friend class Table;

  std::uint32_t append(std::span<const Value> values, Epoch begin, Location origin);
  // Returns false if the slot is already dead.
  bool seal(std::uint32_t slot, Epoch end);

  std::uint32_t id_;
  std::uint32_t arity_;
  std::uint32_t capacity_;
  std::atomic<std::uint32_t> used_{0};
  std::vector<Value> values_;
  std::vector<Epoch> begin_;
  std::unique_ptr<std::atomic<Epoch>[]> end_;
  std::vector<Location> origin_;
};

// In-memory table of epoch-versioned tuples. One mutator at a time; any
// number of concurrent readers. A reader that pins `committed_epoch()` sees
// a stable snapshot no matter how many mutations commit afterwards.
class Table {
 public:
  Table(Schema schema, std::uint32_t page_capacity);

  const Schema& schema() const { return schema_; }
  std::uint32_t arity() const { return schema_.arity(); }
  std::uint32_t page_capacity() const { return page_capacity_; }

  std::uint32_t page_count() const { return page_count_.load(std::memory_order_acquire); }
  const Page& page(std::uint32_t id) const { return *page_ptr(id); }
  Epoch committed_epoch() const { return committed_.load(std::memory_order_acquire); }

  // Total versions ever appended (dead ones included).
  std::uint64_t version_count() const { return versions_.load(std::memory_order_acquire); }
  // Linear index one past the last appended version.
  std::uint64_t tail_linear() const { return version_count(); }

  Location insert(std::span<const Value> values);
  std::size_t insert_batch(std::span<const std::vector<Value>> rows);

  struct UpdateSpec {
    Location location;
    std::vector<Value> new_values;
  };
  struct UpdateResult {
    std::size_t versions_created = 0;
    std::vector<Location> new_locations;
  };
  // Seals each old version at e+1 and appends the successor with begin e+1;
  // the whole batch commits one epoch. Ad-hoc indexes are not touched here.
  UpdateResult update(std::span<const UpdateSpec> updates);

  std::span<const Value> values_at(Location loc) const { return page(loc.page).row(loc.slot); }
  bool visible_at(Location loc, Epoch epoch) const {
    return page(loc.page).visible_at(loc.slot, epoch);
  }

  // Visits every version in pages >= start_page that is visible at `epoch`
  // and satisfies `conjuncts`, in (page, slot) order. Returns versions
  // visited (scan work).
  template <typename Fn>
  std::uint64_t scan_visible(std::uint32_t start_page, Epoch epoch,
                             const Conjuncts& conjuncts, Fn&& fn) const {
    const std::uint32_t pages = page_count();
    std::uint64_t visited = 0;
    for (std::uint32_t p = start_page; p < pages; ++p) {
      const Page& pg = *page_ptr(p);
      const std::uint32_t used = pg.used();
      visited += used;
      for (std::uint32_t s = 0; s < used; ++s) {
        if (!pg.visible_at(s, epoch)) continue;
        auto row = pg.row(s);
        if (!matches(conjuncts, row)) continue;
        fn(Location{p, s}, row);
      }
    }
    return visited;
  }

  // Materializing variant of scan_visible; throws if start_page > page_count.
  std::vector<std::pair<Location, std::vector<Value>>> scan_pages(
      std::uint32_t start_page, Epoch epoch, const Conjuncts& conjuncts) const;

  // Visits raw versions by linear position (no visibility check); used by
  // index builds.
  template <typename Fn>
  void visit_versions(std::uint64_t from_linear, std::uint64_t to_linear, Fn&& fn) const {
    for (std::uint64_t i = from_linear; i < to_linear; ++i) {
      Location loc{static_cast<std::uint32_t>(i / page_capacity_),
                   static_cast<std::uint32_t>(i % page_capacity_)};
      fn(loc, page_ptr(loc.page)->row(loc.slot));
    }
  }

 private:
  Page& tail_page_for_append();
  Page* page_ptr(std::uint32_t id) const {
    Page* const* chunk = chunks_[id >> kChunkBits].load(std::memory_order_acquire);
    return chunk[id & (kChunkSize - 1)];
  }

  Schema schema_;
  std::uint32_t page_capacity_;
  std::atomic<std::uint32_t> page_count_{0};
  std::atomic<Epoch> committed_{0};
  std::atomic<std::uint64_t> versions_{0};

  // Readers resolve pages through a chunked directory that never moves;
  // only the single mutator allocates pages and chunks.
  static constexpr std::uint32_t kChunkBits = 10;
  static constexpr std::uint32_t kChunkSize = 1u << kChunkBits;
  static constexpr std::uint32_t kMaxChunks = 1u << 12;
  std::array<std::atomic<Page* const*>, kMaxChunks> chunks_{};
  std::vector<std::unique_ptr<Page*[]>> chunk_storage_;
  std::vector<std::unique_ptr<Page>> owned_pages_;
};

// Named table catalog.
class Database {
 public:
  Table& create_table(Schema schema, std::uint32_t page_capacity);
  Table& table(const std::string& name);
  const Table& table(const std::string& name) const;
  bool has_table(const std::string& name) const { return tables_.contains(name); }
  std::vector<std::string> table_names() const;

 private:
  std::map<std::string, std::unique_ptr<Table>> tables_;
};

}  // namespace autoidx
