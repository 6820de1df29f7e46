#include "autoidx/storage.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace autoidx {

std::optional<std::uint32_t> Schema::attr_index(const std::string& name) const {
  for (std::uint32_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == name) return i;
  }
  return std::nullopt;
}

void Schema::validate() const {
  if (table_name.empty()) throw ConfigError("schema: empty table name");
  if (attributes.empty()) throw ConfigError("schema: at least one attribute required");
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw ConfigError("schema: empty attribute name");
    if (!names.insert(a.name).second) {
      throw ConfigError("schema: duplicate attribute name '" + a.name + "'");
    }
  }
}

Page::Page(std::uint32_t id, std::uint32_t arity, std::uint32_t capacity)
    : id_(id),
      arity_(arity),
      capacity_(capacity),
      values_(static_cast<std::size_t>(arity) * capacity),
      begin_(capacity, 0),
      end_(new std::atomic<Epoch>[capacity]),
      origin_(capacity) {
  for (std::uint32_t i = 0; i < capacity; ++i) {
    end_[i].store(kEpochInfinity, std::memory_order_relaxed);
  }
}

std::uint32_t Page::append(std::span<const Value> values, Epoch begin, Location origin) {
  const std::uint32_t slot = used_.load(std::memory_order_relaxed);
  assert(slot < capacity_);
  std::copy(values.begin(), values.end(),
            values_.begin() + static_cast<std::size_t>(slot) * arity_);
  begin_[slot] = begin;
  origin_[slot] = origin;
  used_.store(slot + 1, std::memory_order_release);
  return slot;
}

bool Page::seal(std::uint32_t slot, Epoch end) {
  Epoch expected = kEpochInfinity;
  return end_[slot].compare_exchange_strong(expected, end, std::memory_order_release,
                                            std::memory_order_relaxed);
}

Table::Table(Schema schema, std::uint32_t page_capacity)
    : schema_(std::move(schema)), page_capacity_(page_capacity) {
  schema_.validate();
  if (page_capacity == 0) throw ConfigError("page capacity must be positive");
}

Page& Table::tail_page_for_append() {
  const std::uint32_t count = page_count_.load(std::memory_order_relaxed);
  if (count > 0) {
    Page* tail = owned_pages_[count - 1].get();
    if (!tail->full()) return *tail;
  }
  const std::uint32_t id = count;
  const std::uint32_t chunk_idx = id >> kChunkBits;
  if (chunk_idx >= kMaxChunks) throw std::runtime_error("table page limit exceeded");
  if (chunks_[chunk_idx].load(std::memory_order_relaxed) == nullptr) {
    auto storage = std::make_unique<Page*[]>(kChunkSize);
    chunks_[chunk_idx].store(storage.get(), std::memory_order_release);
    chunk_storage_.push_back(std::move(storage));
  }
  owned_pages_.push_back(std::make_unique<Page>(id, arity(), page_capacity_));
  Page* page = owned_pages_.back().get();
  const_cast<Page**>(chunks_[chunk_idx].load(std::memory_order_relaxed))
      [id & (kChunkSize - 1)] = page;
  page_count_.store(count + 1, std::memory_order_release);
  return *page;
}

Location Table::insert(std::span<const Value> values) {
  if (values.size() != arity()) {
    throw ConfigError("insert: arity mismatch for table '" + schema_.table_name + "'");
  }
  const Epoch e = committed_.load(std::memory_order_relaxed);
  Page& page = tail_page_for_append();
  // A fresh tuple is its own logical origin.
  const std::uint32_t next = page.used_.load(std::memory_order_relaxed);
  const std::uint32_t slot = page.append(values, e + 1, Location{page.id(), next});
  versions_.fetch_add(1, std::memory_order_release);
  committed_.store(e + 1, std::memory_order_release);
  return Location{page.id(), slot};
}

std::size_t Table::insert_batch(std::span<const std::vector<Value>> rows) {
  for (const auto& row : rows) insert(row);
  return rows.size();
}

Table::UpdateResult Table::update(std::span<const UpdateSpec> updates) {
  UpdateResult result;
  if (updates.empty()) return result;
  const Epoch e = committed_.load(std::memory_order_relaxed);
  for (const auto& u : updates) {
    if (u.new_values.size() != arity()) throw ConfigError("update: arity mismatch");
    if (u.location.page >= page_count() ||
        u.location.slot >= page(u.location.page).used()) {
      throw ConfigError("update: location out of range");
    }
    Page& old_page = *owned_pages_[u.location.page];
    if (!old_page.visible_at(u.location.slot, e)) {
      throw StaleUpdateError("update: version not visible at current epoch");
    }
    if (!old_page.seal(u.location.slot, e + 1)) {
      throw StaleUpdateError("update: version already superseded");
    }
    const Location origin = old_page.origin(u.location.slot);
    Page& tail = tail_page_for_append();
    const std::uint32_t slot = tail.append(u.new_values, e + 1, origin);
    versions_.fetch_add(1, std::memory_order_release);
    result.new_locations.push_back(Location{tail.id(), slot});
    ++result.versions_created;
  }
  committed_.store(e + 1, std::memory_order_release);
  return result;
}

std::vector<std::pair<Location, std::vector<Value>>> Table::scan_pages(
    std::uint32_t start_page, Epoch epoch, const Conjuncts& conjuncts) const {
  if (start_page > page_count()) {
    throw ConfigError("scan_pages: start_page beyond page count");
  }
  std::vector<std::pair<Location, std::vector<Value>>> out;
  scan_visible(start_page, epoch, conjuncts, [&](Location loc, std::span<const Value> row) {
    out.emplace_back(loc, std::vector<Value>(row.begin(), row.end()));
  });
  return out;
}

Table& Database::create_table(Schema schema, std::uint32_t page_capacity) {
  schema.validate();
  const std::string name = schema.table_name;
  if (tables_.contains(name)) throw ConfigError("duplicate table name '" + name + "'");
  auto [it, _] = tables_.emplace(name, std::make_unique<Table>(std::move(schema), page_capacity));
  return *it->second;
}

Table& Database::table(const std::string& name) {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw ConfigError("unknown table '" + name + "'");
  return *it->second;
}

const Table& Database::table(const std::string& name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw ConfigError("unknown table '" + name + "'");
  return *it->second;
}

std::vector<std::string> Database::table_names() const {
  std::vector<std::string> names;
  for (const auto& [name, _] : tables_) names.push_back(name);
  return names;
}

}  // namespace autoidx
