#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace autoidx {

// Attribute values are 4-byte integers; timestamps are monotone counters
// stored in the same width.
using Value = std::int32_t;
using Epoch = std::uint64_t;

inline constexpr Epoch kEpochInfinity = std::numeric_limits<Epoch>::max();
inline constexpr Value kValueMin = std::numeric_limits<Value>::min();
inline constexpr Value kValueMax = std::numeric_limits<Value>::max();

constexpr std::uint32_t kMaxKeyArity = 3;

struct Location {
  std::uint32_t page = 0;
  std::uint32_t slot = 0;

  auto operator<=>(const Location&) const = default;
};

// Linear addressing used by the index build watermark: locations are ordered
// by (page, slot) and pages have a fixed capacity.
inline std::uint64_t linear_index(Location loc, std::uint32_t page_capacity) {
  return static_cast<std::uint64_t>(loc.page) * page_capacity + loc.slot;
}

// Composite index key, padded to the maximum arity. Keys of the same index
// share an arity, so comparing the padded array is lexicographic comparison
// of the real prefix.
struct CompositeKey {
  std::array<Value, kMaxKeyArity> v{0, 0, 0};

  auto operator<=>(const CompositeKey&) const = default;
};

inline CompositeKey make_key(std::span<const Value> values) {
  CompositeKey k;
  for (std::size_t i = 0; i < values.size() && i < kMaxKeyArity; ++i) {
    k.v[i] = values[i];
  }
  return k;
}

// Pads the unused key positions so that a bound stays inclusive for every
// real key of the index's arity.
inline CompositeKey pad_lower(std::span<const Value> values, std::uint32_t arity) {
  CompositeKey k;
  for (std::uint32_t i = 0; i < kMaxKeyArity; ++i) {
    k.v[i] = i < arity && i < values.size() ? values[i] : kValueMin;
  }
  return k;
}

inline CompositeKey pad_upper(std::span<const Value> values, std::uint32_t arity) {
  CompositeKey k;
  for (std::uint32_t i = 0; i < kMaxKeyArity; ++i) {
    k.v[i] = i < arity && i < values.size() ? values[i] : kValueMax;
  }
  return k;
}

// One conjunct of a predicate: attr between lo and hi, both inclusive.
struct AttrRange {
  std::uint32_t attr = 0;
  Value lo = kValueMin;
  Value hi = kValueMax;

  bool is_equality() const { return lo == hi; }
  bool contains(Value value) const { return value >= lo && value <= hi; }
};

using Conjuncts = std::vector<AttrRange>;

inline bool matches(const Conjuncts& conjuncts, std::span<const Value> row) {
  for (const auto& c : conjuncts) {
    if (!c.contains(row[c.attr])) return false;
  }
  return true;
}

struct StaleUpdateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// FNV-1a, used for result digests and config hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t h) {
  return fnv1a(&value, sizeof(value), h);
}

inline std::uint64_t fnv1a_str(const std::string& s,
                               std::uint64_t h = 1469598103934665603ull) {
  return fnv1a(s.data(), s.size(), h);
}

}  // namespace autoidx
