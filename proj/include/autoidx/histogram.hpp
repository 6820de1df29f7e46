#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "autoidx/common.hpp"
#include "autoidx/storage.hpp"

namespace autoidx {

// Equi-width histogram over one attribute, used for selectivity estimates.
class AttributeHistogram {
 public:
  static constexpr std::uint32_t kBuckets = 100;

  static AttributeHistogram build(const Table& table, std::uint32_t attr);

  // Fraction of values falling in [lo, hi]; in [0, 1].
  double selectivity(Value lo, Value hi) const;
  std::uint64_t total() const { return total_; }
  Value min_value() const { return min_; }
  Value max_value() const { return max_; }

  // Inverse CDF over the value domain: smallest value v such that at least
  // `fraction` of the data is <= v. Used for interval placement.
  Value quantile(double fraction) const;

 private:
  Value min_ = 0;
  Value max_ = 0;
  double bucket_width_ = 1.0;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> cumulative_;
};

// Per-(table, attribute) histogram cache with lazy refresh.
class HistogramCatalog {
 public:
  explicit HistogramCatalog(const Database& db) : db_(&db) {}

  std::shared_ptr<const AttributeHistogram> get(const std::string& table, std::uint32_t attr);
  // Combined selectivity of the conjuncts, assuming independence.
  double estimate_selectivity(const std::string& table, const Conjuncts& conjuncts);
  // Drops cached histograms so the next access rebuilds them.
  void invalidate();
  // Rebuilds every cached histogram in place (tuner-side refresh, so the
  // query path never pays for a rebuild).
  void refresh();

 private:
  const Database* db_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::uint32_t>, std::shared_ptr<const AttributeHistogram>>
      cache_;
};

}  // namespace autoidx
