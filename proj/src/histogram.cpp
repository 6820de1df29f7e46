#include "autoidx/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace autoidx {

AttributeHistogram AttributeHistogram::build(const Table& table, std::uint32_t attr) {
  AttributeHistogram h;
  const Epoch epoch = table.committed_epoch();
  Value min = kValueMax;
  Value max = kValueMin;
  std::uint64_t n = 0;
  table.scan_visible(0, epoch, {}, [&](Location, std::span<const Value> row) {
    const Value v = row[attr];
    min = std::min(min, v);
    max = std::max(max, v);
    ++n;
  });
  if (n == 0) {
    h.min_ = 0;
    h.max_ = 0;
    h.counts_.assign(kBuckets, 0);
    h.cumulative_.assign(kBuckets, 0);
    return h;
  }
  h.min_ = min;
  h.max_ = max;
  h.bucket_width_ =
      std::max(1.0, (static_cast<double>(max) - static_cast<double>(min) + 1.0) / kBuckets);
  h.counts_.assign(kBuckets, 0);
  table.scan_visible(0, epoch, {}, [&](Location, std::span<const Value> row) {
    const double offset = static_cast<double>(row[attr]) - static_cast<double>(min);
    auto bucket = static_cast<std::uint32_t>(offset / h.bucket_width_);
    if (bucket >= kBuckets) bucket = kBuckets - 1;
    ++h.counts_[bucket];
  });
  h.total_ = n;
  h.cumulative_.assign(kBuckets, 0);
  std::uint64_t acc = 0;
  for (std::uint32_t b = 0; b < kBuckets; ++b) {
    acc += h.counts_[b];
    h.cumulative_[b] = acc;
  }
  return h;
}

double AttributeHistogram::selectivity(Value lo, Value hi) const {
  if (total_ == 0 || hi < lo || hi < min_ || lo > max_) return 0.0;
  const double lo_d = std::max<double>(lo, min_);
  const double hi_d = std::min<double>(hi, max_);
  const double base = static_cast<double>(min_);
  double covered = 0.0;
  // Sum full buckets and pro-rate the partial boundary buckets.
  const double lo_pos = (lo_d - base) / bucket_width_;
  const double hi_pos = (hi_d - base + 1.0) / bucket_width_;
  const auto first = static_cast<std::uint32_t>(std::min<double>(lo_pos, kBuckets - 1));
  const auto last = static_cast<std::uint32_t>(
      std::min<double>(std::max(hi_pos - 1e-12, 0.0), kBuckets - 1));
  for (std::uint32_t b = first; b <= last; ++b) {
    const double b_lo = b;
    const double b_hi = b + 1.0;
    const double overlap =
        std::max(0.0, std::min(hi_pos, b_hi) - std::max(lo_pos, b_lo));
    covered += counts_[b] * std::min(1.0, overlap);
  }
  return std::clamp(covered / static_cast<double>(total_), 0.0, 1.0);
}

Value AttributeHistogram::quantile(double fraction) const {
  if (total_ == 0) return min_;
  fraction = std::clamp(fraction, 0.0, 1.0);
  const auto target = static_cast<std::uint64_t>(fraction * static_cast<double>(total_));
  auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) return max_;
  const auto bucket = static_cast<std::uint32_t>(it - cumulative_.begin());
  const std::uint64_t before = bucket == 0 ? 0 : cumulative_[bucket - 1];
  const std::uint64_t in_bucket = counts_[bucket];
  double frac_in = in_bucket == 0
                       ? 0.0
                       : static_cast<double>(target - before) / static_cast<double>(in_bucket);
  const double v = static_cast<double>(min_) + (bucket + frac_in) * bucket_width_;
  return static_cast<Value>(std::clamp<double>(v, min_, max_));
}

std::shared_ptr<const AttributeHistogram> HistogramCatalog::get(const std::string& table,
                                                                std::uint32_t attr) {
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find({table, attr});
    if (it != cache_.end()) return it->second;
  }
  auto built =
      std::make_shared<const AttributeHistogram>(AttributeHistogram::build(db_->table(table), attr));
  std::lock_guard lock(mutex_);
  auto [it, _] = cache_.insert_or_assign({table, attr}, std::move(built));
  return it->second;
}

double HistogramCatalog::estimate_selectivity(const std::string& table,
                                              const Conjuncts& conjuncts) {
  double s = 1.0;
  for (const auto& c : conjuncts) {
    s *= get(table, c.attr)->selectivity(c.lo, c.hi);
  }
  return std::clamp(s, 0.0, 1.0);
}

void HistogramCatalog::invalidate() {
  std::lock_guard lock(mutex_);
  cache_.clear();
}

void HistogramCatalog::refresh() {
  std::vector<std::pair<std::string, std::uint32_t>> keys;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [key, _] : cache_) keys.push_back(key);
  }
  for (const auto& [table, attr] : keys) {
    auto built = std::make_shared<const AttributeHistogram>(
        AttributeHistogram::build(db_->table(table), attr));
    std::lock_guard lock(mutex_);
    cache_.insert_or_assign({table, attr}, std::move(built));
  }
}

}  // namespace autoidx
