#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autoidx/partial_index.hpp"

namespace autoidx {

struct HoltWintersParams {
  double alpha = 0.3;
  double beta = 0.1;
  double gamma = 0.2;
  std::uint32_t season_length = 10;  // m, in tuning cycles

  void validate() const;
};

inline constexpr double kUtilityEpsilon = 1e-6;

// Triple exponential smoothing with multiplicative seasonality. The first m
// observations warm the model up (forecast = running mean); initialization
// then sets the level to the first-period mean, the trend from the second
// period when one exists, and the seasonals to y_i / mean, clamped to
// [0.1, 10].
class HoltWintersState {
 public:
  explicit HoltWintersState(HoltWintersParams params = {});

  void observe(double y);
  double forecast(std::uint64_t h) const;  // h >= 1; floored at 0

  bool initialized() const { return initialized_; }
  std::uint64_t observations() const { return n_; }
  double level() const { return level_; }
  double trend() const { return trend_; }
  const std::vector<double>& seasonal() const { return seasonal_; }
  const HoltWintersParams& params() const { return params_; }

 private:
  void initialize_from_warmup();

  HoltWintersParams params_;
  bool initialized_ = false;
  double level_ = 0.0;
  double trend_ = 0.0;
  std::vector<double> seasonal_;
  std::vector<double> warmup_;
  std::uint64_t n_ = 0;
};

// Per-index forecasting state, retained after drops so that a recurring
// spec keeps its learned pattern. Bounded by LRU eviction.
class UtilityForecaster {
 public:
  explicit UtilityForecaster(HoltWintersParams params = {}, std::size_t capacity = 1024)
      : params_(params), capacity_(capacity) {}

  struct HistoryRow {
    std::uint64_t cycle;
    double y;
    double level;
    double trend;
    double forecast1;
  };

  // Seeds warm-up with a single observation; a tracked spec takes it as a
  // new observation instead.
  void bootstrap(const IndexKeySpec& spec, double initial_utility, std::uint64_t cycle = 0);
  void observe(const IndexKeySpec& spec, double y, std::uint64_t cycle);
  void retire(const IndexKeySpec& spec);

  const HoltWintersState* lookup(const IndexKeySpec& spec) const;
  bool dropped(const IndexKeySpec& spec) const;
  std::optional<double> forecast(const IndexKeySpec& spec, std::uint64_t h) const;
  std::vector<IndexKeySpec> known_specs() const;
  std::size_t size() const { return entries_.size(); }

  const std::vector<HistoryRow>* history(const IndexKeySpec& spec) const;
  // CSV rows "cycle,y,level,trend,forecast"; header included.
  std::string history_csv(const IndexKeySpec& spec) const;

 private:
  struct Entry {
    HoltWintersState state;
    bool dropped = false;
    std::uint64_t last_used = 0;
    std::vector<HistoryRow> history;
  };

  Entry& touch(const IndexKeySpec& spec);
  void evict_if_needed();

  HoltWintersParams params_;
  std::size_t capacity_;
  std::uint64_t tick_ = 0;
  std::map<IndexKeySpec, Entry> entries_;
};

}  // namespace autoidx
