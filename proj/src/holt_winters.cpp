#include "autoidx/holt_winters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace autoidx {

void HoltWintersParams::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(alpha) || !in_unit(beta) || !in_unit(gamma)) {
    throw ConfigError("holt-winters: smoothing parameters must be in [0, 1]");
  }
  if (season_length < 2) throw ConfigError("holt-winters: season length must be >= 2");
}

HoltWintersState::HoltWintersState(HoltWintersParams params) : params_(params) {
  params_.validate();
}

void HoltWintersState::initialize_from_warmup() {
  const std::uint32_t m = params_.season_length;
  const double first_mean =
      std::accumulate(warmup_.begin(), warmup_.begin() + m, 0.0) / m;
  level_ = first_mean;
  if (warmup_.size() >= 2ull * m) {
    const double second_mean =
        std::accumulate(warmup_.begin() + m, warmup_.begin() + 2 * m, 0.0) / m;
    trend_ = (second_mean - first_mean) / m;
  } else {
    trend_ = 0.0;
  }
  seasonal_.resize(m);
  const double denom = std::max(first_mean, kUtilityEpsilon);
  for (std::uint32_t i = 0; i < m; ++i) {
    seasonal_[i] = std::clamp(warmup_[i] / denom, 0.1, 10.0);
  }
  initialized_ = true;
}

void HoltWintersState::observe(double y) {
  y = std::max(y, kUtilityEpsilon);
  const std::uint32_t m = params_.season_length;
  if (!initialized_) {
    warmup_.push_back(y);
    ++n_;
    if (warmup_.size() >= m) initialize_from_warmup();
    return;
  }
  // Level -> trend -> seasonal, each reading the pre-update values it needs.
  const std::uint32_t pos = static_cast<std::uint32_t>(n_ % m);
  const double s_prev = std::max(seasonal_[pos], kUtilityEpsilon);
  const double prev_level = level_;
  const double prev_trend = trend_;
  const double base = std::max(prev_level + prev_trend, kUtilityEpsilon);
  const double level = params_.alpha * (y / s_prev) +
                       (1.0 - params_.alpha) * (prev_level + prev_trend);
  const double trend = params_.beta * (level - prev_level) + (1.0 - params_.beta) * prev_trend;
  const double seasonal = params_.gamma * (y / base) + (1.0 - params_.gamma) * s_prev;
  level_ = level;
  trend_ = trend;
  seasonal_[pos] = seasonal;
  ++n_;
}

double HoltWintersState::forecast(std::uint64_t h) const {
  if (h == 0) throw ConfigError("forecast horizon must be >= 1");
  if (!initialized_) {
    if (warmup_.empty()) return 0.0;
    const double mean =
        std::accumulate(warmup_.begin(), warmup_.end(), 0.0) / warmup_.size();
    return std::max(mean, 0.0);
  }
  const std::uint32_t m = params_.season_length;
  const std::uint32_t pos = static_cast<std::uint32_t>((n_ + h - 1) % m);
  const double value = (level_ + static_cast<double>(h) * trend_) * seasonal_[pos];
  return std::max(value, 0.0);
}

UtilityForecaster::Entry& UtilityForecaster::touch(const IndexKeySpec& spec) {
  auto it = entries_.find(spec);
  if (it == entries_.end()) {
    it = entries_.emplace(spec, Entry{HoltWintersState(params_), false, 0, {}}).first;
    it->second.last_used = ++tick_;
    evict_if_needed();  // map erase leaves other iterators valid
  }
  it->second.last_used = ++tick_;
  return it->second;
}

void UtilityForecaster::evict_if_needed() {
  while (entries_.size() > capacity_) {
    auto victim = entries_.begin();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
      if (it->second.last_used < victim->second.last_used) victim = it;
    }
    entries_.erase(victim);
  }
}

void UtilityForecaster::bootstrap(const IndexKeySpec& spec, double initial_utility,
                                  std::uint64_t cycle) {
  observe(spec, initial_utility, cycle);
}

void UtilityForecaster::observe(const IndexKeySpec& spec, double y, std::uint64_t cycle) {
  Entry& entry = touch(spec);
  entry.state.observe(y);
  constexpr std::size_t kHistoryCap = 100000;
  if (entry.history.size() < kHistoryCap) {
    entry.history.push_back(
        {cycle, y, entry.state.level(), entry.state.trend(), entry.state.forecast(1)});
  }
}

void UtilityForecaster::retire(const IndexKeySpec& spec) {
  auto it = entries_.find(spec);
  if (it != entries_.end()) it->second.dropped = true;
}

const HoltWintersState* UtilityForecaster::lookup(const IndexKeySpec& spec) const {
  auto it = entries_.find(spec);
  return it == entries_.end() ? nullptr : &it->second.state;
}

bool UtilityForecaster::dropped(const IndexKeySpec& spec) const {
  auto it = entries_.find(spec);
  return it != entries_.end() && it->second.dropped;
}

std::optional<double> UtilityForecaster::forecast(const IndexKeySpec& spec,
                                                  std::uint64_t h) const {
  const HoltWintersState* state = lookup(spec);
  if (state == nullptr) return std::nullopt;
  return state->forecast(h);
}

std::vector<IndexKeySpec> UtilityForecaster::known_specs() const {
  std::vector<IndexKeySpec> out;
  for (const auto& [spec, _] : entries_) out.push_back(spec);
  return out;
}

const std::vector<UtilityForecaster::HistoryRow>* UtilityForecaster::history(
    const IndexKeySpec& spec) const {
  auto it = entries_.find(spec);
  return it == entries_.end() ? nullptr : &it->second.history;
}

std::string UtilityForecaster::history_csv(const IndexKeySpec& spec) const {
  std::ostringstream out;
  out << "cycle,y,level,trend,forecast\n";
  if (const auto* rows = history(spec)) {
    out.precision(12);
    for (const auto& row : *rows) {
      out << row.cycle << "," << row.y << "," << row.level << "," << row.trend << ","
          << row.forecast1 << "\n";
    }
  }
  return out.str();
}

}  // namespace autoidx
