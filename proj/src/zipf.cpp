#include "autoidx/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autoidx {

ZipfDistribution::ZipfDistribution(std::uint32_t n, double skew) : n_(n), skew_(skew) {
  if (n == 0) throw ConfigError("zipf: domain must be non-empty");
  if (skew < 0) throw ConfigError("zipf: skew must be non-negative");
  auto table = std::make_shared<std::vector<double>>(n);
  double acc = 0.0;
  for (std::uint32_t k = 1; k <= n; ++k) {
    acc += 1.0 / std::pow(static_cast<double>(k), skew);
    (*table)[k - 1] = acc;
  }
  for (auto& v : *table) v /= acc;
  cdf_ = std::move(table);
}

Value ZipfDistribution::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  auto it = std::lower_bound(cdf_->begin(), cdf_->end(), u);
  if (it == cdf_->end()) --it;
  return static_cast<Value>(it - cdf_->begin() + 1);
}

double ZipfDistribution::cdf(Value v) const {
  if (v < 1) return 0.0;
  if (static_cast<std::uint32_t>(v) >= n_) return 1.0;
  return (*cdf_)[static_cast<std::uint32_t>(v) - 1];
}

Value ZipfDistribution::inverse_cdf(double fraction) const {
  fraction = std::clamp(fraction, 0.0, 1.0);
  auto it = std::lower_bound(cdf_->begin(), cdf_->end(), fraction);
  if (it == cdf_->end()) --it;
  return static_cast<Value>(it - cdf_->begin() + 1);
}

double ZipfDistribution::interval_mass(Value lo, Value hi) const {
  if (hi < lo) return 0.0;
  return cdf(hi) - cdf(lo - 1);
}

ZipfDistribution::Interval ZipfDistribution::interval_at(double cdf_position,
                                                         double fraction) const {
  cdf_position = std::clamp(cdf_position, 0.0, 1.0 - fraction);
  const Value lo = inverse_cdf(cdf_position);
  Value hi = inverse_cdf(cdf_position + fraction);
  if (hi < lo) hi = lo;
  return {lo, hi, interval_mass(lo, hi)};
}

ZipfDistribution::Interval ZipfDistribution::place_interval(std::mt19937_64& rng,
                                                            double fraction,
                                                            double tolerance) const {
  std::uniform_real_distribution<double> uniform(0.0, std::max(0.0, 1.0 - fraction));
  Interval best{1, 1, 0.0};
  double best_err = std::numeric_limits<double>::infinity();
  constexpr int kTries = 48;
  for (int i = 0; i < kTries; ++i) {
    const Interval candidate = interval_at(uniform(rng), fraction);
    const double err = std::abs(candidate.mass - fraction) / fraction;
    if (err < best_err) {
      best = candidate;
      best_err = err;
    }
    if (best_err <= tolerance) break;
  }
  return best;
}

}  // namespace autoidx
