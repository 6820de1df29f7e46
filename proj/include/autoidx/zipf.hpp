#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "autoidx/common.hpp"

namespace autoidx {

// Zipf distribution over [1, n] with p(k) proportional to 1/k^skew.
// Sampling and interval placement go through a precomputed CDF table.
class ZipfDistribution {
 public:
  ZipfDistribution(std::uint32_t n, double skew);

  std::uint32_t n() const { return n_; }
  double skew() const { return skew_; }

  Value sample(std::mt19937_64& rng) const;
  // P(X <= v) for v in [1, n].
  double cdf(Value v) const;
  // Smallest value whose CDF reaches `fraction`.
  Value inverse_cdf(double fraction) const;
  // Probability mass of the inclusive interval.
  double interval_mass(Value lo, Value hi) const;

  // Places [lo, hi] so its mass approximates `fraction`, retrying across
  // CDF positions until the realized mass is within `tolerance` relative
  // (best effort after a bounded number of tries).
  struct Interval {
    Value lo;
    Value hi;
    double mass;
  };
  Interval place_interval(std::mt19937_64& rng, double fraction,
                          double tolerance = 0.25) const;
  // Deterministic variant anchored at a CDF position (affinity subdomains).
  Interval interval_at(double cdf_position, double fraction) const;

 private:
  std::uint32_t n_;
  double skew_;
  std::shared_ptr<const std::vector<double>> cdf_;  // cdf_[k-1] = P(X <= k)
};

}  // namespace autoidx
