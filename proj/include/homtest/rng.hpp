#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "homtest/errors.hpp"

namespace homtest {

// splitmix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ mix64(b));
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b), c);
}

// Deterministic RNG. All randomness in the library flows through this type so
// that a fixed seed reproduces the exact draw sequence on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0,1) with 53 random bits; avoids the implementation-defined
  // std::uniform_real_distribution.
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in {0,...,n-1}, n >= 1.
  int next_int(int n) {
    if (n <= 0) throw ContractError("Rng::next_int needs n >= 1");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
};

// Inverse-CDF sampler over a fixed weight vector. Zero-weight items are never
// drawn. Identical seeds yield identical sample sequences.
class WeightedSampler {
 public:
  explicit WeightedSampler(const std::vector<double>& weights) {
    items_.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) items_[i] = static_cast<int>(i);
    build(weights);
  }

  WeightedSampler(const std::vector<double>& weights, std::vector<int> subset)
      : items_(std::move(subset)) {
    std::vector<double> w(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) w[i] = weights.at(items_[i]);
    build(w);
  }

  double total() const { return cum_.empty() ? 0.0 : cum_.back(); }

  int sample(Rng& rng) const {
    if (total() <= 0.0) throw ContractError("sampling from zero total weight");
    const double u = rng.next_double() * total();
    std::size_t lo = 0, hi = cum_.size();
    while (lo < hi) {  // first index with cum_[i] > u
      const std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] > u) hi = mid; else lo = mid + 1;
    }
    if (lo >= cum_.size()) lo = cum_.size() - 1;  // float edge. never hit for u < total
    return items_[lo];
  }

 private:
  void build(const std::vector<double>& w) {
    if (items_.empty()) throw ContractError("sampler needs at least one item");
    cum_.resize(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] < 0.0) throw ContractError("negative weight");
      acc += w[i];
      cum_[i] = acc;
    }
  }

  std::vector<int> items_;
  std::vector<double> cum_;
};

}  // namespace homtest
