#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace dilute {

// Runs fn(i) for i in [0, n) across the given number of threads. Callers
// must write results only to per-index slots; the partition is static, so
// outputs are identical for any worker count.
inline void parallel_for(std::uint64_t n, int workers, const std::function<void(std::uint64_t)>& fn) {
    if (workers <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::uint64_t w = std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::uint64_t t = 0; t < w; ++t) {
        const std::uint64_t lo = n * t / w;
        const std::uint64_t hi = n * (t + 1) / w;
        threads.emplace_back([lo, hi, &fn] {
            for (std::uint64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

struct WilsonInterval {
    double lo;
    double hi;
};

// Wilson score interval for a binomial proportion at z standard normal units.
inline WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.96) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Streaming mean/variance (Welford).
class RunningStat {
  public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    double standard_error() const { return n_ > 0 ? sd() / std::sqrt(static_cast<double>(n_)) : 0.0; }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace dilute
