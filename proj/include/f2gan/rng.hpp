#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace f2gan {

/// Seedable deterministic stream: identical seed => identical draw sequence.
/// Distributions are implemented on top of the raw mt19937_64 output because
/// the <random> distribution adaptors are implementation-defined.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; two raw draws per variate, no caching.
    double normal() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer on [0, n). Rejection sampling, bias-free.
    std::size_t index(std::size_t n) {
        if (n <= 1) return 0;
        std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= bound);
        return static_cast<std::size_t>(x % n);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

    /// Independent stream derived from this stream's seed and a label.
    RngStream substream(std::string_view name) const;

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace f2gan
