#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace ballbot {

// Seeded random source with self-contained distributions. std::* distributions
// are implementation-defined, so uniform/normal are generated here directly to
// keep every sampled sequence reproducible from the seed alone.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        // Rejection-free modulo bias is negligible for n << 2^64, but stay exact.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // Standard normal via Marsaglia polar; one spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
        os.precision(17);
        os << spare_;
        return os.str();
    }

    void deserialize(const std::string& s) {
        std::istringstream is(s);
        int flag = 0;
        is >> engine_ >> flag >> spare_;
        has_spare_ = flag != 0;
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a over arbitrary bytes; used for seed derivation and file checksums.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(double x, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    return fnv1a(&bits, sizeof(bits), h);
}

// Per-point seed for parallel sweeps: mixing the grid coordinates into the
// master seed keeps results independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, double alpha, double beta) {
    return master ^ fnv1a(beta, fnv1a(alpha));
}

}  // namespace ballbot
