#pragma once

#include <cmath>
#include <cstdint>

namespace sct {

/// Philox4x32-10 counter block. Stateless: output depends only on (key, counter).
struct PhiloxBlock {
    uint32_t v[4];
};

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t ctr[4], const uint32_t key[2]) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    const uint32_t n0 = hi1 ^ ctr[1] ^ key[0];
    const uint32_t n1 = lo1;
    const uint32_t n2 = hi0 ^ ctr[3] ^ key[1];
    const uint32_t n3 = lo0;
    ctr[0] = n0;
    ctr[1] = n1;
    ctr[2] = n2;
    ctr[3] = n3;
}

}  // namespace detail

/// 10-round Philox4x32. key = (seed lo, seed hi); counter = (block lo/hi, stream lo/hi).
inline PhiloxBlock philox4x32(uint64_t seed, uint64_t stream, uint64_t block) {
    uint32_t ctr[4] = {
        static_cast<uint32_t>(block), static_cast<uint32_t>(block >> 32),
        static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
    uint32_t key[2] = {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) {
        detail::philox_round(ctr, key);
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return PhiloxBlock{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

/// Uniform in [2^-54, 1) from 53 random bits; never returns 0 so logs are safe.
inline double uniform_from_bits(uint32_t hi, uint32_t lo) {
    const uint64_t bits = (static_cast<uint64_t>(hi) << 21) | (lo >> 11);  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1p-53;
}

/// Inverse standard-normal CDF, Wichura's AS 241 (double precision).
double normal_quantile(double p);

enum class NormalMethod { inverse_cdf, box_muller };

/// Counter-based stream of uniforms/normals. Streams with distinct (seed, stream)
/// pairs are statistically independent; a fixed pair replays the same sequence.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream, NormalMethod method = NormalMethod::inverse_cdf)
        : seed_(seed), stream_(stream), method_(method) {}

    double uniform() {
        if (lane_ == 0) {
            block_ = philox4x32(seed_, stream_, block_index_++);
        }
        const uint32_t a = block_.v[lane_], b = block_.v[lane_ + 1];
        lane_ = (lane_ + 2) & 3;
        return uniform_from_bits(a, b);
    }

    double normal() {
        if (method_ == NormalMethod::inverse_cdf) return normal_quantile(uniform());
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

    /// Index into [0, n) with negligible modulo bias for n << 2^53.
    uint64_t index(uint64_t n) { return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n; }

private:
    uint64_t seed_;
    uint64_t stream_;
    NormalMethod method_;
    uint64_t block_index_ = 0;
    PhiloxBlock block_{};
    int lane_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sct
