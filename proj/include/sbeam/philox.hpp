#pragma once

// Philox4x32-10 counter-based generator and the Gaussian streams built on it.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace sbeam {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept
{
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// Uniform on (0, 1] with 53 random bits.
inline double uniform_open_closed(std::uint64_t bits) noexcept
{
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Independent Gaussian stream addressed by (seed, stream id, domain).
/// Sample i is a pure function of its address, so draws can be taken in any
/// order from any thread.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t domain = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)),
          domain_(domain)
    {
    }

    /// Two standard normals from one block (Box-Muller).
    std::array<double, 2> pair(std::uint32_t block) const noexcept
    {
        const auto r = philox4x32_10({block, stream_lo_, stream_hi_, domain_}, key_);
        const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
        const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
        const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed(a)));
        const double angle = 2.0 * std::numbers::pi * uniform_open_closed(b);
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double operator()(std::uint64_t i) const noexcept
    {
        return pair(static_cast<std::uint32_t>(i >> 1))[i & 1u];
    }

    /// Uniform on (0, 1] drawn from the same address space.
    double uniform(std::uint64_t i) const noexcept
    {
        const auto r = philox4x32_10(
            {static_cast<std::uint32_t>(i >> 1), stream_lo_, stream_hi_, domain_ ^ 0x80000000u}, key_);
        const std::uint64_t bits = (i & 1u) ? ((static_cast<std::uint64_t>(r[3]) << 32) | r[2])
                                            : ((static_cast<std::uint64_t>(r[1]) << 32) | r[0]);
        return uniform_open_closed(bits);
    }

private:
    PhiloxKey key_;
    std::uint32_t stream_lo_, stream_hi_, domain_;
};

} // namespace sbeam
