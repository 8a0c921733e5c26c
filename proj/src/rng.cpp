#include "ampsdp/rng.hpp"

#include <cmath>
#include <numbers>

namespace ampsdp {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t keyed_rng::bits(std::uint64_t counter) const
{
    return splitmix64(key_ ^ splitmix64(counter));
}

double keyed_rng::uniform(std::uint64_t counter) const
{
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double keyed_rng::normal(std::uint64_t counter) const
{
    // Box-Muller on two sub-draws of the same counter.
    const std::uint64_t base = splitmix64(counter);
    const double u1 = (static_cast<double>(splitmix64(key_ ^ base) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(splitmix64(key_ ^ (base + 0x632be59bd9b4e019ULL)) >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t rng_stream::below(std::uint64_t bound)
{
    // Rejection keeps the modulo unbiased.
    const std::uint64_t limit = max() - max() % bound;
    for (;;) {
        const std::uint64_t r = (*this)();
        if (r < limit)
            return r % bound;
    }
}

}  // namespace ampsdp
