#pragma once

#include <cstdint>
#include <limits>

namespace ampsdp {

std::uint64_t splitmix64(std::uint64_t x);

// Stateless keyed generator: every draw is a pure function of (key, counter).
class keyed_rng {
public:
    explicit keyed_rng(std::uint64_t key) : key_(splitmix64(key ^ 0x6a09e667f3bcc909ULL)) {}

    std::uint64_t bits(std::uint64_t counter) const;
    double uniform(std::uint64_t counter) const;  // in (0, 1)
    double normal(std::uint64_t counter) const;
    double sign(std::uint64_t counter) const { return (bits(counter) >> 63) ? 1.0 : -1.0; }

    keyed_rng derive(std::uint64_t tag) const { return keyed_rng(key_ + splitmix64(tag + 0x9e3779b97f4a7c15ULL)); }
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
};

// Sequential stream over a keyed generator; usable with <random> and <algorithm>.
class rng_stream {
public:
    using result_type = std::uint64_t;

    explicit rng_stream(std::uint64_t seed) : gen_(seed) {}
    explicit rng_stream(keyed_rng gen) : gen_(gen) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return gen_.bits(counter_++); }

    double uniform() { return gen_.uniform(counter_++); }
    double normal() { return gen_.normal(counter_++); }
    std::uint64_t below(std::uint64_t bound);

private:
    keyed_rng gen_;
    std::uint64_t counter_ = 0;
};

}  // namespace ampsdp
