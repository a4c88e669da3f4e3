#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "json.hpp"

#include "roq/errors.hpp"

namespace roq::sim {

/// Counter-based random stream. Output i of stream (replication, sequence)
/// is a bijective 64-bit mix of the counter
///   (replication << 40) | (sequence << 32) | i,
/// advanced through the usual splitmix increment, so distinct
/// (replication, sequence) pairs can never overlap: their counter blocks
/// are disjoint and the mix is injective. Replication order therefore has
/// no effect on any stream's content.
class Stream {
public:
    Stream(std::uint64_t base_seed, std::uint32_t replication, std::uint32_t sequence) {
        if (replication >= (1u << 24) || sequence >= (1u << 8)) {
            fail_precondition("StreamSpace", "replication < 2^24 and sequence < 2^8 required");
        }
        base_ = mix(base_seed) +
                ((static_cast<std::uint64_t>(replication) << 40 |
                  static_cast<std::uint64_t>(sequence) << 32) *
                 kGolden);
    }

    std::uint64_t next_u64() { return mix(base_ + (++count_) * kGolden); }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t draws() const { return count_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t base_ = 0;
    std::uint64_t count_ = 0;
};

/// Nonnegative service/interarrival time distribution with known moments.
struct DistSpec {
    enum class Kind { Exponential, Deterministic, Uniform, Lognormal };

    Kind kind = Kind::Exponential;
    double p1 = 1.0; // rate | value | lo | mu_log
    double p2 = 0.0; // -    | -     | hi | sigma_log

    static DistSpec exponential(double rate) { return {Kind::Exponential, rate, 0.0}; }
    static DistSpec deterministic(double value) { return {Kind::Deterministic, value, 0.0}; }
    static DistSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static DistSpec lognormal(double mu_log, double sigma_log) {
        return {Kind::Lognormal, mu_log, sigma_log};
    }

    double mean() const;
    double variance() const;
    double sample(Stream& s) const;
    void validate() const; // mean > 0, nonnegative support

    static DistSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Replication fan-out: replication r, sequence q draws from
/// Stream(base_seed, r, q); the (r, q) block layout guarantees
/// non-overlapping streams for all pairs. Exactly one of horizon or
/// job_count is meaningful, depending on the model being replicated.
struct ReplicationPlan {
    int replications = 1;
    std::uint64_t base_seed = 0;
    double horizon = 0.0;
    std::size_t job_count = 0;

    Stream stream(int replication, int sequence) const {
        return Stream(base_seed, static_cast<std::uint32_t>(replication),
                      static_cast<std::uint32_t>(sequence));
    }
};

/// Number of worker threads: explicit request, else ROQ_THREADS, else
/// hardware concurrency.
int resolve_threads(int requested);

/// Runs body(0..count-1) on the resolved worker count. Callers keep
/// per-index output slots, so the reduction order stays deterministic.
void parallel_replications(int count, int threads, const std::function<void(int)>& body);

} // namespace roq::sim
