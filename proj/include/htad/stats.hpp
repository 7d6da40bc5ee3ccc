#ifndef HTAD_STATS_HPP
#define HTAD_STATS_HPP

#include <cstdint>

namespace htad::stats {

// Global operation counters used to verify the per-epoch cost model:
// sampling work is linear in |E_s|, contrastive loss work is quadratic in
// the per-type node counts.
struct Counters {
    std::uint64_t sampling_ops = 0;  // one per candidate Bernoulli draw
    std::uint64_t loss_pair_ops = 0; // one per (anchor, candidate) pair

    void reset() { *this = Counters{}; }
};

Counters& counters();

} // namespace htad::stats

#endif
