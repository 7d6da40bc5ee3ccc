#ifndef HTAD_AUGMENT_HPP
#define HTAD_AUGMENT_HPP

#include <vector>

#include "htad/hetgraph.hpp"
#include "htad/hlid.hpp"

namespace htad {

struct AugmentConfig {
    double lambda = 1.0;        // density scale of the exponential threshold
    double p0 = 0.5;            // reservation floor for original edges
    double neg_multiplier = 1.0; // candidate non-edges per relation, k * |E_r|
    std::uint64_t seed = 0;

    void validate() const;
};

struct Candidate {
    int relation_id = 0;
    NodeRef u;
    NodeRef v;
    bool in_graph = false; // member of E (vs. sampled non-edge)
};

enum class Provenance { Original, Generated };

struct AugmentedEdge {
    int relation_id = 0;
    NodeRef u;
    NodeRef v;
    Provenance provenance = Provenance::Original;
};

struct AugmentedEdgeSet {
    std::vector<AugmentedEdge> edges;
};

// E_s = E plus, per relation r, ceil(k * |E_r|) distinct uniformly sampled
// non-edges with r's type signature. Fixed once at setup; only the per-epoch
// Bernoulli draws refresh.
std::vector<Candidate> build_sample_space(const HeteroGraph& graph,
                                          const AugmentConfig& config, Rng& rng);

// p = 1 - (1 - p0) exp(-lambda |delta|) for original edges,
// p = 1 - exp(-lambda |delta|) for sampled non-edges.
double reserve_probability(double delta, bool in_graph,
                           const AugmentConfig& config);

// Keeps each candidate independently under the closed-form probability with
// delta = HLID(u) - HLID(v). Deterministic per (seed, epoch).
AugmentedEdgeSet sample_augmented_graph(const HeteroGraph& graph,
                                        const std::vector<Candidate>& sample_space,
                                        const HlidScores& hlid,
                                        const AugmentConfig& config,
                                        std::uint64_t epoch);

// Convenience: builds the sample space internally (one-shot CLI path).
AugmentedEdgeSet sample_augmented_graph(const HeteroGraph& graph,
                                        const HlidScores& hlid,
                                        const AugmentConfig& config,
                                        std::uint64_t epoch = 0);

} // namespace htad

#endif
