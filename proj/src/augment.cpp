#include "htad/augment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>
#include <stdexcept>

#include "htad/stats.hpp"

namespace htad {

namespace stats {
Counters& counters() {
    static Counters instance;
    return instance;
}
} // namespace stats

void AugmentConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(p0 >= 0.0 && p0 <= 1.0))
        throw std::invalid_argument("p0 must lie in [0, 1]");
    if (!(neg_multiplier >= 0.0))
        throw std::invalid_argument("neg_multiplier must be >= 0");
}

std::vector<Candidate> build_sample_space(const HeteroGraph& graph,
                                          const AugmentConfig& config, Rng& rng) {
    config.validate();
    std::vector<Candidate> candidates;
    candidates.reserve(graph.edges().size() * 2);
    for (const Edge& e : graph.edges())
        candidates.push_back(Candidate{e.relation_id, e.src, e.dst, true});

    for (const Relation& rel : graph.relations()) {
        const Index target = static_cast<Index>(
            std::ceil(config.neg_multiplier * static_cast<double>(rel.edge_count)));
        if (target == 0) continue;
        const Index ns = graph.types()[rel.src_type].count;
        const Index nd = graph.types()[rel.dst_type].count;

        std::set<std::pair<Index, Index>> chosen;
        const Index max_attempts = 50 * target + 1000;
        Index attempts = 0;
        while (static_cast<Index>(chosen.size()) < target &&
               attempts < max_attempts) {
            ++attempts;
            Index a = static_cast<Index>(rng.next_below(ns));
            Index b = static_cast<Index>(rng.next_below(nd));
            NodeRef u{rel.src_type, a};
            NodeRef v{rel.dst_type, b};
            if (rel.intra_type()) {
                if (a == b) continue;
                if (a > b) std::swap(u.local_index, v.local_index);
            }
            if (graph.has_edge(rel.id, u, v)) continue;
            const auto key = std::make_pair(u.local_index, v.local_index);
            if (!chosen.insert(key).second) continue;
            candidates.push_back(Candidate{rel.id, u, v, false});
        }
        if (static_cast<Index>(chosen.size()) < target) {
            std::cerr << "warning: relation '" << rel.name << "' block too dense; "
                      << "sampled " << chosen.size() << " of " << target
                      << " requested non-edges\n";
        }
    }
    return candidates;
}

double reserve_probability(double delta, bool in_graph,
                           const AugmentConfig& config) {
    if (!std::isfinite(delta))
        throw std::invalid_argument("delta must be finite");
    const double decay = std::exp(-config.lambda * std::abs(delta));
    return in_graph ? 1.0 - (1.0 - config.p0) * decay : 1.0 - decay;
}

AugmentedEdgeSet sample_augmented_graph(const HeteroGraph& graph,
                                        const std::vector<Candidate>& sample_space,
                                        const HlidScores& hlid,
                                        const AugmentConfig& config,
                                        std::uint64_t epoch) {
    config.validate();
    Rng rng = Rng(config.seed).substream("htad_bernoulli", epoch);

    AugmentedEdgeSet out;
    out.edges.reserve(sample_space.size());
    for (const Candidate& c : sample_space) {
        stats::counters().sampling_ops += 1;
        const double delta = hlid.z[graph.global_index(c.u)] -
                             hlid.z[graph.global_index(c.v)];
        const double p = reserve_probability(delta, c.in_graph, config);
        if (rng.next_double() < p) {
            out.edges.push_back(AugmentedEdge{
                c.relation_id, c.u, c.v,
                c.in_graph ? Provenance::Original : Provenance::Generated});
        }
    }
    return out;
}

AugmentedEdgeSet sample_augmented_graph(const HeteroGraph& graph,
                                        const HlidScores& hlid,
                                        const AugmentConfig& config,
                                        std::uint64_t epoch) {
    Rng rng = Rng(config.seed).substream("htad_sample_space");
    const auto space = build_sample_space(graph, config, rng);
    return sample_augmented_graph(graph, space, hlid, config, epoch);
}

} // namespace htad
