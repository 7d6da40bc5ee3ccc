#ifndef HTAD_SYNTH_HPP
#define HTAD_SYNTH_HPP

#include <vector>

#include "htad/hetgraph.hpp"

namespace htad {

struct SynthRelationSpec {
    int src_type = 0;
    int dst_type = 0;
    Index edge_count = 0;
};

struct SynthSpec {
    std::vector<Index> type_counts;
    std::vector<SynthRelationSpec> relations;
    Index num_classes = 3;
    double homophily = 0.9;   // probability an edge joins same-class endpoints
    Index feature_dim = 16;
    double feature_noise = 1.0;
    double label_rate = 0.1;
    int target_type = 0;
    bool skew_labels = false; // concentrate labels in low-class regions
    double skew_strength = 2.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    HeteroGraph graph;
    LabelAssignment train_labels; // revealed at label_rate
    LabelAssignment full_labels;  // ground truth over all target nodes
    std::vector<std::vector<Index>> classes; // latent class per node, per type
};

SynthResult generate(const SynthSpec& spec);

} // namespace htad

#endif
