#ifndef HTAD_METAWEIGHT_HPP
#define HTAD_METAWEIGHT_HPP

#include <Eigen/Dense>

#include "htad/hetgraph.hpp"

namespace htad {

struct MetaWeightConfig {
    double eta1 = 0.0; // intra-type amplification
    double eta2 = 0.0; // per-relation regulation, scaled by 1/edge count
};

struct RelationMatrix {
    Eigen::MatrixXd values; // |T| x |T|, symmetric
};

struct WeightedAdjacency {
    SparseMatrix matrix; // N x N, same support as A
    RelationMatrix relation_matrix;
};

// R_ij = 1 + eta1*[i==j] + eta2 / #edges(i,j) for declared relations,
// 1 elsewhere (masked by A's zero blocks anyway).
RelationMatrix relation_matrix(const HeteroGraph& graph,
                               const MetaWeightConfig& config);

// B_uv = A_uv * R_{type(u),type(v)}; per-edge lookup, never dense.
WeightedAdjacency meta_weighted_adjacency(const HeteroGraph& graph,
                                          const RelationMatrix& R);

} // namespace htad

#endif
