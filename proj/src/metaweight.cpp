#include "htad/metaweight.hpp"

#include <stdexcept>
#include <vector>

namespace htad {

RelationMatrix relation_matrix(const HeteroGraph& graph,
                               const MetaWeightConfig& config) {
    if (!(config.eta1 >= 0.0) || !(config.eta2 >= 0.0))
        throw std::invalid_argument("eta1 and eta2 must be finite and >= 0");

    const int T = static_cast<int>(graph.types().size());
    Eigen::MatrixXd R = Eigen::MatrixXd::Ones(T, T);

    // relations sharing an unordered type pair are merged before counting
    std::vector<std::vector<Index>> pair_counts(T, std::vector<Index>(T, 0));
    for (const Relation& rel : graph.relations()) {
        pair_counts[rel.src_type][rel.dst_type] += rel.edge_count;
        if (rel.src_type != rel.dst_type)
            pair_counts[rel.dst_type][rel.src_type] += rel.edge_count;
    }

    for (const Relation& rel : graph.relations()) {
        const int i = rel.src_type;
        const int j = rel.dst_type;
        const Index count = pair_counts[i][j];
        if (count == 0)
            throw std::invalid_argument("relation '" + rel.name +
                                        "' has zero edges; relation regulation "
                                        "divides by the edge count");
        const double value = 1.0 + (i == j ? config.eta1 : 0.0) +
                             config.eta2 / static_cast<double>(count);
        R(i, j) = value;
        R(j, i) = value;
    }
    return RelationMatrix{std::move(R)};
}

WeightedAdjacency meta_weighted_adjacency(const HeteroGraph& graph,
                                          const RelationMatrix& R) {
    const int T = static_cast<int>(graph.types().size());
    if (R.values.rows() != T || R.values.cols() != T)
        throw std::invalid_argument("relation matrix shape does not match type set");

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(graph.edges().size() * 2);
    for (const Edge& e : graph.edges()) {
        const Index u = graph.global_index(e.src);
        const Index v = graph.global_index(e.dst);
        const double w = R.values(e.src.type_id, e.dst.type_id);
        trip.emplace_back(u, v, w);
        trip.emplace_back(v, u, w);
    }
    SparseMatrix B(graph.num_nodes(), graph.num_nodes());
    B.setFromTriplets(trip.begin(), trip.end());
    return WeightedAdjacency{std::move(B), R};
}

} // namespace htad
