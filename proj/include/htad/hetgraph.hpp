#ifndef HTAD_HETGRAPH_HPP
#define HTAD_HETGRAPH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "htad/rng.hpp"

namespace htad {

using Index = std::int64_t;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct NodeType {
    int id = 0;
    std::string name;
    Index count = 0;       // N_t
    Index feature_dim = 0; // d_t, 0 if featureless
};

struct NodeRef {
    int type_id = 0;
    Index local_index = 0;

    friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

struct Relation {
    int id = 0;
    std::string name;
    int src_type = 0;
    int dst_type = 0;
    Index edge_count = 0;

    bool intra_type() const { return src_type == dst_type; }
};

struct Edge {
    int relation_id = 0;
    NodeRef src;
    NodeRef dst;
};

struct LabelAssignment {
    int target_type = 0;
    Index num_classes = 0;
    // one row per target-type node; rows of unlabeled nodes are all-zero
    Eigen::MatrixXd labels;
    // over all N nodes, 1 at global indices of labeled target nodes
    Eigen::VectorXd labeled_mask;

    Index num_labeled() const {
        return static_cast<Index>(labeled_mask.sum() + 0.5);
    }
};

class HeteroGraph {
public:
    HeteroGraph(std::vector<NodeType> types, std::vector<Relation> relations,
                std::vector<Edge> edges,
                std::map<int, Eigen::MatrixXd> features = {},
                bool undirected = true);

    const std::vector<NodeType>& types() const { return types_; }
    const std::vector<Relation>& relations() const { return relations_; }
    const std::vector<Edge>& edges() const { return edges_; }
    bool undirected() const { return undirected_; }

    Index num_nodes() const { return num_nodes_; }
    Index type_offset(int type_id) const;
    Index global_index(const NodeRef& ref) const;
    NodeRef node_ref(Index global) const;

    Index degree(const NodeRef& ref) const;
    Eigen::VectorXd degrees() const; // over all N nodes, global order

    // Features for one type; featureless types yield one-hot identity.
    Eigen::MatrixXd features(int type_id) const;
    bool has_features(int type_id) const;

    // Symmetric unweighted adjacency (each stored edge expanded both ways).
    SparseMatrix adjacency() const;
    // Adjacency restricted to one relation, still N x N and symmetric.
    SparseMatrix relation_adjacency(int relation_id) const;

    bool has_edge(int relation_id, const NodeRef& a, const NodeRef& b) const;

private:
    std::vector<NodeType> types_;
    std::vector<Relation> relations_;
    std::vector<Edge> edges_;
    std::map<int, Eigen::MatrixXd> features_;
    bool undirected_;
    Index num_nodes_ = 0;
    std::vector<Index> offsets_;
    std::vector<Index> degrees_;
    // unordered (min,max) global pairs per relation for O(1) membership
    std::vector<std::vector<std::pair<Index, Index>>> edge_sets_;
};

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedGraph {
    HeteroGraph graph;
    std::optional<LabelAssignment> labels;
};

LoadedGraph load_graph(const std::string& schema_path,
                       const std::string& edges_path,
                       const std::map<std::string, std::string>& features_paths = {},
                       const std::string& labels_path = "",
                       const std::string& target_type = "");

void save_graph(const HeteroGraph& graph, const std::string& schema_path,
                const std::string& edges_path);
void save_labels(const LabelAssignment& labels, const HeteroGraph& graph,
                 const std::string& path);
void save_features(const HeteroGraph& graph, int type_id, const std::string& path);

// Retains ceil(rate * #labeled) labels chosen uniformly under the seed.
LabelAssignment subsample_labels(const LabelAssignment& labels,
                                 const HeteroGraph& graph, double rate,
                                 std::uint64_t seed);

} // namespace htad

#endif
