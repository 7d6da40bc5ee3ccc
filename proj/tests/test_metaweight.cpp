#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "htad/metaweight.hpp"

using namespace htad;

namespace {

HeteroGraph two_type_graph() {
    // a: 3 nodes, b: 2 nodes; ab has 3 edges, aa has 2
    std::vector<NodeType> types{{0, "a", 3, 0}, {1, "b", 2, 0}};
    std::vector<Relation> rels{{0, "ab", 0, 1, 0}, {1, "aa", 0, 0, 0}};
    std::vector<Edge> edges{{0, {0, 0}, {1, 0}}, {0, {0, 1}, {1, 0}},
                            {0, {0, 2}, {1, 1}}, {1, {0, 0}, {0, 1}},
                            {1, {0, 1}, {0, 2}}};
    return HeteroGraph(types, rels, edges);
}

} // namespace

TEST_CASE("relation matrix entries, hand-computed") {
    HeteroGraph g = two_type_graph();
    MetaWeightConfig config{0.5, 2.0};
    const RelationMatrix R = relation_matrix(g, config);
    REQUIRE(R.values.rows() == 2);
    // R_aa = 1 + eta1 + eta2/2 = 2.5 ; R_ab = 1 + eta2/3 = 5/3 ; R_bb = 1
    CHECK(R.values(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(R.values(0, 1) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(R.values(1, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    CHECK(R.values(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK((R.values - R.values.transpose()).norm() == 0.0);
}

TEST_CASE("eta1=eta2=0 collapses the weighting to plain adjacency") {
    HeteroGraph g = two_type_graph();
    const WeightedAdjacency B =
        meta_weighted_adjacency(g, relation_matrix(g, MetaWeightConfig{}));
    const Eigen::MatrixXd diff =
        Eigen::MatrixXd(B.matrix) - Eigen::MatrixXd(g.adjacency());
    CHECK(diff.norm() == 0.0);
}

TEST_CASE("weighted adjacency equals the Hadamard-product oracle") {
    HeteroGraph g = two_type_graph();
    MetaWeightConfig config{0.3, 1.7};
    const RelationMatrix R = relation_matrix(g, config);
    const WeightedAdjacency B = meta_weighted_adjacency(g, R);

    // oracle: expand R into a dense N x N block matrix and multiply entrywise
    const Index n = g.num_nodes();
    Eigen::MatrixXd blockR(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            blockR(i, j) = R.values(g.node_ref(i).type_id, g.node_ref(j).type_id);
    const Eigen::MatrixXd oracle =
        Eigen::MatrixXd(g.adjacency()).cwiseProduct(blockR);
    CHECK((Eigen::MatrixXd(B.matrix) - oracle).norm() == 0.0);
    CHECK((Eigen::MatrixXd(B.matrix) -
           Eigen::MatrixXd(B.matrix).transpose()).norm() == 0.0);
}

TEST_CASE("support of B matches the support of A exactly") {
    HeteroGraph g = two_type_graph();
    const WeightedAdjacency B =
        meta_weighted_adjacency(g, relation_matrix(g, MetaWeightConfig{1.0, 1.0}));
    const Eigen::MatrixXd Ad = Eigen::MatrixXd(g.adjacency());
    const Eigen::MatrixXd Bd = Eigen::MatrixXd(B.matrix);
    for (Index i = 0; i < g.num_nodes(); ++i)
        for (Index j = 0; j < g.num_nodes(); ++j)
            CHECK((Ad(i, j) != 0.0) == (Bd(i, j) != 0.0));
}

TEST_CASE("a declared relation with zero edges is rejected") {
    // the regulation term divides by the pair's edge count
    std::vector<NodeType> types{{0, "a", 2, 0}, {1, "b", 2, 0}};
    std::vector<Relation> rels{{0, "ab", 0, 1, 0}, {1, "aa", 0, 0, 0}};
    std::vector<Edge> edges{{0, {0, 0}, {1, 0}}};
    HeteroGraph g(types, rels, edges);
    CHECK_THROWS(relation_matrix(g, MetaWeightConfig{0.0, 1.0}));
    CHECK_THROWS(relation_matrix(g, MetaWeightConfig{0.5, 0.0}));
}

TEST_CASE("negative weights are rejected; a second same-pair relation is too") {
    HeteroGraph g = two_type_graph();
    CHECK_THROWS(relation_matrix(g, MetaWeightConfig{-0.1, 0.0}));
    CHECK_THROWS(relation_matrix(g, MetaWeightConfig{0.0, -1.0}));
    // the graph model keeps type pairs unique across relations
    std::vector<NodeType> types{{0, "a", 4, 0}};
    std::vector<Relation> rels{{0, "r1", 0, 0, 0}, {1, "r2", 0, 0, 0}};
    std::vector<Edge> edges{{0, {0, 0}, {0, 1}}, {1, {0, 2}, {0, 3}}};
    CHECK_THROWS_AS(HeteroGraph(types, rels, edges), GraphError);
}
