#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htad/losses.hpp"
#include "htad/rng.hpp"
#include "htad/stats.hpp"

using namespace htad;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.next_gaussian();
    return m;
}

HeteroGraph two_type_graph(Index na, Index nb) {
    std::vector<NodeType> types{{0, "a", na, 0}, {1, "b", nb, 0}};
    std::vector<Relation> rels{{0, "ab", 0, 1, 0}};
    std::vector<Edge> edges{{0, {0, 0}, {1, 0}}};
    return HeteroGraph(types, rels, edges);
}

// naive double-loop oracle of the per-type cross-view contrast
double general_oracle(const EmbeddingViews& views, const HeteroGraph& graph,
                      const LossConfig& config) {
    double total = 0.0;
    for (const NodeType& t : graph.types()) {
        const Index off = graph.type_offset(t.id);
        for (Index i = 0; i < t.count; ++i) {
            double denom = 0.0;
            for (Index j = 0; j < t.count; ++j) {
                if (!config.include_positive_in_denominator && j == i) continue;
                denom += std::exp(similarity(views.local.row(off + i),
                                             views.augmented.row(off + j),
                                             config.tau));
            }
            total += std::log(denom) -
                     similarity(views.local.row(off + i),
                                views.augmented.row(off + i), config.tau);
        }
    }
    return total / static_cast<double>(graph.num_nodes());
}

// naive oracle of the supervised target contrast
double target_oracle(const EmbeddingViews& views, const HeteroGraph& graph,
                     const LabelAssignment& labels, const LossConfig& config) {
    const Index off = graph.type_offset(labels.target_type);
    std::vector<Index> cand;
    for (Index i = 0; i < labels.labels.rows(); ++i)
        if (labels.labeled_mask[off + i] != 0.0) cand.push_back(i);

    double total = 0.0;
    Index na = 0;
    for (Index a : cand) {
        double pos = 0.0, neg = 0.0;
        bool has_neg = false;
        for (Index c : cand) {
            const bool same =
                (labels.labels.row(a).array() == labels.labels.row(c).array())
                    .all();
            const double e = std::exp(similarity(views.local.row(off + a),
                                                 views.augmented.row(off + c),
                                                 config.tau));
            (same ? pos : neg) += e;
            if (!same) has_neg = true;
        }
        if (!has_neg) continue;
        total += std::log(neg) - std::log(pos);
        ++na;
    }
    return total / static_cast<double>(na);
}

} // namespace

TEST_CASE("similarity is cosine over tau") {
    Eigen::VectorXd h(2), g(2);
    h << 3, 0;
    g << 4, 4;
    CHECK(similarity(h, g, 1.0) ==
          doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(similarity(h, g, 0.5) ==
          doctest::Approx(2.0 * std::sqrt(0.5)).epsilon(1e-14));
    CHECK_THROWS(similarity(Eigen::VectorXd::Zero(2), g, 1.0));
}

TEST_CASE("general contrastive loss matches the double-loop oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 5; ++trial) {
        HeteroGraph g = two_type_graph(6 + trial, 4 + trial);
        EmbeddingViews views{random_matrix(g.num_nodes(), 5, rng),
                             random_matrix(g.num_nodes(), 5, rng)};
        LossConfig config;
        config.tau = trial % 2 ? 0.7 : 1.3;
        config.include_positive_in_denominator = trial % 2 == 0;
        CHECK(general_contrastive_loss(views, g, config) ==
              doctest::Approx(general_oracle(views, g, config)).epsilon(1e-12));
    }
}

TEST_CASE("identical views with tight clusters give a small general loss") {
    // identical H and H_hat: the positive diagonal dominates as tau shrinks
    Rng rng(22);
    HeteroGraph g = two_type_graph(8, 8);
    const Eigen::MatrixXd H = random_matrix(g.num_nodes(), 6, rng);
    LossConfig sharp, blunt;
    sharp.tau = 0.05;
    sharp.include_positive_in_denominator = true;
    blunt.tau = 10.0;
    blunt.include_positive_in_denominator = true;
    const double low = general_contrastive_loss({H, H}, g, sharp);
    const double high = general_contrastive_loss({H, H}, g, blunt);
    CHECK(low < high);
}

TEST_CASE("two-node single-type general loss, hand evaluation") {
    // one type with 2 nodes needs an intra-type relation to be a valid graph
    std::vector<NodeType> types{{0, "a", 2, 0}};
    std::vector<Relation> rels{{0, "aa", 0, 0, 0}};
    HeteroGraph g(types, rels, {Edge{0, {0, 0}, {0, 1}}});
    Eigen::MatrixXd H(2, 2), G(2, 2);
    H << 1, 0, 0, 1;
    G << 1, 0, 1, 0; // ĥ_0 = h_0, ĥ_1 ⟂ h_1
    LossConfig config; // tau = 1, positive excluded from the denominator
    // s(h_0, ĥ_0) = 1, s(h_0, ĥ_1) = 1, s(h_1, ĥ_0) = 0, s(h_1, ĥ_1) = 0
    // node 0: log e^1 - 1 = 0 ; node 1: log e^0 - 0 = 0
    CHECK(general_contrastive_loss({H, G}, g, config) ==
          doctest::Approx(0.0).epsilon(1e-14));
    config.include_positive_in_denominator = true;
    // node 0: log(e + e) - 1 = log 2 ; node 1: log 2 - 0
    CHECK(general_contrastive_loss({H, G}, g, config) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("general loss rejects single-node types") {
    HeteroGraph g = two_type_graph(3, 1);
    Rng rng(23);
    EmbeddingViews views{random_matrix(4, 3, rng), random_matrix(4, 3, rng)};
    CHECK_THROWS(general_contrastive_loss(views, g, LossConfig{}));
}

TEST_CASE("target contrastive loss matches the oracle, anchors skipped") {
    Rng rng(24);
    HeteroGraph g = two_type_graph(10, 4);
    LabelAssignment labels;
    labels.target_type = 0;
    labels.num_classes = 3;
    labels.labels = Eigen::MatrixXd::Zero(10, 3);
    labels.labeled_mask = Eigen::VectorXd::Zero(g.num_nodes());
    // 6 labeled: classes 0,0,1,1,2,0 over nodes 0..5
    const int cls[6] = {0, 0, 1, 1, 2, 0};
    for (Index i = 0; i < 6; ++i) {
        labels.labels(i, cls[i]) = 1.0;
        labels.labeled_mask[i] = 1.0;
    }
    EmbeddingViews views{random_matrix(g.num_nodes(), 4, rng),
                         random_matrix(g.num_nodes(), 4, rng)};
    LossConfig config;
    config.tau = 0.8;
    CHECK(target_contrastive_loss(views, g, labels, config) ==
          doctest::Approx(target_oracle(views, g, labels, config))
              .epsilon(1e-12));
}

TEST_CASE("target loss errors when every label agrees") {
    Rng rng(25);
    HeteroGraph g = two_type_graph(5, 2);
    LabelAssignment labels;
    labels.target_type = 0;
    labels.num_classes = 2;
    labels.labels = Eigen::MatrixXd::Zero(5, 2);
    labels.labeled_mask = Eigen::VectorXd::Zero(g.num_nodes());
    for (Index i = 0; i < 4; ++i) {
        labels.labels(i, 0) = 1.0;
        labels.labeled_mask[i] = 1.0;
    }
    EmbeddingViews views{random_matrix(7, 3, rng), random_matrix(7, 3, rng)};
    CHECK_THROWS(target_contrastive_loss(views, g, labels, LossConfig{}));
}

TEST_CASE("label loss, hand-worked single and multi label") {
    Eigen::MatrixXd P(2, 2), Y(2, 2);
    P << 0.8, 0.2, 0.3, 0.7;
    Y << 1, 0, 0, 1;
    // single-label: -log 0.8 - log 0.7
    CHECK(label_loss(P, Y, false) ==
          doctest::Approx(-std::log(0.8) - std::log(0.7)).epsilon(1e-14));
    // multi-label adds -log(1-0.2) - log(1-0.3)
    CHECK(label_loss(P, Y, true) ==
          doctest::Approx(-2.0 * std::log(0.8) - 2.0 * std::log(0.7))
              .epsilon(1e-14));
    // out-of-range probabilities are clamped, not fatal
    Eigen::MatrixXd bad(1, 2);
    bad << 0.0, 1.0;
    Eigen::MatrixXd y1(1, 2);
    y1 << 1, 0;
    CHECK(std::isfinite(label_loss(bad, y1, false)));
}

TEST_CASE("overall loss combines with the lambda weights") {
    LossConfig config;
    config.lambda1 = 0.3;
    config.lambda2 = 0.15;
    CHECK(overall_loss(2.0, 1.0, 4.0, config) ==
          doctest::Approx(2.0 + 0.3 + 0.6).epsilon(1e-15));
    CHECK_THROWS(overall_loss(std::nan(""), 0.0, 0.0, config));
}

TEST_CASE("contrastive tape gradients pass the central-difference check") {
    Rng rng(26);
    HeteroGraph g = two_type_graph(5, 4);
    LabelAssignment labels;
    labels.target_type = 0;
    labels.num_classes = 2;
    labels.labels = Eigen::MatrixXd::Zero(5, 2);
    labels.labeled_mask = Eigen::VectorXd::Zero(g.num_nodes());
    const int cls[4] = {0, 1, 0, 1};
    for (Index i = 0; i < 4; ++i) {
        labels.labels(i, cls[i]) = 1.0;
        labels.labeled_mask[i] = 1.0;
    }
    LossConfig config;
    config.tau = 0.9;

    GradCheckProblem problem;
    problem.params = {random_matrix(g.num_nodes(), 4, rng),
                      random_matrix(g.num_nodes(), 4, rng)};
    problem.evaluate = [&](const std::vector<Eigen::MatrixXd>& params,
                           std::vector<Eigen::MatrixXd>* grads) {
        ad::Tape tape;
        ad::Var H = tape.param(params[0]);
        ad::Var G = tape.param(params[1]);
        ad::Var l1 = general_contrastive_loss_node(tape, H, G, g, config);
        ad::Var l2 =
            target_contrastive_loss_node(tape, H, G, g, labels, config);
        ad::Var total = tape.add(l1, tape.scale(l2, 0.5));
        if (grads) {
            tape.backward(total);
            *grads = {tape.grad(H), tape.grad(G)};
        }
        return tape.value(total)(0, 0);
    };
    CHECK(grad_check(problem, 1e-5, 10, 31) < 1e-4);
}

TEST_CASE("loss pair-op counter is quadratic per type") {
    Rng rng(27);
    HeteroGraph g = two_type_graph(6, 5);
    EmbeddingViews views{random_matrix(11, 3, rng), random_matrix(11, 3, rng)};
    const std::uint64_t before = stats::counters().loss_pair_ops;
    general_contrastive_loss(views, g, LossConfig{});
    CHECK(stats::counters().loss_pair_ops - before == 36 + 25);
}
