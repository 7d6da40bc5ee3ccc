#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "htad/encoder.hpp"
#include "htad/synth.hpp"

using namespace htad;

namespace {

HeteroGraph small_graph() {
    std::vector<NodeType> types{{0, "a", 4, 0}, {1, "b", 3, 0}};
    std::vector<Relation> rels{{0, "ab", 0, 1, 0}, {1, "aa", 0, 0, 0}};
    std::vector<Edge> edges{{0, {0, 0}, {1, 0}}, {0, {0, 1}, {1, 1}},
                            {0, {0, 2}, {1, 2}}, {0, {0, 3}, {1, 0}},
                            {1, {0, 0}, {0, 1}}, {1, {0, 2}, {0, 3}}};
    return HeteroGraph(types, rels, edges);
}

LabelAssignment small_labels(const HeteroGraph& g) {
    LabelAssignment labels;
    labels.target_type = 0;
    labels.num_classes = 2;
    labels.labels = Eigen::MatrixXd::Zero(4, 2);
    labels.labeled_mask = Eigen::VectorXd::Zero(g.num_nodes());
    const int cls[4] = {0, 0, 1, 1};
    for (Index i = 0; i < 4; ++i) {
        labels.labels(i, cls[i]) = 1.0;
        labels.labeled_mask[i] = 1.0;
    }
    return labels;
}

HlidScores uniform_scores(const HeteroGraph& g) {
    HlidScores scores;
    scores.z = Eigen::VectorXd(g.num_nodes());
    for (Index i = 0; i < g.num_nodes(); ++i)
        scores.z[i] = 0.05 * static_cast<double>(i);
    return scores;
}

// dense reimplementation of the message-passing forward for the oracle
Eigen::MatrixXd forward_oracle(const HeteroGraph& g, const EncoderParams& p) {
    const Index n = g.num_nodes();
    const Eigen::Index h = p.input_proj[0].cols();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, h);
    for (const NodeType& t : g.types()) {
        const Eigen::MatrixXd proj = g.features(t.id) * p.input_proj[t.id];
        X.block(g.type_offset(t.id), 0, t.count, h) = proj;
    }
    for (int l = 0; l < p.layers; ++l) {
        Eigen::MatrixXd agg = X * p.self_weight[l];
        for (int r = 0; r < p.num_relations; ++r) {
            Eigen::MatrixXd A = Eigen::MatrixXd(g.relation_adjacency(r));
            Eigen::VectorXd deg = A.rowwise().sum();
            for (Index i = 0; i < n; ++i)
                deg[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
            const Eigen::MatrixXd An =
                deg.asDiagonal() * A * deg.asDiagonal();
            agg += An * X * p.relation_weight[l * p.num_relations + r];
        }
        X = agg.cwiseMax(0.0);
    }
    // graph norm: per-dimension standardization over rows
    Eigen::MatrixXd Y(n, h);
    for (Eigen::Index c = 0; c < h; ++c) {
        const double mean = X.col(c).mean();
        const double var =
            (X.col(c).array() - mean).square().sum() / static_cast<double>(n);
        Y.col(c) = p.norm_scale(0, c) * (X.col(c).array() - mean) /
                       std::sqrt(var + 1e-5) +
                   p.norm_shift(0, c);
    }
    return Y;
}

} // namespace

TEST_CASE("forward matches the dense oracle") {
    HeteroGraph g = small_graph();
    EncoderConfig config;
    config.hidden_dim = 5;
    config.seed = 3;
    for (int layers : {1, 2}) {
        config.layers = layers;
        EncoderParams p = init_params(g, config, 2);
        // break the symmetric norm params so the oracle exercises them
        p.norm_scale.setConstant(1.3);
        p.norm_shift.setConstant(-0.2);
        const Eigen::MatrixXd got =
            forward(g, normalized_relation_adjacency(g), p);
        const Eigen::MatrixXd want = forward_oracle(g, p);
        CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("augmented adjacency with the full edge set equals the original") {
    HeteroGraph g = small_graph();
    AugmentedEdgeSet set;
    for (const Edge& e : g.edges())
        set.edges.push_back(AugmentedEdge{e.relation_id, e.src, e.dst,
                                          Provenance::Original});
    const auto orig = normalized_relation_adjacency(g);
    const auto aug = normalized_relation_adjacency(g, set);
    REQUIRE(orig.size() == aug.size());
    for (std::size_t r = 0; r < orig.size(); ++r)
        CHECK((Eigen::MatrixXd(orig[r]) - Eigen::MatrixXd(aug[r]))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

TEST_CASE("init is deterministic in the seed and layout is stable") {
    HeteroGraph g = small_graph();
    EncoderConfig config;
    config.seed = 11;
    EncoderParams a = init_params(g, config, 3);
    EncoderParams b = init_params(g, config, 3);
    const auto fa = a.flat();
    const auto fb = b.flat();
    REQUIRE(fa.size() == fb.size());
    REQUIRE(fa.size() == 2 + 2 + 4 + 4); // proj, self, relation, head
    for (std::size_t i = 0; i < fa.size(); ++i)
        CHECK((*fa[i] - *fb[i]).norm() == 0.0);
    config.seed = 12;
    EncoderParams c = init_params(g, config, 3);
    CHECK((*c.flat()[0] - *fa[0]).norm() != 0.0);
}

TEST_CASE("training is deterministic and lowers the label loss") {
    HeteroGraph g = small_graph();
    LabelAssignment labels = small_labels(g);
    HlidScores scores = uniform_scores(g);
    EncoderConfig enc;
    enc.layers = 1;
    enc.hidden_dim = 8;
    enc.epochs = 40;
    enc.seed = 5;
    AugmentConfig aug;
    aug.seed = 5;
    LossConfig loss;

    const TrainResult a = train(g, labels, scores, enc, aug, loss, TrainMode::Htad);
    const TrainResult b = train(g, labels, scores, enc, aug, loss, TrainMode::Htad);
    REQUIRE(a.history.size() == 40);
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        CHECK(a.history[e].total == b.history[e].total);
        CHECK(a.history[e].augmented_edges == b.history[e].augmented_edges);
    }
    const auto fa = a.params.flat();
    const auto fb = b.params.flat();
    for (std::size_t i = 0; i < fa.size(); ++i)
        CHECK((*fa[i] - *fb[i]).norm() == 0.0);
    CHECK(a.history.back().label_loss < a.history.front().label_loss);
}

TEST_CASE("htad degenerates to supervised training bit for bit") {
    // lambda1 = lambda2 = 0, p0 = 1, k = 0: the augmented view equals the
    // original one and the contrastive terms vanish
    HeteroGraph g = small_graph();
    LabelAssignment labels = small_labels(g);
    HlidScores scores = uniform_scores(g);
    EncoderConfig enc;
    enc.layers = 1;
    enc.hidden_dim = 6;
    enc.epochs = 15;
    enc.seed = 7;
    AugmentConfig aug;
    aug.seed = 7;
    aug.p0 = 1.0;
    aug.neg_multiplier = 0.0;
    LossConfig loss;
    loss.lambda1 = 0.0;
    loss.lambda2 = 0.0;

    const TrainResult sup =
        train(g, labels, scores, enc, aug, loss, TrainMode::Supervised);
    const TrainResult htad =
        train(g, labels, scores, enc, aug, loss, TrainMode::Htad);
    const auto fs = sup.params.flat();
    const auto fh = htad.params.flat();
    double worst = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i)
        worst = std::max(worst, (*fs[i] - *fh[i]).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-8);
    for (std::size_t e = 0; e < sup.history.size(); ++e)
        CHECK(std::abs(sup.history[e].label_loss - htad.history[e].label_loss) <=
              1e-8);
}

TEST_CASE("predict emits one-hot rows; multi-label thresholds per class") {
    HeteroGraph g = small_graph();
    EncoderConfig config;
    config.layers = 1;
    config.hidden_dim = 4;
    config.seed = 2;
    EncoderParams p = init_params(g, config, 3);
    const Eigen::MatrixXd pred = predict(g, p, config, 0);
    REQUIRE(pred.rows() == 4);
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(pred.row(i).sum() == doctest::Approx(1.0));

    config.multi_label = true;
    const Eigen::MatrixXd probs = predict_probabilities(g, p, config, 0);
    const Eigen::MatrixXd mpred = predict(g, p, config, 0);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index c = 0; c < 3; ++c)
            CHECK(mpred(i, c) == (probs(i, c) > config.threshold ? 1.0 : 0.0));
}

TEST_CASE("save/load round trip preserves every matrix exactly") {
    HeteroGraph g = small_graph();
    EncoderConfig config;
    config.seed = 9;
    EncoderParams p = init_params(g, config, 4);
    const std::string path = "encoder_test_model.bin";
    save_params(p, path);
    const EncoderParams q = load_params(path);
    std::remove(path.c_str());
    const auto fp = p.flat();
    const auto fq = q.flat();
    REQUIRE(fp.size() == fq.size());
    for (std::size_t i = 0; i < fp.size(); ++i) {
        REQUIRE(fp[i]->rows() == fq[i]->rows());
        REQUIRE(fp[i]->cols() == fq[i]->cols());
        CHECK((*fp[i] - *fq[i]).norm() == 0.0);
    }
    CHECK(q.layers == p.layers);
    CHECK(q.num_relations == p.num_relations);
    CHECK_THROWS(load_params("does_not_exist.bin"));
}

TEST_CASE("evaluate fills buckets, f1 and variance consistently") {
    HeteroGraph g = small_graph();
    LabelAssignment labels = small_labels(g);
    EncoderConfig config;
    config.layers = 1;
    config.hidden_dim = 4;
    config.seed = 1;
    EncoderParams p = init_params(g, config, 2);
    Eigen::VectorXd projection(g.num_nodes());
    for (Index i = 0; i < g.num_nodes(); ++i) projection[i] = double(i);
    const Evaluation ev = evaluate(g, labels, p, config, projection, 2);
    CHECK(ev.accuracy.size() == 4);
    CHECK(ev.buckets.num_buckets == 2);
    CHECK(ev.test_locals.size() == 4);
    CHECK(ev.f1.micro >= 0.0);
    CHECK(ev.f1.micro <= 1.0);
    CHECK(ev.total_var >= 0.0);
    CHECK(ev.bucket_var >= 0.0);
}

TEST_CASE("config validation rejects bad shapes") {
    EncoderConfig bad;
    bad.layers = 3;
    CHECK_THROWS(bad.validate());
    bad = EncoderConfig{};
    bad.hidden_dim = 0;
    CHECK_THROWS(bad.validate());
    bad = EncoderConfig{};
    bad.learning_rate = 0.0;
    CHECK_THROWS(bad.validate());
    CHECK_NOTHROW(EncoderConfig{}.validate());
}

TEST_CASE("end-to-end gradient through the encoder passes grad_check") {
    HeteroGraph g = small_graph();
    LabelAssignment labels = small_labels(g);
    EncoderConfig enc;
    enc.layers = 1;
    enc.hidden_dim = 4;
    enc.seed = 13;
    LossConfig loss;
    const auto rel_adj = normalized_relation_adjacency(g);
    EncoderParams shapes = init_params(g, enc, labels.num_classes);

    const Index offset = g.type_offset(0);
    std::vector<Eigen::Index> rows;
    for (Index i = 0; i < 4; ++i) rows.push_back(offset + i);
    Eigen::MatrixXd Yl = labels.labels;

    GradCheckProblem problem;
    for (const Eigen::MatrixXd* m : shapes.flat()) problem.params.push_back(*m);
    problem.evaluate = [&](const std::vector<Eigen::MatrixXd>& params,
                           std::vector<Eigen::MatrixXd>* grads) {
        ad::Tape tape;
        std::vector<ad::Var> vars;
        for (const Eigen::MatrixXd& p : params) vars.push_back(tape.param(p));
        const ad::Var H = forward_node(tape, g, rel_adj, vars, shapes);
        const ad::Var feats = tape.hconcat(tape.select_rows(H, rows),
                                           tape.select_rows(H, rows));
        // classifier weight/bias are the last two vars in flat order
        const ad::Var logits = tape.add(
            tape.matmul(feats, vars[vars.size() - 2]),
            tape.matmul(tape.constant(Eigen::MatrixXd::Ones(4, 1)),
                        vars[vars.size() - 1]));
        ad::Var total = tape.softmax_cross_entropy(logits, Yl);
        total = tape.add(
            total,
            tape.scale(general_contrastive_loss_node(tape, H, H, g, loss),
                       loss.lambda1));
        total = tape.add(total,
                         tape.scale(target_contrastive_loss_node(
                                        tape, H, H, g, labels, loss),
                                    loss.lambda2));
        if (grads) {
            tape.backward(total);
            grads->clear();
            for (const ad::Var v : vars) grads->push_back(tape.grad(v));
        }
        return tape.value(total)(0, 0);
    };
    CHECK(grad_check(problem, 1e-5, 6, 17) < 1e-4);
}
