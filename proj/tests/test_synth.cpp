#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htad/synth.hpp"

using namespace htad;

namespace {

SynthSpec base_spec() {
    SynthSpec spec;
    spec.type_counts = {60, 40};
    spec.relations = {{0, 1, 120}, {0, 0, 80}};
    spec.num_classes = 3;
    spec.homophily = 0.8;
    spec.feature_dim = 8;
    spec.label_rate = 0.25;
    spec.seed = 13;
    return spec;
}

} // namespace

TEST_CASE("generated graph honors the requested shape exactly") {
    const SynthSpec spec = base_spec();
    const SynthResult r = generate(spec);
    CHECK(r.graph.num_nodes() == 100);
    REQUIRE(r.graph.relations().size() == 2);
    CHECK(r.graph.relations()[0].edge_count == 120);
    CHECK(r.graph.relations()[1].edge_count == 80);
    CHECK(r.graph.edges().size() == 200);
    for (const NodeType& t : r.graph.types()) {
        CHECK(t.feature_dim == 8);
        CHECK(r.graph.features(t.id).rows() == t.count);
        CHECK(r.graph.features(t.id).cols() == 8);
    }
}

TEST_CASE("labels: full covers the target type, train is ceil(rate * n)") {
    const SynthSpec spec = base_spec();
    const SynthResult r = generate(spec);
    CHECK(r.full_labels.num_labeled() == 60);
    CHECK(r.train_labels.num_labeled() == 15); // ceil(0.25 * 60)
    // every revealed label agrees with the ground truth
    for (Index i = 0; i < 60; ++i) {
        if (r.train_labels.labeled_mask[i] != 0.0)
            CHECK((r.train_labels.labels.row(i) - r.full_labels.labels.row(i))
                      .norm() == 0.0);
        CHECK(r.full_labels.labels.row(i).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("latent classes drive edge homophily") {
    SynthSpec spec = base_spec();
    spec.homophily = 1.0;
    const SynthResult r = generate(spec);
    for (const Edge& e : r.graph.edges()) {
        CHECK(r.classes[e.src.type_id][e.src.local_index] ==
              r.classes[e.dst.type_id][e.dst.local_index]);
    }

    spec.homophily = 0.0;
    const SynthResult r0 = generate(spec);
    for (const Edge& e : r0.graph.edges()) {
        CHECK(r0.classes[e.src.type_id][e.src.local_index] !=
              r0.classes[e.dst.type_id][e.dst.local_index]);
    }
}

TEST_CASE("same seed reproduces the dataset, other seeds differ") {
    const SynthSpec spec = base_spec();
    const SynthResult a = generate(spec);
    const SynthResult b = generate(spec);
    REQUIRE(a.graph.edges().size() == b.graph.edges().size());
    for (std::size_t i = 0; i < a.graph.edges().size(); ++i) {
        CHECK(a.graph.edges()[i].src == b.graph.edges()[i].src);
        CHECK(a.graph.edges()[i].dst == b.graph.edges()[i].dst);
    }
    CHECK((a.graph.features(0) - b.graph.features(0)).norm() == 0.0);
    CHECK((a.train_labels.labeled_mask - b.train_labels.labeled_mask).norm() ==
          0.0);

    SynthSpec other = spec;
    other.seed = 14;
    const SynthResult c = generate(other);
    bool any_diff = (a.graph.features(0) - c.graph.features(0)).norm() != 0.0;
    CHECK(any_diff);
}

TEST_CASE("skewed labels concentrate on low class ids") {
    SynthSpec spec = base_spec();
    spec.type_counts = {300, 50};
    spec.relations = {{0, 1, 200}};
    spec.label_rate = 0.1;
    spec.skew_labels = true;
    spec.skew_strength = 3.0;
    const SynthResult r = generate(spec);

    Index low = 0, high = 0;
    for (Index i = 0; i < 300; ++i) {
        if (r.train_labels.labeled_mask[i] == 0.0) continue;
        if (r.classes[0][i] == 0) ++low;
        else ++high;
    }
    // with strength 3 the class-0 weight is e^3 ~ 20x the class-1 weight
    CHECK(low > high);
}

TEST_CASE("feature noise scales the within-class spread") {
    SynthSpec tight = base_spec();
    tight.feature_noise = 0.01;
    SynthSpec loose = base_spec();
    loose.feature_noise = 5.0;

    auto spread = [](const SynthResult& r) {
        // mean distance of class-0 target nodes from their centroid
        Eigen::MatrixXd X = r.graph.features(0);
        std::vector<Index> members;
        for (Index i = 0; i < X.rows(); ++i)
            if (r.classes[0][i] == 0) members.push_back(i);
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(X.cols());
        for (Index i : members) mean += X.row(i);
        mean /= static_cast<double>(members.size());
        double s = 0.0;
        for (Index i : members) s += (X.row(i) - mean).norm();
        return s / static_cast<double>(members.size());
    };
    CHECK(spread(generate(tight)) < spread(generate(loose)));
}

TEST_CASE("spec validation rejects impossible requests") {
    SynthSpec bad = base_spec();
    bad.type_counts = {2, 40}; // fewer nodes than classes
    CHECK_THROWS(generate(bad));

    bad = base_spec();
    bad.relations = {{0, 0, 10000}}; // beyond the intra-type pair capacity
    CHECK_THROWS(bad.validate());

    bad = base_spec();
    bad.homophily = 1.2;
    CHECK_THROWS(bad.validate());

    bad = base_spec();
    bad.relations = {{0, 5, 10}};
    CHECK_THROWS(bad.validate());

    CHECK_NOTHROW(base_spec().validate());
}
