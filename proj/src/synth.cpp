#include "htad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace htad {

void SynthSpec::validate() const {
    if (type_counts.empty()) throw std::invalid_argument("no node types");
    if (num_classes < 2) throw std::invalid_argument("need at least 2 classes");
    for (Index c : type_counts)
        if (c < num_classes)
            throw std::invalid_argument("every type needs count >= num_classes");
    if (!(homophily >= 0.0 && homophily <= 1.0))
        throw std::invalid_argument("homophily must lie in [0, 1]");
    if (!(label_rate > 0.0 && label_rate <= 1.0))
        throw std::invalid_argument("label_rate must lie in (0, 1]");
    if (feature_dim < 1) throw std::invalid_argument("feature_dim must be >= 1");
    if (target_type < 0 || target_type >= static_cast<int>(type_counts.size()))
        throw std::invalid_argument("target_type out of range");
    for (const SynthRelationSpec& r : relations) {
        if (r.src_type < 0 || r.src_type >= static_cast<int>(type_counts.size()) ||
            r.dst_type < 0 || r.dst_type >= static_cast<int>(type_counts.size()))
            throw std::invalid_argument("relation type out of range");
        const Index ns = type_counts[r.src_type];
        const Index nd = type_counts[r.dst_type];
        const Index cap =
            r.src_type == r.dst_type ? ns * (ns - 1) / 2 : ns * nd;
        if (r.edge_count < 1 || r.edge_count > cap)
            throw std::invalid_argument("infeasible edge count for relation block");
    }
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    Rng root(spec.seed);
    const Index C = spec.num_classes;
    const int T = static_cast<int>(spec.type_counts.size());

    // latent classes: each class guaranteed non-empty per type
    Rng class_rng = root.substream("classes");
    std::vector<std::vector<Index>> classes(T);
    std::vector<std::vector<std::vector<Index>>> by_class(T);
    for (int t = 0; t < T; ++t) {
        classes[t].resize(spec.type_counts[t]);
        by_class[t].resize(C);
        for (Index i = 0; i < spec.type_counts[t]; ++i) {
            const Index c = i < C ? i : static_cast<Index>(class_rng.next_below(C));
            classes[t][i] = c;
            by_class[t][c].push_back(i);
        }
    }

    // types and relations
    std::vector<NodeType> types;
    for (int t = 0; t < T; ++t)
        types.push_back(NodeType{t, "type" + std::to_string(t),
                                 spec.type_counts[t], spec.feature_dim});
    std::vector<Relation> relations;
    for (std::size_t r = 0; r < spec.relations.size(); ++r)
        relations.push_back(Relation{static_cast<int>(r),
                                     "rel" + std::to_string(r),
                                     spec.relations[r].src_type,
                                     spec.relations[r].dst_type, 0});

    // edges drawn per relation with probability mass `homophily` on
    // same-class pairs
    Rng edge_rng = root.substream("edges");
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < spec.relations.size(); ++r) {
        const SynthRelationSpec& rel = spec.relations[r];
        const Index ns = spec.type_counts[rel.src_type];
        const Index nd = spec.type_counts[rel.dst_type];
        std::set<std::pair<Index, Index>> chosen;
        const Index max_attempts = 500 * rel.edge_count + 10000;
        Index attempts = 0;
        while (static_cast<Index>(chosen.size()) < rel.edge_count) {
            if (++attempts > max_attempts)
                throw std::runtime_error(
                    "could not realize requested edge count for relation " +
                    std::to_string(r));
            Index u, v;
            if (edge_rng.next_double() < spec.homophily) {
                const Index c = static_cast<Index>(edge_rng.next_below(C));
                const auto& su = by_class[rel.src_type][c];
                const auto& sv = by_class[rel.dst_type][c];
                if (su.empty() || sv.empty()) continue;
                u = su[edge_rng.next_below(su.size())];
                v = sv[edge_rng.next_below(sv.size())];
            } else {
                u = static_cast<Index>(edge_rng.next_below(ns));
                v = static_cast<Index>(edge_rng.next_below(nd));
                if (classes[rel.src_type][u] == classes[rel.dst_type][v]) continue;
            }
            if (rel.src_type == rel.dst_type) {
                if (u == v) continue;
                if (u > v) std::swap(u, v);
            }
            if (!chosen.insert({u, v}).second) continue;
            edges.push_back(Edge{static_cast<int>(r),
                                 NodeRef{rel.src_type, u},
                                 NodeRef{rel.dst_type, v}});
        }
    }

    // features: class centroid plus isotropic noise
    Rng feat_rng = root.substream("features");
    std::map<int, Eigen::MatrixXd> features;
    {
        Eigen::MatrixXd centroids(C, spec.feature_dim);
        for (Index c = 0; c < C; ++c)
            for (Index j = 0; j < spec.feature_dim; ++j)
                centroids(c, j) = feat_rng.next_gaussian();
        for (int t = 0; t < T; ++t) {
            Eigen::MatrixXd X(spec.type_counts[t], spec.feature_dim);
            for (Index i = 0; i < spec.type_counts[t]; ++i)
                for (Index j = 0; j < spec.feature_dim; ++j)
                    X(i, j) = centroids(classes[t][i], j) +
                              spec.feature_noise * feat_rng.next_gaussian();
            features[t] = std::move(X);
        }
    }

    HeteroGraph graph(std::move(types), std::move(relations), std::move(edges),
                      std::move(features));

    // ground-truth labels over all target nodes
    const Index nt = spec.type_counts[spec.target_type];
    const Index offset = graph.type_offset(spec.target_type);
    LabelAssignment full;
    full.target_type = spec.target_type;
    full.num_classes = C;
    full.labels = Eigen::MatrixXd::Zero(nt, C);
    full.labeled_mask = Eigen::VectorXd::Zero(graph.num_nodes());
    for (Index i = 0; i < nt; ++i) {
        full.labels(i, classes[spec.target_type][i]) = 1.0;
        full.labeled_mask[offset + i] = 1.0;
    }

    // revealed training labels; the skew flag concentrates them on
    // low-class-id nodes to manufacture measurable topological bias
    Rng label_rng = root.substream("labels");
    const Index keep = static_cast<Index>(
        std::ceil(spec.label_rate * static_cast<double>(nt)));
    std::vector<Index> order(nt);
    std::iota(order.begin(), order.end(), 0);
    if (spec.skew_labels) {
        std::vector<double> key(nt);
        for (Index i = 0; i < nt; ++i) {
            const double w = std::exp(-spec.skew_strength *
                                      static_cast<double>(classes[spec.target_type][i]));
            double u;
            do {
                u = label_rng.next_double();
            } while (u <= 0.0);
            key[i] = -std::log(u) / w; // weighted sampling without replacement
        }
        std::sort(order.begin(), order.end(),
                  [&](Index a, Index b) { return key[a] < key[b]; });
    } else {
        label_rng.shuffle(order);
    }
    order.resize(keep);

    LabelAssignment train;
    train.target_type = spec.target_type;
    train.num_classes = C;
    train.labels = Eigen::MatrixXd::Zero(nt, C);
    train.labeled_mask = Eigen::VectorXd::Zero(graph.num_nodes());
    for (Index i : order) {
        train.labels.row(i) = full.labels.row(i);
        train.labeled_mask[offset + i] = 1.0;
    }

    return SynthResult{std::move(graph), std::move(train), std::move(full),
                       std::move(classes)};
}

} // namespace htad
