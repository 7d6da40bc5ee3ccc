#include "htad/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace htad {

void EncoderConfig::validate() const {
    if (layers != 1 && layers != 2)
        throw std::invalid_argument("layers must be 1 or 2");
    if (hidden_dim < 1) throw std::invalid_argument("hidden_dim must be positive");
    if (epochs < 1) throw std::invalid_argument("epochs must be positive");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("learning_rate must be positive");
    if (!(weight_decay >= 0.0))
        throw std::invalid_argument("weight_decay must be non-negative");
}

std::vector<Eigen::MatrixXd*> EncoderParams::flat() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& m : input_proj) out.push_back(&m);
    for (auto& m : self_weight) out.push_back(&m);
    for (auto& m : relation_weight) out.push_back(&m);
    out.push_back(&norm_scale);
    out.push_back(&norm_shift);
    out.push_back(&classifier_weight);
    out.push_back(&classifier_bias);
    return out;
}

std::vector<const Eigen::MatrixXd*> EncoderParams::flat() const {
    auto mut = const_cast<EncoderParams*>(this)->flat();
    return {mut.begin(), mut.end()};
}

EncoderParams init_params(const HeteroGraph& graph, const EncoderConfig& config,
                          Index num_classes) {
    config.validate();
    Rng rng = Rng(config.seed).substream("param_init");
    auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
        const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = s * (2.0 * rng.next_double() - 1.0);
        return m;
    };

    EncoderParams p;
    p.layers = config.layers;
    p.num_relations = static_cast<int>(graph.relations().size());
    const int h = config.hidden_dim;
    for (const NodeType& t : graph.types()) {
        const Index d = t.feature_dim > 0 ? t.feature_dim : t.count;
        p.input_proj.push_back(glorot(d, h));
    }
    for (int l = 0; l < config.layers; ++l) {
        p.self_weight.push_back(glorot(h, h));
        for (int r = 0; r < p.num_relations; ++r)
            p.relation_weight.push_back(glorot(h, h));
    }
    p.norm_scale = Eigen::MatrixXd::Ones(1, h);
    p.norm_shift = Eigen::MatrixXd::Zero(1, h);
    p.classifier_weight = glorot(2 * h, num_classes);
    p.classifier_bias = Eigen::MatrixXd::Zero(1, num_classes);
    return p;
}

namespace {

SparseMatrix normalize_sym(const SparseMatrix& A) {
    const Eigen::VectorXd deg = A * Eigen::VectorXd::Ones(A.cols());
    Eigen::VectorXd inv_sqrt(deg.size());
    for (Eigen::Index i = 0; i < deg.size(); ++i)
        inv_sqrt[i] = deg[i] > 0.0 ? 1.0 / std::sqrt(deg[i]) : 0.0;
    return inv_sqrt.asDiagonal() * A * inv_sqrt.asDiagonal();
}

} // namespace

std::vector<SparseMatrix> normalized_relation_adjacency(const HeteroGraph& graph) {
    std::vector<SparseMatrix> out;
    for (const Relation& rel : graph.relations())
        out.push_back(normalize_sym(graph.relation_adjacency(rel.id)));
    return out;
}

std::vector<SparseMatrix> normalized_relation_adjacency(
    const HeteroGraph& graph, const AugmentedEdgeSet& edges) {
    const Index n = graph.num_nodes();
    std::vector<std::vector<Eigen::Triplet<double>>> trip(graph.relations().size());
    for (const AugmentedEdge& e : edges.edges) {
        const Index u = graph.global_index(e.u);
        const Index v = graph.global_index(e.v);
        trip[e.relation_id].emplace_back(u, v, 1.0);
        trip[e.relation_id].emplace_back(v, u, 1.0);
    }
    std::vector<SparseMatrix> out;
    for (std::size_t r = 0; r < trip.size(); ++r) {
        SparseMatrix A(n, n);
        A.setFromTriplets(trip[r].begin(), trip[r].end());
        out.push_back(normalize_sym(A));
    }
    return out;
}

namespace {

struct VarLayout {
    int num_types = 0;
    int layers = 0;
    int num_relations = 0;

    int input_proj(int t) const { return t; }
    int self_weight(int l) const { return num_types + l; }
    int relation_weight(int l, int r) const {
        return num_types + layers + l * num_relations + r;
    }
    int norm_scale() const { return num_types + layers * (1 + num_relations); }
    int norm_shift() const { return norm_scale() + 1; }
    int classifier_weight() const { return norm_shift() + 1; }
    int classifier_bias() const { return classifier_weight() + 1; }
};

VarLayout layout_of(const HeteroGraph& graph, const EncoderParams& shapes) {
    return VarLayout{static_cast<int>(graph.types().size()), shapes.layers,
                     shapes.num_relations};
}

SparseMatrix scatter_matrix(const HeteroGraph& graph, int type_id) {
    const Index offset = graph.type_offset(type_id);
    const Index count = graph.types()[type_id].count;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(count);
    for (Index i = 0; i < count; ++i) trip.emplace_back(offset + i, i, 1.0);
    SparseMatrix S(graph.num_nodes(), count);
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

} // namespace

ad::Var forward_node(ad::Tape& tape, const HeteroGraph& graph,
                     const std::vector<SparseMatrix>& rel_adj,
                     const std::vector<ad::Var>& vars,
                     const EncoderParams& shapes) {
    const VarLayout lay = layout_of(graph, shapes);

    // per-type input projection assembled into global order
    ad::Var X{-1};
    for (const NodeType& t : graph.types()) {
        ad::Var proj = tape.matmul(tape.constant(graph.features(t.id)),
                                   vars[lay.input_proj(t.id)]);
        ad::Var placed = tape.spmm(scatter_matrix(graph, t.id), proj);
        X = X.idx < 0 ? placed : tape.add(X, placed);
    }

    for (int l = 0; l < shapes.layers; ++l) {
        ad::Var agg = tape.matmul(X, vars[lay.self_weight(l)]);
        for (int r = 0; r < shapes.num_relations; ++r) {
            ad::Var msg = tape.matmul(tape.spmm(rel_adj[r], X),
                                      vars[lay.relation_weight(l, r)]);
            agg = tape.add(agg, msg);
        }
        X = tape.relu(agg);
    }
    return tape.graph_norm(X, vars[lay.norm_scale()], vars[lay.norm_shift()]);
}

Eigen::MatrixXd forward(const HeteroGraph& graph,
                        const std::vector<SparseMatrix>& rel_adj,
                        const EncoderParams& params) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const Eigen::MatrixXd* m : params.flat()) vars.push_back(tape.constant(*m));
    return tape.value(forward_node(tape, graph, rel_adj, vars, params));
}

namespace {

struct AdamState {
    std::vector<Eigen::MatrixXd> m, v;
    int step = 0;

    void init(const std::vector<Eigen::MatrixXd*>& params) {
        for (const Eigen::MatrixXd* p : params) {
            m.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
            v.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        }
    }

    void update(std::vector<Eigen::MatrixXd*>& params,
                const std::vector<Eigen::MatrixXd>& grads, double lr,
                double weight_decay) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++step;
        const double c1 = 1.0 - std::pow(b1, step);
        const double c2 = 1.0 - std::pow(b2, step);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * grads[i];
            v[i] = (b2 * v[i]).array() + (1.0 - b2) * grads[i].array().square();
            const Eigen::ArrayXXd mhat = m[i].array() / c1;
            const Eigen::ArrayXXd vhat = v[i].array() / c2;
            params[i]->array() -= lr * mhat / (vhat.sqrt() + eps);
            if (weight_decay > 0.0)
                params[i]->array() -= lr * weight_decay * params[i]->array();
        }
    }
};

std::vector<Eigen::Index> labeled_global_rows(const HeteroGraph& graph,
                                              const LabelAssignment& labels) {
    const Index offset = graph.type_offset(labels.target_type);
    std::vector<Eigen::Index> rows;
    for (Index i = 0; i < labels.labels.rows(); ++i)
        if (labels.labeled_mask[offset + i] != 0.0) rows.push_back(offset + i);
    return rows;
}

} // namespace

TrainResult train(const HeteroGraph& graph, const LabelAssignment& labels,
                  const HlidScores& hlid, const EncoderConfig& encoder_config,
                  const AugmentConfig& augment_config,
                  const LossConfig& loss_config, TrainMode mode) {
    encoder_config.validate();
    loss_config.validate();
    const auto rows = labeled_global_rows(graph, labels);
    if (rows.empty()) throw std::invalid_argument("training needs labeled nodes");

    const Index offset = graph.type_offset(labels.target_type);
    Eigen::MatrixXd Yl(rows.size(), labels.num_classes);
    for (std::size_t i = 0; i < rows.size(); ++i)
        Yl.row(i) = labels.labels.row(rows[i] - offset);

    TrainResult result;
    result.params = init_params(graph, encoder_config, labels.num_classes);
    auto flat = result.params.flat();
    AdamState adam;
    adam.init(flat);

    const auto rel_adj_orig = normalized_relation_adjacency(graph);
    std::vector<Candidate> sample_space;
    if (mode == TrainMode::Htad) {
        Rng rng = Rng(augment_config.seed).substream("htad_sample_space");
        sample_space = build_sample_space(graph, augment_config, rng);
    }

    const Eigen::MatrixXd ones_n0 =
        Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(rows.size()), 1);

    for (int epoch = 1; epoch <= encoder_config.epochs; ++epoch) {
        EpochMetrics metrics;
        metrics.epoch = epoch;

        std::vector<SparseMatrix> rel_adj_aug;
        if (mode == TrainMode::Htad) {
            const AugmentedEdgeSet aug = sample_augmented_graph(
                graph, sample_space, hlid, augment_config,
                static_cast<std::uint64_t>(epoch));
            metrics.augmented_edges = aug.edges.size();
            rel_adj_aug = normalized_relation_adjacency(graph, aug);
        }

        ad::Tape tape;
        std::vector<ad::Var> vars;
        for (Eigen::MatrixXd* p : flat) vars.push_back(tape.param(*p));

        const ad::Var H =
            forward_node(tape, graph, rel_adj_orig, vars, result.params);
        const ad::Var H_hat =
            mode == TrainMode::Htad
                ? forward_node(tape, graph, rel_adj_aug, vars, result.params)
                : forward_node(tape, graph, rel_adj_orig, vars, result.params);

        const VarLayout lay = layout_of(graph, result.params);
        ad::Var features = tape.hconcat(tape.select_rows(H, rows),
                                        tape.select_rows(H_hat, rows));
        ad::Var logits =
            tape.add(tape.matmul(features, vars[lay.classifier_weight()]),
                     tape.matmul(tape.constant(ones_n0),
                                 vars[lay.classifier_bias()]));
        ad::Var ce = encoder_config.multi_label
                         ? tape.sigmoid_cross_entropy(logits, Yl)
                         : tape.softmax_cross_entropy(logits, Yl);

        ad::Var total = ce;
        if (mode == TrainMode::Htad) {
            ad::Var l1 =
                general_contrastive_loss_node(tape, H, H_hat, graph, loss_config);
            ad::Var l2 = target_contrastive_loss_node(tape, H, H_hat, graph,
                                                      labels, loss_config);
            total = tape.add(
                total, tape.add(tape.scale(l1, loss_config.lambda1),
                                tape.scale(l2, loss_config.lambda2)));
            metrics.general_contrastive = tape.value(l1)(0, 0);
            metrics.target_contrastive = tape.value(l2)(0, 0);
        }
        metrics.label_loss = tape.value(ce)(0, 0);
        metrics.total = tape.value(total)(0, 0);
        if (!std::isfinite(metrics.total))
            throw std::runtime_error("non-finite loss at epoch " +
                                     std::to_string(epoch) + " (label loss " +
                                     std::to_string(metrics.label_loss) + ")");

        tape.backward(total);
        std::vector<Eigen::MatrixXd> grads;
        for (const ad::Var v : vars) grads.push_back(tape.grad(v));
        adam.update(flat, grads, encoder_config.learning_rate,
                    encoder_config.weight_decay);

        result.history.push_back(metrics);
    }
    return result;
}

Eigen::MatrixXd predict_probabilities(const HeteroGraph& graph,
                                      const EncoderParams& params,
                                      const EncoderConfig& config,
                                      int target_type) {
    const auto rel_adj = normalized_relation_adjacency(graph);
    const Eigen::MatrixXd H = forward(graph, rel_adj, params);
    const Index offset = graph.type_offset(target_type);
    const Index count = graph.types()[target_type].count;

    const Index C = params.classifier_weight.cols();
    Eigen::MatrixXd probs(count, C);
    for (Index i = 0; i < count; ++i) {
        Eigen::RowVectorXd x(2 * H.cols());
        x << H.row(offset + i), H.row(offset + i); // no augmented view at inference
        Eigen::RowVectorXd logits =
            x * params.classifier_weight + params.classifier_bias.row(0);
        if (config.multi_label) {
            probs.row(i) = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
        } else {
            const double m = logits.maxCoeff();
            Eigen::RowVectorXd e = (logits.array() - m).exp();
            probs.row(i) = e / e.sum();
        }
    }
    return probs;
}

Eigen::MatrixXd predict(const HeteroGraph& graph, const EncoderParams& params,
                        const EncoderConfig& config, int target_type) {
    const Eigen::MatrixXd probs =
        predict_probabilities(graph, params, config, target_type);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        if (config.multi_label) {
            for (Eigen::Index c = 0; c < probs.cols(); ++c)
                if (probs(i, c) > config.threshold) out(i, c) = 1.0;
        } else {
            Eigen::Index best = 0;
            probs.row(i).maxCoeff(&best);
            out(i, best) = 1.0;
        }
    }
    return out;
}

Evaluation evaluate(const HeteroGraph& graph, const LabelAssignment& labels_test,
                    const EncoderParams& params, const EncoderConfig& config,
                    const Eigen::VectorXd& projection, int n_buckets) {
    const auto rows = labeled_global_rows(graph, labels_test);
    if (rows.empty()) throw std::invalid_argument("empty test set");
    const Index offset = graph.type_offset(labels_test.target_type);

    const Eigen::MatrixXd pred_all =
        predict(graph, params, config, labels_test.target_type);

    Eigen::MatrixXd pred(rows.size(), labels_test.num_classes);
    Eigen::MatrixXd truth(rows.size(), labels_test.num_classes);
    Eigen::VectorXd proj(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        pred.row(i) = pred_all.row(rows[i] - offset);
        truth.row(i) = labels_test.labels.row(rows[i] - offset);
        proj[i] = projection[rows[i]];
    }

    Evaluation ev;
    ev.f1 = f1_scores(pred, truth);
    ev.accuracy = node_accuracy(pred, truth,
                                config.multi_label ? AccuracyMode::MultiLabel
                                                   : AccuracyMode::SingleLabel);
    ev.buckets = bucketize(proj, n_buckets);
    bucket_accuracy(ev.buckets, ev.accuracy);
    ev.total_var = total_variance(ev.accuracy);
    ev.bucket_var = bucket_variance(ev.buckets, ev.accuracy);
    for (Eigen::Index r : rows) ev.test_locals.push_back(r - offset);
    return ev;
}

namespace {
constexpr char kMagic[8] = {'H', 'T', 'A', 'D', 'M', 'D', 'L', '1'};

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    const std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        out.write(reinterpret_cast<const char*>(m.row(i).eval().data()),
                  sizeof(double) * m.cols());
}

Eigen::MatrixXd read_matrix(std::ifstream& in) {
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in || rows < 0 || cols < 0)
        throw std::runtime_error("corrupt model file");
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> row(cols);
    for (std::int64_t i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()), sizeof(double) * cols);
        for (std::int64_t j = 0; j < cols; ++j) m(i, j) = row[j];
    }
    return m;
}
} // namespace

void save_params(const EncoderParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::int32_t header[4] = {
        static_cast<std::int32_t>(params.input_proj.size()),
        static_cast<std::int32_t>(params.layers),
        static_cast<std::int32_t>(params.num_relations), 0};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (const Eigen::MatrixXd* m : params.flat()) write_matrix(out, *m);
}

EncoderParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a model file: " + path);
    std::int32_t header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    EncoderParams p;
    p.layers = header[1];
    p.num_relations = header[2];
    for (std::int32_t t = 0; t < header[0]; ++t)
        p.input_proj.push_back(read_matrix(in));
    for (std::int32_t l = 0; l < p.layers; ++l) {
        p.self_weight.push_back(read_matrix(in));
    }
    for (std::int32_t i = 0; i < p.layers * p.num_relations; ++i)
        p.relation_weight.push_back(read_matrix(in));
    p.norm_scale = read_matrix(in);
    p.norm_shift = read_matrix(in);
    p.classifier_weight = read_matrix(in);
    p.classifier_bias = read_matrix(in);
    return p;
}

} // namespace htad
