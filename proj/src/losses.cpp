#include "htad/losses.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "htad/stats.hpp"

namespace htad {

void LossConfig::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0))
        throw std::invalid_argument("loss weights must be non-negative");
}

double similarity(const Eigen::VectorXd& h, const Eigen::VectorXd& g, double tau) {
    const double nh = h.norm();
    const double ng = g.norm();
    if (nh == 0.0 || ng == 0.0)
        throw std::domain_error("cosine similarity of a zero-norm vector");
    return h.dot(g) / (nh * ng * tau);
}

namespace {

std::vector<Eigen::Index> type_rows(const HeteroGraph& graph, int type_id) {
    const Index offset = graph.type_offset(type_id);
    const Index count = graph.types()[type_id].count;
    std::vector<Eigen::Index> rows(count);
    for (Index i = 0; i < count; ++i) rows[i] = offset + i;
    return rows;
}

std::vector<Eigen::Index> labeled_rows(const HeteroGraph& graph,
                                       const LabelAssignment& labels) {
    const Index offset = graph.type_offset(labels.target_type);
    std::vector<Eigen::Index> rows;
    for (Index i = 0; i < labels.labels.rows(); ++i)
        if (labels.labeled_mask[offset + i] != 0.0) rows.push_back(offset + i);
    return rows;
}

} // namespace

ad::Var general_contrastive_loss_node(ad::Tape& tape, ad::Var H, ad::Var H_hat,
                                      const HeteroGraph& graph,
                                      const LossConfig& config) {
    config.validate();
    const Index N = graph.num_nodes();
    ad::Var total = tape.constant(Eigen::MatrixXd::Zero(1, 1));
    for (const NodeType& t : graph.types()) {
        const Index nt = t.count;
        if (nt < 2)
            throw std::invalid_argument(
                "general contrastive loss needs >= 2 nodes of type '" + t.name +
                "'");
        stats::counters().loss_pair_ops +=
            static_cast<std::uint64_t>(nt) * static_cast<std::uint64_t>(nt);
        const auto rows = type_rows(graph, t.id);
        ad::Var Hn = tape.row_l2_normalize(tape.select_rows(H, rows));
        ad::Var Gn = tape.row_l2_normalize(tape.select_rows(H_hat, rows));
        ad::Var S = tape.scale(tape.matmul(Hn, tape.transpose(Gn)),
                               1.0 / config.tau);
        ad::Var E = tape.exp(S);
        Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(nt, nt);
        if (!config.include_positive_in_denominator)
            mask -= Eigen::MatrixXd::Identity(nt, nt);
        ad::Var denom = tape.matmul(tape.cwise_mul(E, mask),
                                    tape.constant(Eigen::MatrixXd::Ones(nt, 1)));
        ad::Var log_denom = tape.sum(tape.log(denom));
        ad::Var pos = tape.sum(
            tape.cwise_mul(S, Eigen::MatrixXd::Identity(nt, nt)));
        total = tape.add(total, tape.sub(log_denom, pos));
    }
    return tape.scale(total, 1.0 / static_cast<double>(N));
}

ad::Var target_contrastive_loss_node(ad::Tape& tape, ad::Var H, ad::Var H_hat,
                                     const HeteroGraph& graph,
                                     const LabelAssignment& labels,
                                     const LossConfig& config) {
    config.validate();
    const auto cand = labeled_rows(graph, labels);
    if (cand.empty())
        throw std::invalid_argument("target contrastive loss needs labeled nodes");
    const Index offset = graph.type_offset(labels.target_type);

    // anchors need at least one differently-labeled peer (the positive side
    // always contains the anchor itself)
    std::vector<Eigen::Index> anchors;
    bool warned = false;
    for (Eigen::Index u : cand) {
        bool has_neg = false;
        for (Eigen::Index v : cand) {
            if ((labels.labels.row(u - offset).array() !=
                 labels.labels.row(v - offset).array())
                    .any()) {
                has_neg = true;
                break;
            }
        }
        if (has_neg) {
            anchors.push_back(u);
        } else if (!warned) {
            std::cerr << "warning: anchors without differently-labeled peers "
                         "are skipped in the target contrastive loss\n";
            warned = true;
        }
    }
    if (anchors.empty())
        throw std::invalid_argument("no usable anchors for the target "
                                    "contrastive loss");

    const Eigen::Index na = static_cast<Eigen::Index>(anchors.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(cand.size());
    stats::counters().loss_pair_ops +=
        static_cast<std::uint64_t>(na) * static_cast<std::uint64_t>(nc);

    Eigen::MatrixXd pos_mask(na, nc);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < nc; ++j)
            pos_mask(i, j) = (labels.labels.row(anchors[i] - offset).array() ==
                              labels.labels.row(cand[j] - offset).array())
                                     .all()
                                 ? 1.0
                                 : 0.0;
    const Eigen::MatrixXd neg_mask = Eigen::MatrixXd::Ones(na, nc) - pos_mask;

    ad::Var An = tape.row_l2_normalize(tape.select_rows(H, anchors));
    ad::Var Cn = tape.row_l2_normalize(tape.select_rows(H_hat, cand));
    ad::Var S = tape.scale(tape.matmul(An, tape.transpose(Cn)), 1.0 / config.tau);
    ad::Var E = tape.exp(S);
    ad::Var ones = tape.constant(Eigen::MatrixXd::Ones(nc, 1));
    ad::Var pos = tape.sum(tape.log(tape.matmul(tape.cwise_mul(E, pos_mask), ones)));
    ad::Var neg = tape.sum(tape.log(tape.matmul(tape.cwise_mul(E, neg_mask), ones)));
    return tape.scale(tape.sub(neg, pos), 1.0 / static_cast<double>(na));
}

double general_contrastive_loss(const EmbeddingViews& views,
                                const HeteroGraph& graph,
                                const LossConfig& config) {
    ad::Tape tape;
    ad::Var H = tape.constant(views.local);
    ad::Var G = tape.constant(views.augmented);
    return tape.value(general_contrastive_loss_node(tape, H, G, graph, config))(0, 0);
}

double target_contrastive_loss(const EmbeddingViews& views,
                               const HeteroGraph& graph,
                               const LabelAssignment& labels,
                               const LossConfig& config) {
    ad::Tape tape;
    ad::Var H = tape.constant(views.local);
    ad::Var G = tape.constant(views.augmented);
    return tape.value(
        target_contrastive_loss_node(tape, H, G, graph, labels, config))(0, 0);
}

double label_loss(const Eigen::MatrixXd& class_probs, const Eigen::MatrixXd& Y,
                  bool multi_label) {
    if (class_probs.rows() != Y.rows() || class_probs.cols() != Y.cols())
        throw std::invalid_argument("class output and label shapes differ");
    static bool warned = false;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.cols(); ++j) {
            double p = class_probs(i, j);
            if (p <= 0.0 || p >= 1.0) {
                if (!warned) {
                    std::cerr << "warning: class probabilities clamped to "
                                 "(1e-12, 1-1e-12)\n";
                    warned = true;
                }
                p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
            }
            loss -= Y(i, j) * std::log(p);
            if (multi_label) loss -= (1.0 - Y(i, j)) * std::log(1.0 - p);
        }
    }
    return loss;
}

double overall_loss(double l_lb, double l_cl1, double l_cl2,
                    const LossConfig& config) {
    if (!std::isfinite(l_lb) || !std::isfinite(l_cl1) || !std::isfinite(l_cl2))
        throw std::invalid_argument("loss components must be finite");
    return l_lb + config.lambda1 * l_cl1 + config.lambda2 * l_cl2;
}

double grad_check(const GradCheckProblem& problem, double epsilon,
                  int coords_per_param, std::uint64_t seed) {
    std::vector<Eigen::MatrixXd> params = problem.params;
    std::vector<Eigen::MatrixXd> grads;
    const double base = problem.evaluate(params, &grads);
    if (!std::isfinite(base))
        throw std::runtime_error("non-finite loss at the probe point");
    if (grads.size() != params.size())
        throw std::runtime_error("gradient count does not match parameter count");

    Rng rng = Rng(seed).substream("grad_check");
    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const Eigen::Index size = params[p].size();
        const int probes = std::min<Eigen::Index>(coords_per_param, size);
        for (int k = 0; k < probes; ++k) {
            const Eigen::Index c = static_cast<Eigen::Index>(rng.next_below(size));
            const double orig = params[p].data()[c];
            params[p].data()[c] = orig + epsilon;
            const double fp = problem.evaluate(params, nullptr);
            params[p].data()[c] = orig - epsilon;
            const double fm = problem.evaluate(params, nullptr);
            params[p].data()[c] = orig;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw std::runtime_error("non-finite loss at a probe point");
            const double numeric = (fp - fm) / (2.0 * epsilon);
            const double analytic = grads[p].data()[c];
            const double denom =
                std::max({std::abs(numeric), std::abs(analytic), 1.0});
            max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
        }
    }
    return max_rel;
}

} // namespace htad
