#ifndef HTAD_LOSSES_HPP
#define HTAD_LOSSES_HPP

#include <Eigen/Dense>
#include <functional>

#include "htad/autodiff.hpp"
#include "htad/hetgraph.hpp"

namespace htad {

struct EmbeddingViews {
    Eigen::MatrixXd local;     // H
    Eigen::MatrixXd augmented; // H_hat
};

struct LossConfig {
    double tau = 1.0;     // temperature
    double lambda1 = 0.3; // weight of the general contrastive loss
    double lambda2 = 0.15; // weight of the target-specific contrastive loss
    // The general loss denominator excludes the positive pair by default;
    // this switch adds it back (canonical NT-Xent behaviour).
    bool include_positive_in_denominator = false;

    void validate() const;
};

double similarity(const Eigen::VectorXd& h, const Eigen::VectorXd& g, double tau);

// Per-type NT-Xent variant: cross-view negatives restricted to same-type
// nodes, normalized by the total node count.
double general_contrastive_loss(const EmbeddingViews& views,
                                const HeteroGraph& graph,
                                const LossConfig& config);

// Supervised contrast over labeled target nodes; positives share the exact
// label vector (anchor included), negatives differ. Anchors lacking either
// side are skipped and the normalizer adjusted.
double target_contrastive_loss(const EmbeddingViews& views,
                               const HeteroGraph& graph,
                               const LabelAssignment& labels,
                               const LossConfig& config);

// Cross entropy summed over labeled rows. Multi-label mode adds the
// complementary (1-Y)log(1-p) term (sigmoid outputs).
double label_loss(const Eigen::MatrixXd& class_probs, const Eigen::MatrixXd& Y,
                  bool multi_label);

double overall_loss(double l_lb, double l_cl1, double l_cl2,
                    const LossConfig& config);

// Tape builders used by the trainer; values agree with the functions above.
ad::Var general_contrastive_loss_node(ad::Tape& tape, ad::Var H, ad::Var H_hat,
                                      const HeteroGraph& graph,
                                      const LossConfig& config);
ad::Var target_contrastive_loss_node(ad::Tape& tape, ad::Var H, ad::Var H_hat,
                                     const HeteroGraph& graph,
                                     const LabelAssignment& labels,
                                     const LossConfig& config);

// Central-difference gradient check over a random coordinate subset.
// Returns the maximum relative error against the analytic gradient.
struct GradCheckProblem {
    std::vector<Eigen::MatrixXd> params;
    // evaluates the loss and, when grads != nullptr, fills analytic gradients
    std::function<double(const std::vector<Eigen::MatrixXd>&,
                         std::vector<Eigen::MatrixXd>*)>
        evaluate;
};

double grad_check(const GradCheckProblem& problem, double epsilon,
                  int coords_per_param, std::uint64_t seed);

} // namespace htad

#endif
