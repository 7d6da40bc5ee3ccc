#ifndef HTAD_ENCODER_HPP
#define HTAD_ENCODER_HPP

#include <string>
#include <vector>

#include "htad/augment.hpp"
#include "htad/autodiff.hpp"
#include "htad/biasmetrics.hpp"
#include "htad/hetgraph.hpp"
#include "htad/hlid.hpp"
#include "htad/losses.hpp"

namespace htad {

struct EncoderConfig {
    int layers = 2; // message passing layers, 1 or 2
    int hidden_dim = 32;
    int epochs = 50;
    double learning_rate = 5e-3;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    bool multi_label = false;
    double threshold = 0.5;

    void validate() const;
};

// Per-edge-type graph convolution weights plus classifier head.
struct EncoderParams {
    std::vector<Eigen::MatrixXd> input_proj; // per type, d_t x hidden
    std::vector<Eigen::MatrixXd> self_weight; // per layer, hidden x hidden
    // [layer * num_relations + relation], hidden x hidden
    std::vector<Eigen::MatrixXd> relation_weight;
    Eigen::MatrixXd norm_scale; // 1 x hidden
    Eigen::MatrixXd norm_shift; // 1 x hidden
    Eigen::MatrixXd classifier_weight; // 2*hidden x C
    Eigen::MatrixXd classifier_bias;   // 1 x C
    int layers = 0;
    int num_relations = 0;

    std::vector<Eigen::MatrixXd*> flat();
    std::vector<const Eigen::MatrixXd*> flat() const;
};

EncoderParams init_params(const HeteroGraph& graph, const EncoderConfig& config,
                          Index num_classes);

// Symmetric degree-normalized adjacency per relation over global indices.
std::vector<SparseMatrix> normalized_relation_adjacency(const HeteroGraph& graph);
std::vector<SparseMatrix> normalized_relation_adjacency(
    const HeteroGraph& graph, const AugmentedEdgeSet& edges);

// Plain forward pass; equals the tape forward bit for bit.
Eigen::MatrixXd forward(const HeteroGraph& graph,
                        const std::vector<SparseMatrix>& rel_adj,
                        const EncoderParams& params);

// Tape forward used by the trainer; `vars` must mirror params.flat() order.
ad::Var forward_node(ad::Tape& tape, const HeteroGraph& graph,
                     const std::vector<SparseMatrix>& rel_adj,
                     const std::vector<ad::Var>& vars,
                     const EncoderParams& shapes);

enum class TrainMode { Supervised, Htad };

struct EpochMetrics {
    int epoch = 0;
    double label_loss = 0.0;
    double general_contrastive = 0.0;
    double target_contrastive = 0.0;
    double total = 0.0;
    std::size_t augmented_edges = 0;
};

struct TrainResult {
    EncoderParams params;
    std::vector<EpochMetrics> history;
};

TrainResult train(const HeteroGraph& graph, const LabelAssignment& labels,
                  const HlidScores& hlid, const EncoderConfig& encoder_config,
                  const AugmentConfig& augment_config,
                  const LossConfig& loss_config,
                  TrainMode mode = TrainMode::Htad);

// Inference on the original graph only; the classifier's augmented-view slot
// is filled with the local view. Returns a binary label matrix over the
// target type's nodes.
Eigen::MatrixXd predict(const HeteroGraph& graph, const EncoderParams& params,
                        const EncoderConfig& config, int target_type);
// Raw class probabilities (softmax or per-class sigmoid) for all target nodes.
Eigen::MatrixXd predict_probabilities(const HeteroGraph& graph,
                                      const EncoderParams& params,
                                      const EncoderConfig& config,
                                      int target_type);

struct Evaluation {
    F1Result f1;
    Eigen::VectorXd accuracy; // per evaluated test node
    BucketReport buckets;
    double total_var = 0.0;
    double bucket_var = 0.0;
    std::vector<Index> test_locals; // target-type local indices evaluated
};

Evaluation evaluate(const HeteroGraph& graph, const LabelAssignment& labels_test,
                    const EncoderParams& params, const EncoderConfig& config,
                    const Eigen::VectorXd& projection, int n_buckets);

void save_params(const EncoderParams& params, const std::string& path);
EncoderParams load_params(const std::string& path);

} // namespace htad

#endif
