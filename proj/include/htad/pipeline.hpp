#ifndef HTAD_PIPELINE_HPP
#define HTAD_PIPELINE_HPP

#include <map>
#include <string>

#include "htad/config.hpp"

namespace htad {

// Pre-processing shared by every downstream stage: meta-weighting, the
// normalized propagation matrix and the HLID scores of the training labels.
struct Preprocessed {
    WeightedAdjacency weighted;
    SparseMatrix propagation;
    HlidScores hlid;
    Eigen::VectorXd degrees;
};

Preprocessed preprocess(const HeteroGraph& graph, const LabelAssignment& train,
                        const MetaWeightConfig& mw, const ImpactConfig& impact);

// full minus train: the held-out labeled nodes
LabelAssignment test_split(const HeteroGraph& graph, const LabelAssignment& full,
                           const LabelAssignment& train);

struct BiasReportRow {
    std::string projection; // degree | hlid
    int bucket = 0;
    int size = 0;
    double lo = 0.0;
    double hi = 0.0;
    double mean_acc = 0.0;
};

struct BiasReport {
    std::string config_hash;
    std::vector<BiasReportRow> rows;
    // r_s and variance trailer; spearman on constant accuracy is reported
    // with the sentinel value "undefined"
    std::vector<std::pair<std::string, std::string>> trailer;
};

BiasReport make_bias_report(const HeteroGraph& graph,
                            const LabelAssignment& train,
                            const LabelAssignment& full,
                            const EncoderParams& params,
                            const ExperimentConfig& config,
                            const Preprocessed& pre);

std::string render_bias_report(const BiasReport& report);
BiasReport parse_bias_report(const std::string& text);

struct ExperimentRow {
    std::string method; // base | base+htad
    std::uint64_t seed = 0;
    bool aggregated = false;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double total_var = 0.0;
    double bucket_var = 0.0;
};

struct ExperimentReport {
    std::string config_hash;
    std::vector<ExperimentRow> rows;
};

// Per-seed synth -> hlid -> train (base and base+HTAD) -> eval, plus the
// aggregated mean rows.
ExperimentReport run_experiment(const ExperimentConfig& config);

std::string render_experiment_report(const ExperimentReport& report);

// Materializes the graph + train/full labels for one seed, from the synth
// section when present, else from the graph file paths.
struct SeedData {
    HeteroGraph graph;
    LabelAssignment train;
    LabelAssignment full;
};

SeedData materialize(const ExperimentConfig& config, std::uint64_t seed);

} // namespace htad

#endif
