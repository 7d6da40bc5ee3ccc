#ifndef HTAD_CONFIG_HPP
#define HTAD_CONFIG_HPP

#include <string>
#include <vector>

#include "htad/augment.hpp"
#include "htad/encoder.hpp"
#include "htad/hlid.hpp"
#include "htad/losses.hpp"
#include "htad/metaweight.hpp"
#include "htad/synth.hpp"

namespace htad {

// Flat key=value config with section prefixes (e.g. hlid.alpha=0.15).
struct ExperimentConfig {
    // dataset paths (empty when the synth section drives the pipeline)
    std::string graph_schema;
    std::string graph_edges;
    std::string graph_labels;
    std::string graph_target_type;
    std::vector<std::pair<std::string, std::string>> graph_features; // type -> path

    MetaWeightConfig metaweight;
    ImpactConfig hlid;
    AugmentConfig augment;
    LossConfig loss;
    EncoderConfig encoder;
    SynthSpec synth;

    int bucket_count = 7;
    std::string projection = "hlid"; // degree | hlid
    double label_rate = 1.0;
    std::vector<std::uint64_t> seeds = {0};

    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config); // 16 hex chars

// canonical shortest-round-trip decimal formatting
std::string format_double(double v);

} // namespace htad

#endif
