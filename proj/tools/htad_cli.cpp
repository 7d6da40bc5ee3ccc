#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "htad/pipeline.hpp"

namespace {

using namespace htad;

void write_file(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << content;
}

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::int64_t seed = -1; // overrides the config's first seed when >= 0
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
    auto* c = cmd->add_option("--config", opts.config_path, "experiment config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out, "output path (default: stdout)");
    cmd->add_option("--seed", opts.seed, "override the config's first seed");
}

ExperimentConfig load(const CommonOpts& opts) {
    ExperimentConfig config = load_config(opts.config_path);
    if (opts.seed >= 0) {
        config.seeds.clear();
        config.seeds.push_back(static_cast<std::uint64_t>(opts.seed));
    }
    return config;
}

std::string report_header(const char* name, const ExperimentConfig& config) {
    return std::string("# htad ") + name + "\n# config_hash=" +
           config_hash(config) + "\n";
}

int cmd_ingest(const CommonOpts& opts) {
    const ExperimentConfig config = load(opts);
    const SeedData data = materialize(config, config.seeds.front());
    std::ostringstream out;
    out << report_header("ingest", config);
    out << "# columns: key\tvalue\n";
    out << "nodes\t" << data.graph.num_nodes() << "\n";
    out << "edges\t" << data.graph.edges().size() << "\n";
    out << "types\t" << data.graph.types().size() << "\n";
    out << "relations\t" << data.graph.relations().size() << "\n";
    for (const NodeType& t : data.graph.types())
        out << "type." << t.name << "\t" << t.count << "\n";
    out << "labeled\t" << data.train.num_labeled() << "\n";
    write_file(opts.out, out.str());
    return 0;
}

int cmd_synth(const CommonOpts& opts) {
    const ExperimentConfig config = load(opts);
    SynthSpec spec = config.synth;
    spec.seed = config.seeds.front();
    const SynthResult result = generate(spec);
    const std::string dir = opts.out.empty() ? "." : opts.out;
    save_graph(result.graph, dir + "/schema.tsv", dir + "/edges.tsv");
    for (const NodeType& t : result.graph.types())
        save_features(result.graph, t.id, dir + "/features_" + t.name + ".tsv");
    save_labels(result.full_labels, result.graph, dir + "/labels_full.tsv");
    save_labels(result.train_labels, result.graph, dir + "/labels_train.tsv");
    std::cout << "wrote synthetic graph (" << result.graph.num_nodes()
              << " nodes, " << result.graph.edges().size() << " edges) to "
              << dir << "\n";
    return 0;
}

int cmd_hlid(const CommonOpts& opts) {
    const ExperimentConfig config = load(opts);
    const SeedData data = materialize(config, config.seeds.front());
    const Preprocessed pre =
        preprocess(data.graph, data.train, config.metaweight, config.hlid);
    std::ostringstream out;
    out << report_header("hlid", config);
    out << "# columns: global_index\thlid\n";
    char buf[64];
    for (Index i = 0; i < pre.hlid.z.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld\t%.12g\n",
                      static_cast<long long>(i), pre.hlid.z[i]);
        out << buf;
    }
    write_file(opts.out, out.str());
    return 0;
}

int cmd_augment(const CommonOpts& opts) {
    const ExperimentConfig config = load(opts);
    const std::uint64_t seed = config.seeds.front();
    const SeedData data = materialize(config, seed);
    const Preprocessed pre =
        preprocess(data.graph, data.train, config.metaweight, config.hlid);
    AugmentConfig aug = config.augment;
    aug.seed = seed;
    const AugmentedEdgeSet set = sample_augmented_graph(data.graph, pre.hlid, aug);
    std::ostringstream out;
    out << report_header("augment", config);
    out << "# columns: relation\tsrc\tdst\tprovenance\n";
    for (const AugmentedEdge& e : set.edges)
        out << data.graph.relations()[e.relation_id].name << '\t'
            << e.u.local_index << '\t' << e.v.local_index << '\t'
            << (e.provenance == Provenance::Original ? "original" : "generated")
            << '\n';
    write_file(opts.out, out.str());
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& mode,
              const std::string& metrics_path) {
    const ExperimentConfig config = load(opts);
    const std::uint64_t seed = config.seeds.front();
    const SeedData data = materialize(config, seed);
    const Preprocessed pre =
        preprocess(data.graph, data.train, config.metaweight, config.hlid);
    EncoderConfig enc = config.encoder;
    enc.seed = seed;
    AugmentConfig aug = config.augment;
    aug.seed = seed;
    const TrainResult result =
        train(data.graph, data.train, pre.hlid, enc, aug, config.loss,
              mode == "base" ? TrainMode::Supervised : TrainMode::Htad);
    if (opts.out.empty())
        throw std::runtime_error("train requires --out for the model file");
    save_params(result.params, opts.out);
    if (!metrics_path.empty()) {
        std::ostringstream out;
        out << report_header("train", config);
        out << "# columns: epoch\tlabel_loss\tgeneral_cl\ttarget_cl\ttotal\n";
        for (const EpochMetrics& m : result.history)
            out << m.epoch << '\t' << format_double(m.label_loss) << '\t'
                << format_double(m.general_contrastive) << '\t'
                << format_double(m.target_contrastive) << '\t'
                << format_double(m.total) << '\n';
        write_file(metrics_path, out.str());
    }
    std::cout << "model written to " << opts.out << "\n";
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& model_path) {
    const ExperimentConfig config = load(opts);
    const std::uint64_t seed = config.seeds.front();
    const SeedData data = materialize(config, seed);
    const Preprocessed pre =
        preprocess(data.graph, data.train, config.metaweight, config.hlid);
    const EncoderParams params = load_params(model_path);
    const LabelAssignment test = test_split(data.graph, data.full, data.train);
    const Eigen::VectorXd& projection =
        config.projection == "degree" ? pre.degrees : pre.hlid.z;
    const Evaluation ev = evaluate(data.graph, test, params, config.encoder,
                                   projection, config.bucket_count);
    std::ostringstream out;
    out << report_header("eval", config);
    out << "# columns: micro_f1\tmacro_f1\ttotal_var\tbucket_var\n";
    out << format_double(ev.f1.micro) << '\t' << format_double(ev.f1.macro)
        << '\t' << format_double(ev.total_var) << '\t'
        << format_double(ev.bucket_var) << '\n';
    write_file(opts.out, out.str());
    return 0;
}

int cmd_bias_report(const CommonOpts& opts, const std::string& model_path) {
    const ExperimentConfig config = load(opts);
    const std::uint64_t seed = config.seeds.front();
    const SeedData data = materialize(config, seed);
    const Preprocessed pre =
        preprocess(data.graph, data.train, config.metaweight, config.hlid);
    const EncoderParams params = load_params(model_path);
    const BiasReport report =
        make_bias_report(data.graph, data.train, data.full, params, config, pre);
    write_file(opts.out, render_bias_report(report));
    return 0;
}

int cmd_run_experiment(const CommonOpts& opts) {
    const ExperimentConfig config = load(opts);
    const ExperimentReport report = run_experiment(config);
    write_file(opts.out, render_experiment_report(report));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous graph topological-bias audit and HTAD debiasing"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string mode = "htad";
    std::string model_path;
    std::string metrics_path;

    auto* ingest = app.add_subcommand("ingest", "validate and summarize a dataset");
    add_common(ingest, opts);
    auto* synth = app.add_subcommand("synth", "generate a synthetic graph");
    add_common(synth, opts);
    auto* hlid = app.add_subcommand("hlid", "compute HLID scores");
    add_common(hlid, opts);
    auto* augment = app.add_subcommand("augment", "sample an augmented edge set");
    add_common(augment, opts);
    auto* trainc = app.add_subcommand("train", "train the encoder");
    add_common(trainc, opts);
    trainc->add_option("--mode", mode, "base | htad")->default_val("htad");
    trainc->add_option("--metrics", metrics_path, "per-epoch metrics file");
    auto* evalc = app.add_subcommand("eval", "evaluate a trained model");
    add_common(evalc, opts);
    evalc->add_option("--model", model_path, "model file")->required();
    auto* bias = app.add_subcommand("bias-report", "bucketized bias report");
    add_common(bias, opts);
    bias->add_option("--model", model_path, "model file")->required();
    auto* runx = app.add_subcommand("run-experiment",
                                    "base vs base+HTAD over the seed list");
    add_common(runx, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(opts);
        if (synth->parsed()) return cmd_synth(opts);
        if (hlid->parsed()) return cmd_hlid(opts);
        if (augment->parsed()) return cmd_augment(opts);
        if (trainc->parsed()) return cmd_train(opts, mode, metrics_path);
        if (evalc->parsed()) return cmd_eval(opts, model_path);
        if (bias->parsed()) return cmd_bias_report(opts, model_path);
        if (runx->parsed()) return cmd_run_experiment(opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
