#include "htad/pipeline.hpp"

#include <sstream>
#include <stdexcept>

namespace htad {

Preprocessed preprocess(const HeteroGraph& graph, const LabelAssignment& train,
                        const MetaWeightConfig& mw, const ImpactConfig& impact) {
    Preprocessed pre{meta_weighted_adjacency(graph, relation_matrix(graph, mw)),
                     {}, {}, graph.degrees()};
    pre.propagation = normalized_propagation(pre.weighted);
    pre.hlid = hlid_scores(pre.propagation, train.labeled_mask, impact);
    return pre;
}

LabelAssignment test_split(const HeteroGraph& graph, const LabelAssignment& full,
                           const LabelAssignment& train) {
    LabelAssignment test;
    test.target_type = full.target_type;
    test.num_classes = full.num_classes;
    test.labels = Eigen::MatrixXd::Zero(full.labels.rows(), full.num_classes);
    test.labeled_mask = Eigen::VectorXd::Zero(graph.num_nodes());
    const Index offset = graph.type_offset(full.target_type);
    for (Index i = 0; i < full.labels.rows(); ++i) {
        if (full.labeled_mask[offset + i] != 0.0 &&
            train.labeled_mask[offset + i] == 0.0) {
            test.labels.row(i) = full.labels.row(i);
            test.labeled_mask[offset + i] = 1.0;
        }
    }
    return test;
}

namespace {

std::string spearman_or_sentinel(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) {
    try {
        return format_double(spearman(x, y));
    } catch (const MetricError&) {
        return "undefined";
    }
}

} // namespace

BiasReport make_bias_report(const HeteroGraph& graph,
                            const LabelAssignment& train,
                            const LabelAssignment& full,
                            const EncoderParams& params,
                            const ExperimentConfig& config,
                            const Preprocessed& pre) {
    const LabelAssignment test = test_split(graph, full, train);

    BiasReport report;
    report.config_hash = config_hash(config);

    Eigen::VectorXd node_rs_acc;
    for (const std::string& projection : {std::string("degree"), std::string("hlid")}) {
        const Eigen::VectorXd& values =
            projection == "degree" ? pre.degrees : pre.hlid.z;
        const Evaluation ev = evaluate(graph, test, params, config.encoder,
                                       values, config.bucket_count);
        node_rs_acc = ev.accuracy;

        Eigen::VectorXd bucket_proj(ev.buckets.num_buckets);
        Eigen::VectorXd bucket_acc(ev.buckets.num_buckets);
        for (int b = 0; b < ev.buckets.num_buckets; ++b) {
            BiasReportRow row;
            row.projection = projection;
            row.bucket = b;
            row.size = ev.buckets.bucket_sizes[b];
            row.lo = ev.buckets.bucket_bounds[b].first;
            row.hi = ev.buckets.bucket_bounds[b].second;
            row.mean_acc = ev.buckets.bucket_means[b];
            report.rows.push_back(row);
            bucket_proj[b] = 0.5 * (row.lo + row.hi);
            bucket_acc[b] = row.mean_acc;
        }

        Eigen::VectorXd proj_test(ev.accuracy.size());
        const Index offset = graph.type_offset(test.target_type);
        for (Eigen::Index i = 0; i < ev.accuracy.size(); ++i)
            proj_test[i] = values[offset + ev.test_locals[i]];

        // bucket-level r_s over bucket ids vs mean accuracy (the bucket
        // order is the projection order), node-level over raw values
        Eigen::VectorXd bucket_ids(ev.buckets.num_buckets);
        for (int b = 0; b < ev.buckets.num_buckets; ++b) bucket_ids[b] = b;
        report.trailer.emplace_back("spearman_bucket_" + projection,
                                    spearman_or_sentinel(bucket_ids, bucket_acc));
        report.trailer.emplace_back("spearman_node_" + projection,
                                    spearman_or_sentinel(proj_test, ev.accuracy));
        if (projection == config.projection) {
            report.trailer.emplace_back("total_var",
                                        format_double(ev.total_var));
            report.trailer.emplace_back("bucket_var",
                                        format_double(ev.bucket_var));
        }
    }
    return report;
}

std::string render_bias_report(const BiasReport& report) {
    std::ostringstream out;
    out << "# htad bias-report\n";
    out << "# config_hash=" << report.config_hash << "\n";
    out << "# columns: projection\tbucket\tsize\tproj_min\tproj_max\tmean_acc\n";
    for (const BiasReportRow& r : report.rows)
        out << r.projection << '\t' << r.bucket << '\t' << r.size << '\t'
            << format_double(r.lo) << '\t' << format_double(r.hi) << '\t'
            << format_double(r.mean_acc) << '\n';
    for (const auto& [key, value] : report.trailer)
        out << key << '=' << value << '\n';
    return out.str();
}

BiasReport parse_bias_report(const std::string& text) {
    BiasReport report;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string prefix = "# config_hash=";
            if (line.rfind(prefix, 0) == 0)
                report.config_hash = line.substr(prefix.size());
            continue;
        }
        if (line.find('\t') != std::string::npos) {
            std::istringstream ss(line);
            BiasReportRow row;
            std::string lo, hi, acc;
            std::getline(ss, row.projection, '\t');
            ss >> row.bucket >> row.size >> lo >> hi >> acc;
            row.lo = std::stod(lo);
            row.hi = std::stod(hi);
            row.mean_acc = std::stod(acc);
            report.rows.push_back(row);
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("malformed report line: " + line);
            report.trailer.emplace_back(line.substr(0, eq), line.substr(eq + 1));
        }
    }
    return report;
}

SeedData materialize(const ExperimentConfig& config, std::uint64_t seed) {
    if (!config.synth.type_counts.empty()) {
        SynthSpec spec = config.synth;
        spec.seed = seed;
        SynthResult r = generate(spec);
        return SeedData{std::move(r.graph), std::move(r.train_labels),
                        std::move(r.full_labels)};
    }
    if (config.graph_schema.empty())
        throw std::runtime_error("config needs either synth.* or graph.* keys");
    std::map<std::string, std::string> features(config.graph_features.begin(),
                                                config.graph_features.end());
    LoadedGraph loaded =
        load_graph(config.graph_schema, config.graph_edges, features,
                   config.graph_labels, config.graph_target_type);
    if (!loaded.labels)
        throw std::runtime_error("experiment pipelines need a labels file");
    LabelAssignment full = *loaded.labels;
    LabelAssignment train =
        config.label_rate < 1.0
            ? subsample_labels(full, loaded.graph, config.label_rate, seed)
            : full;
    return SeedData{std::move(loaded.graph), std::move(train), std::move(full)};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    report.config_hash = config_hash(config);

    double sums[2][4] = {};
    const char* methods[2] = {"base", "base+htad"};

    for (std::uint64_t seed : config.seeds) {
        SeedData data = materialize(config, seed);
        const Preprocessed pre =
            preprocess(data.graph, data.train, config.metaweight, config.hlid);
        const LabelAssignment test = test_split(data.graph, data.full, data.train);
        const Eigen::VectorXd& projection =
            config.projection == "degree" ? pre.degrees : pre.hlid.z;

        for (int m = 0; m < 2; ++m) {
            EncoderConfig enc = config.encoder;
            enc.seed = seed;
            AugmentConfig aug = config.augment;
            aug.seed = seed;
            const TrainResult trained =
                train(data.graph, data.train, pre.hlid, enc, aug, config.loss,
                      m == 0 ? TrainMode::Supervised : TrainMode::Htad);
            const Evaluation ev = evaluate(data.graph, test, trained.params, enc,
                                           projection, config.bucket_count);
            ExperimentRow row;
            row.method = methods[m];
            row.seed = seed;
            row.micro_f1 = ev.f1.micro;
            row.macro_f1 = ev.f1.macro;
            row.total_var = ev.total_var;
            row.bucket_var = ev.bucket_var;
            report.rows.push_back(row);
            sums[m][0] += ev.f1.micro;
            sums[m][1] += ev.f1.macro;
            sums[m][2] += ev.total_var;
            sums[m][3] += ev.bucket_var;
        }
    }

    const double n = static_cast<double>(config.seeds.size());
    for (int m = 0; m < 2; ++m) {
        ExperimentRow row;
        row.method = methods[m];
        row.aggregated = true;
        row.micro_f1 = sums[m][0] / n;
        row.macro_f1 = sums[m][1] / n;
        row.total_var = sums[m][2] / n;
        row.bucket_var = sums[m][3] / n;
        report.rows.push_back(row);
    }
    return report;
}

std::string render_experiment_report(const ExperimentReport& report) {
    std::ostringstream out;
    out << "# htad run-experiment\n";
    out << "# config_hash=" << report.config_hash << "\n";
    out << "# columns: method\tseed\tmicro_f1\tmacro_f1\ttotal_var\tbucket_var\n";
    for (const ExperimentRow& r : report.rows) {
        out << r.method << '\t' << (r.aggregated ? "mean" : std::to_string(r.seed))
            << '\t' << format_double(r.micro_f1) << '\t'
            << format_double(r.macro_f1) << '\t' << format_double(r.total_var)
            << '\t' << format_double(r.bucket_var) << '\n';
    }
    return out.str();
}

} // namespace htad
