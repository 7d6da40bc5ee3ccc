#include "htad/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace htad {

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + value);
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + value);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) return buf;
    }
    return buf;
}

void ExperimentConfig::validate() const {
    hlid.validate();
    augment.validate();
    loss.validate();
    encoder.validate();
    if (bucket_count < 1) throw ConfigError("bucket_count must be >= 1");
    if (projection != "degree" && projection != "hlid")
        throw ConfigError("projection must be 'degree' or 'hlid'");
    if (!(label_rate > 0.0 && label_rate <= 1.0))
        throw ConfigError("label_rate must lie in (0, 1]");
    if (seeds.empty()) throw ConfigError("seed list must be non-empty");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        if (key == "graph.schema") c.graph_schema = value;
        else if (key == "graph.edges") c.graph_edges = value;
        else if (key == "graph.labels") c.graph_labels = value;
        else if (key == "graph.target_type") c.graph_target_type = value;
        else if (key.rfind("graph.features.", 0) == 0)
            c.graph_features.emplace_back(key.substr(15), value);
        else if (key == "metaweight.eta1") c.metaweight.eta1 = parse_number(key, value);
        else if (key == "metaweight.eta2") c.metaweight.eta2 = parse_number(key, value);
        else if (key == "hlid.alpha") c.hlid.alpha = parse_number(key, value);
        else if (key == "hlid.tol") c.hlid.tol = parse_number(key, value);
        else if (key == "hlid.max_iter") c.hlid.max_iter = static_cast<int>(parse_int(key, value));
        else if (key == "augment.lambda") c.augment.lambda = parse_number(key, value);
        else if (key == "augment.p0") c.augment.p0 = parse_number(key, value);
        else if (key == "augment.neg_multiplier") c.augment.neg_multiplier = parse_number(key, value);
        else if (key == "loss.tau") c.loss.tau = parse_number(key, value);
        else if (key == "loss.lambda1") c.loss.lambda1 = parse_number(key, value);
        else if (key == "loss.lambda2") c.loss.lambda2 = parse_number(key, value);
        else if (key == "loss.include_positive_in_denominator")
            c.loss.include_positive_in_denominator = parse_bool(key, value);
        else if (key == "encoder.layers") c.encoder.layers = static_cast<int>(parse_int(key, value));
        else if (key == "encoder.hidden_dim") c.encoder.hidden_dim = static_cast<int>(parse_int(key, value));
        else if (key == "encoder.epochs") c.encoder.epochs = static_cast<int>(parse_int(key, value));
        else if (key == "encoder.learning_rate") c.encoder.learning_rate = parse_number(key, value);
        else if (key == "encoder.weight_decay") c.encoder.weight_decay = parse_number(key, value);
        else if (key == "encoder.multi_label") c.encoder.multi_label = parse_bool(key, value);
        else if (key == "encoder.threshold") c.encoder.threshold = parse_number(key, value);
        else if (key == "synth.type_counts") {
            c.synth.type_counts.clear();
            for (const std::string& tok : split(value, ','))
                c.synth.type_counts.push_back(parse_int(key, tok));
        } else if (key == "synth.relations") {
            // "src-dst:count" entries, semicolon-separated
            c.synth.relations.clear();
            for (const std::string& tok : split(value, ';')) {
                const auto dash = tok.find('-');
                const auto colon = tok.find(':');
                if (dash == std::string::npos || colon == std::string::npos ||
                    colon < dash)
                    throw ConfigError("config key '" + key +
                                      "': expected src-dst:count entries");
                SynthRelationSpec r;
                r.src_type = static_cast<int>(parse_int(key, tok.substr(0, dash)));
                r.dst_type = static_cast<int>(
                    parse_int(key, tok.substr(dash + 1, colon - dash - 1)));
                r.edge_count = parse_int(key, tok.substr(colon + 1));
                c.synth.relations.push_back(r);
            }
        }
        else if (key == "synth.num_classes") c.synth.num_classes = parse_int(key, value);
        else if (key == "synth.homophily") c.synth.homophily = parse_number(key, value);
        else if (key == "synth.feature_dim") c.synth.feature_dim = parse_int(key, value);
        else if (key == "synth.feature_noise") c.synth.feature_noise = parse_number(key, value);
        else if (key == "synth.label_rate") c.synth.label_rate = parse_number(key, value);
        else if (key == "synth.target_type") c.synth.target_type = static_cast<int>(parse_int(key, value));
        else if (key == "synth.skew_labels") c.synth.skew_labels = parse_bool(key, value);
        else if (key == "synth.skew_strength") c.synth.skew_strength = parse_number(key, value);
        else if (key == "experiment.bucket_count") c.bucket_count = static_cast<int>(parse_int(key, value));
        else if (key == "experiment.projection") c.projection = value;
        else if (key == "experiment.label_rate") c.label_rate = parse_number(key, value);
        else if (key == "experiment.seeds") {
            c.seeds.clear();
            for (const std::string& tok : split(value, ','))
                c.seeds.push_back(static_cast<std::uint64_t>(parse_int(key, tok)));
        }
        else throw ConfigError("unknown config key: " + key);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
    std::ostringstream out;
    auto kv = [&out](const std::string& key, const std::string& value) {
        out << key << '=' << value << '\n';
    };
    if (!c.graph_schema.empty()) kv("graph.schema", c.graph_schema);
    if (!c.graph_edges.empty()) kv("graph.edges", c.graph_edges);
    if (!c.graph_labels.empty()) kv("graph.labels", c.graph_labels);
    if (!c.graph_target_type.empty()) kv("graph.target_type", c.graph_target_type);
    for (const auto& [type, path] : c.graph_features)
        kv("graph.features." + type, path);
    kv("metaweight.eta1", format_double(c.metaweight.eta1));
    kv("metaweight.eta2", format_double(c.metaweight.eta2));
    kv("hlid.alpha", format_double(c.hlid.alpha));
    kv("hlid.tol", format_double(c.hlid.tol));
    kv("hlid.max_iter", std::to_string(c.hlid.max_iter));
    kv("augment.lambda", format_double(c.augment.lambda));
    kv("augment.p0", format_double(c.augment.p0));
    kv("augment.neg_multiplier", format_double(c.augment.neg_multiplier));
    kv("loss.tau", format_double(c.loss.tau));
    kv("loss.lambda1", format_double(c.loss.lambda1));
    kv("loss.lambda2", format_double(c.loss.lambda2));
    kv("loss.include_positive_in_denominator",
       c.loss.include_positive_in_denominator ? "true" : "false");
    kv("encoder.layers", std::to_string(c.encoder.layers));
    kv("encoder.hidden_dim", std::to_string(c.encoder.hidden_dim));
    kv("encoder.epochs", std::to_string(c.encoder.epochs));
    kv("encoder.learning_rate", format_double(c.encoder.learning_rate));
    kv("encoder.weight_decay", format_double(c.encoder.weight_decay));
    kv("encoder.multi_label", c.encoder.multi_label ? "true" : "false");
    kv("encoder.threshold", format_double(c.encoder.threshold));
    if (!c.synth.type_counts.empty()) {
        std::ostringstream counts;
        for (std::size_t i = 0; i < c.synth.type_counts.size(); ++i)
            counts << (i ? "," : "") << c.synth.type_counts[i];
        kv("synth.type_counts", counts.str());
        std::ostringstream rels;
        for (std::size_t i = 0; i < c.synth.relations.size(); ++i)
            rels << (i ? ";" : "") << c.synth.relations[i].src_type << '-'
                 << c.synth.relations[i].dst_type << ':'
                 << c.synth.relations[i].edge_count;
        if (!c.synth.relations.empty()) kv("synth.relations", rels.str());
        kv("synth.num_classes", std::to_string(c.synth.num_classes));
        kv("synth.homophily", format_double(c.synth.homophily));
        kv("synth.feature_dim", std::to_string(c.synth.feature_dim));
        kv("synth.feature_noise", format_double(c.synth.feature_noise));
        kv("synth.label_rate", format_double(c.synth.label_rate));
        kv("synth.target_type", std::to_string(c.synth.target_type));
        kv("synth.skew_labels", c.synth.skew_labels ? "true" : "false");
        kv("synth.skew_strength", format_double(c.synth.skew_strength));
    }
    kv("experiment.bucket_count", std::to_string(c.bucket_count));
    kv("experiment.projection", c.projection);
    kv("experiment.label_rate", format_double(c.label_rate));
    {
        std::ostringstream seeds;
        for (std::size_t i = 0; i < c.seeds.size(); ++i)
            seeds << (i ? "," : "") << c.seeds[i];
        kv("experiment.seeds", seeds.str());
    }
    return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = emit_config(config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

} // namespace htad
