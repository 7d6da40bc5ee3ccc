#include "htad/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace htad {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, '\t')) out.push_back(cur);
    return out;
}

[[noreturn]] void fail_line(const std::string& path, std::size_t lineno,
                            const std::string& msg) {
    throw GraphError(path + ":" + std::to_string(lineno) + ": " + msg);
}

} // namespace

HeteroGraph::HeteroGraph(std::vector<NodeType> types,
                         std::vector<Relation> relations,
                         std::vector<Edge> edges,
                         std::map<int, Eigen::MatrixXd> features,
                         bool undirected)
    : types_(std::move(types)),
      relations_(std::move(relations)),
      edges_(std::move(edges)),
      features_(std::move(features)),
      undirected_(undirected) {
    offsets_.resize(types_.size() + 1, 0);
    for (std::size_t t = 0; t < types_.size(); ++t) {
        if (types_[t].id != static_cast<int>(t))
            throw GraphError("node type ids must be dense 0..|T|-1");
        if (types_[t].count < 1)
            throw GraphError("node type '" + types_[t].name + "' has count < 1");
        offsets_[t + 1] = offsets_[t] + types_[t].count;
    }
    num_nodes_ = offsets_.back();

    for (std::size_t r = 0; r < relations_.size(); ++r) {
        const Relation& rel = relations_[r];
        if (rel.id != static_cast<int>(r))
            throw GraphError("relation ids must be dense 0..-1");
        if (rel.src_type < 0 || rel.src_type >= static_cast<int>(types_.size()) ||
            rel.dst_type < 0 || rel.dst_type >= static_cast<int>(types_.size()))
            throw GraphError("relation '" + rel.name + "' references unknown type");
        for (std::size_t q = 0; q < r; ++q) {
            const Relation& other = relations_[q];
            const auto key = std::minmax(rel.src_type, rel.dst_type);
            if (std::minmax(other.src_type, other.dst_type) == key)
                throw GraphError("duplicate relation over type pair (" +
                                 types_[rel.src_type].name + ", " +
                                 types_[rel.dst_type].name + ")");
        }
    }

    for (const auto& [type_id, X] : features_) {
        if (type_id < 0 || type_id >= static_cast<int>(types_.size()))
            throw GraphError("features for unknown type id");
        const NodeType& t = types_[type_id];
        if (X.rows() != t.count || X.cols() != t.feature_dim)
            throw GraphError("feature matrix shape mismatch for type '" + t.name + "'");
    }

    degrees_.assign(num_nodes_, 0);
    edge_sets_.resize(relations_.size());
    std::vector<Index> counts(relations_.size(), 0);
    for (const Edge& e : edges_) {
        if (e.relation_id < 0 || e.relation_id >= static_cast<int>(relations_.size()))
            throw GraphError("edge references unknown relation id");
        const Relation& rel = relations_[e.relation_id];
        auto check_ref = [&](const NodeRef& ref) {
            if (ref.type_id < 0 || ref.type_id >= static_cast<int>(types_.size()) ||
                ref.local_index < 0 || ref.local_index >= types_[ref.type_id].count)
                throw GraphError("edge endpoint out of range");
        };
        check_ref(e.src);
        check_ref(e.dst);
        const bool forward =
            e.src.type_id == rel.src_type && e.dst.type_id == rel.dst_type;
        const bool backward =
            e.src.type_id == rel.dst_type && e.dst.type_id == rel.src_type;
        if (!forward && !backward)
            throw GraphError("edge endpoint types do not match relation '" +
                             rel.name + "'");
        const Index gu = global_index(e.src);
        const Index gv = global_index(e.dst);
        if (gu == gv) throw GraphError("self-loops are not allowed");
        edge_sets_[e.relation_id].emplace_back(std::min(gu, gv), std::max(gu, gv));
        degrees_[gu] += 1;
        degrees_[gv] += 1;
        counts[e.relation_id] += 1;
    }
    for (std::size_t r = 0; r < relations_.size(); ++r) {
        auto& set = edge_sets_[r];
        std::sort(set.begin(), set.end());
        if (std::adjacent_find(set.begin(), set.end()) != set.end())
            throw GraphError("duplicate edge in relation '" + relations_[r].name + "'");
        relations_[r].edge_count = counts[r];
    }
}

Index HeteroGraph::type_offset(int type_id) const {
    if (type_id < 0 || type_id >= static_cast<int>(types_.size()))
        throw GraphError("invalid type id " + std::to_string(type_id));
    return offsets_[type_id];
}

Index HeteroGraph::global_index(const NodeRef& ref) const {
    return type_offset(ref.type_id) + ref.local_index;
}

NodeRef HeteroGraph::node_ref(Index global) const {
    if (global < 0 || global >= num_nodes_)
        throw GraphError("global index out of range");
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global);
    const int type_id = static_cast<int>(it - offsets_.begin()) - 1;
    return NodeRef{type_id, global - offsets_[type_id]};
}

Index HeteroGraph::degree(const NodeRef& ref) const {
    return degrees_[global_index(ref)];
}

Eigen::VectorXd HeteroGraph::degrees() const {
    Eigen::VectorXd d(num_nodes_);
    for (Index i = 0; i < num_nodes_; ++i) d[i] = static_cast<double>(degrees_[i]);
    return d;
}

bool HeteroGraph::has_features(int type_id) const {
    return features_.count(type_id) > 0;
}

Eigen::MatrixXd HeteroGraph::features(int type_id) const {
    auto it = features_.find(type_id);
    if (it != features_.end()) return it->second;
    const NodeType& t = types_.at(type_id);
    return Eigen::MatrixXd::Identity(t.count, t.count);
}

SparseMatrix HeteroGraph::adjacency() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(edges_.size() * 2);
    for (const auto& set : edge_sets_) {
        for (const auto& [u, v] : set) {
            trip.emplace_back(u, v, 1.0);
            trip.emplace_back(v, u, 1.0);
        }
    }
    SparseMatrix A(num_nodes_, num_nodes_);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

SparseMatrix HeteroGraph::relation_adjacency(int relation_id) const {
    if (relation_id < 0 || relation_id >= static_cast<int>(relations_.size()))
        throw GraphError("invalid relation id");
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& [u, v] : edge_sets_[relation_id]) {
        trip.emplace_back(u, v, 1.0);
        trip.emplace_back(v, u, 1.0);
    }
    SparseMatrix A(num_nodes_, num_nodes_);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

bool HeteroGraph::has_edge(int relation_id, const NodeRef& a,
                           const NodeRef& b) const {
    const Index gu = global_index(a);
    const Index gv = global_index(b);
    const auto key = std::make_pair(std::min(gu, gv), std::max(gu, gv));
    const auto& set = edge_sets_.at(relation_id);
    return std::binary_search(set.begin(), set.end(), key);
}

LoadedGraph load_graph(const std::string& schema_path,
                       const std::string& edges_path,
                       const std::map<std::string, std::string>& features_paths,
                       const std::string& labels_path,
                       const std::string& target_type) {
    std::ifstream schema(schema_path);
    if (!schema) throw GraphError("cannot open schema file: " + schema_path);

    std::vector<NodeType> types;
    std::vector<Relation> relations;
    std::map<std::string, int> type_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(schema, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() == 3 && type_ids.count(fields[1]) == 0) {
            // type line: name  count  feature_dim
            char* end = nullptr;
            const long count = std::strtol(fields[1].c_str(), &end, 10);
            if (end == fields[1].c_str() || *end != '\0') {
                // fall through to relation parse
            } else {
                const long fdim = std::strtol(fields[2].c_str(), &end, 10);
                if (end == fields[2].c_str() || *end != '\0' || count < 1 || fdim < 0)
                    fail_line(schema_path, lineno, "malformed type line");
                if (type_ids.count(fields[0]))
                    fail_line(schema_path, lineno, "duplicate type '" + fields[0] + "'");
                const int id = static_cast<int>(types.size());
                type_ids[fields[0]] = id;
                types.push_back(NodeType{id, fields[0], count, fdim});
                continue;
            }
        }
        if (fields.size() != 3)
            fail_line(schema_path, lineno, "expected 3 tab-separated fields");
        // relation line: name  src_type  dst_type
        auto src = type_ids.find(fields[1]);
        auto dst = type_ids.find(fields[2]);
        if (src == type_ids.end() || dst == type_ids.end())
            fail_line(schema_path, lineno, "relation references unknown type");
        const int id = static_cast<int>(relations.size());
        relations.push_back(Relation{id, fields[0], src->second, dst->second, 0});
    }
    if (types.empty()) throw GraphError(schema_path + ": no node types declared");

    std::map<std::string, int> relation_ids;
    for (const Relation& r : relations) relation_ids[r.name] = r.id;

    std::ifstream edges_in(edges_path);
    if (!edges_in) throw GraphError("cannot open edge file: " + edges_path);
    std::vector<Edge> edges;
    lineno = 0;
    while (std::getline(edges_in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_tabs(line);
        if (fields.size() < 3)
            fail_line(edges_path, lineno, "expected rel_name\\tsrc\\tdst");
        auto rel = relation_ids.find(fields[0]);
        if (rel == relation_ids.end())
            fail_line(edges_path, lineno, "unknown relation '" + fields[0] + "'");
        const Relation& r = relations[rel->second];
        char* end = nullptr;
        const long src_local = std::strtol(fields[1].c_str(), &end, 10);
        if (end == fields[1].c_str() || *end != '\0')
            fail_line(edges_path, lineno, "malformed source index");
        const long dst_local = std::strtol(fields[2].c_str(), &end, 10);
        if (end == fields[2].c_str() || *end != '\0')
            fail_line(edges_path, lineno, "malformed destination index");
        if (src_local < 0 || src_local >= types[r.src_type].count)
            fail_line(edges_path, lineno, "source index out of range for type '" +
                                              types[r.src_type].name + "'");
        if (dst_local < 0 || dst_local >= types[r.dst_type].count)
            fail_line(edges_path, lineno, "destination index out of range for type '" +
                                              types[r.dst_type].name + "'");
        edges.push_back(Edge{r.id, NodeRef{r.src_type, src_local},
                             NodeRef{r.dst_type, dst_local}});
    }

    // deduplicate: each line is one undirected edge, reverse duplicates dropped
    {
        std::vector<Edge> unique;
        std::vector<std::vector<std::pair<long, long>>> seen(relations.size());
        for (const Edge& e : edges) {
            long a = e.src.type_id * (1L << 40) + e.src.local_index;
            long b = e.dst.type_id * (1L << 40) + e.dst.local_index;
            if (a > b) std::swap(a, b);
            seen[e.relation_id].emplace_back(a, b);
        }
        for (auto& s : seen) std::sort(s.begin(), s.end());
        std::vector<std::vector<std::pair<long, long>>> kept(relations.size());
        for (const Edge& e : edges) {
            long a = e.src.type_id * (1L << 40) + e.src.local_index;
            long b = e.dst.type_id * (1L << 40) + e.dst.local_index;
            if (a > b) std::swap(a, b);
            auto& k = kept[e.relation_id];
            if (!std::binary_search(k.begin(), k.end(), std::make_pair(a, b))) {
                k.emplace_back(a, b);
                std::sort(k.begin(), k.end());
                unique.push_back(e);
            }
        }
        edges = std::move(unique);
    }

    std::map<int, Eigen::MatrixXd> features;
    for (const auto& [type_name, path] : features_paths) {
        auto it = type_ids.find(type_name);
        if (it == type_ids.end())
            throw GraphError("features for unknown type '" + type_name + "'");
        const NodeType& t = types[it->second];
        std::ifstream fin(path);
        if (!fin) throw GraphError("cannot open features file: " + path);
        Eigen::MatrixXd X(t.count, t.feature_dim);
        lineno = 0;
        for (Index i = 0; i < t.count; ++i) {
            if (!std::getline(fin, line))
                fail_line(path, lineno + 1, "expected " + std::to_string(t.count) + " rows");
            ++lineno;
            std::istringstream ss(line);
            for (Index j = 0; j < t.feature_dim; ++j) {
                if (!(ss >> X(i, j)))
                    fail_line(path, lineno, "expected " +
                                                std::to_string(t.feature_dim) +
                                                " values per row");
            }
        }
        features[it->second] = std::move(X);
    }

    HeteroGraph graph(std::move(types), std::move(relations), std::move(edges),
                      std::move(features));

    std::optional<LabelAssignment> labels;
    if (!labels_path.empty()) {
        int target_id = 0;
        if (!target_type.empty()) {
            auto it = type_ids.find(target_type);
            if (it == type_ids.end())
                throw GraphError("unknown target type '" + target_type + "'");
            target_id = it->second;
        }
        const Index nt = graph.types()[target_id].count;

        std::ifstream lin(labels_path);
        if (!lin) throw GraphError("cannot open labels file: " + labels_path);
        std::vector<std::vector<long>> rows(nt);
        std::vector<bool> present(nt, false);
        long max_class = -1;
        lineno = 0;
        while (std::getline(lin, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto fields = split_tabs(line);
            if (fields.size() != 2)
                fail_line(labels_path, lineno, "expected local_index\\tclasses");
            char* end = nullptr;
            const long local = std::strtol(fields[0].c_str(), &end, 10);
            if (end == fields[0].c_str() || *end != '\0' || local < 0 || local >= nt)
                fail_line(labels_path, lineno, "label index out of range for target type");
            std::istringstream cs(fields[1]);
            std::string tok;
            std::vector<long> classes;
            while (std::getline(cs, tok, ',')) {
                const long c = std::strtol(tok.c_str(), &end, 10);
                if (end == tok.c_str() || *end != '\0' || c < 0)
                    fail_line(labels_path, lineno, "malformed class index");
                classes.push_back(c);
                max_class = std::max(max_class, c);
            }
            if (classes.empty())
                fail_line(labels_path, lineno, "empty class list");
            rows[local] = std::move(classes);
            present[local] = true;
        }

        LabelAssignment la;
        la.target_type = target_id;
        la.num_classes = max_class + 1;
        la.labels = Eigen::MatrixXd::Zero(nt, la.num_classes);
        la.labeled_mask = Eigen::VectorXd::Zero(graph.num_nodes());
        const Index offset = graph.type_offset(target_id);
        for (Index i = 0; i < nt; ++i) {
            if (!present[i]) continue;
            for (long c : rows[i]) la.labels(i, c) = 1.0;
            la.labeled_mask[offset + i] = 1.0;
        }
        labels = std::move(la);
    }

    return LoadedGraph{std::move(graph), std::move(labels)};
}

void save_graph(const HeteroGraph& graph, const std::string& schema_path,
                const std::string& edges_path) {
    std::ofstream schema(schema_path);
    if (!schema) throw GraphError("cannot write schema file: " + schema_path);
    for (const NodeType& t : graph.types())
        schema << t.name << '\t' << t.count << '\t' << t.feature_dim << '\n';
    for (const Relation& r : graph.relations())
        schema << r.name << '\t' << graph.types()[r.src_type].name << '\t'
               << graph.types()[r.dst_type].name << '\n';

    std::ofstream edges(edges_path);
    if (!edges) throw GraphError("cannot write edge file: " + edges_path);
    for (const Edge& e : graph.edges())
        edges << graph.relations()[e.relation_id].name << '\t' << e.src.local_index
              << '\t' << e.dst.local_index << '\n';
}

void save_labels(const LabelAssignment& labels, const HeteroGraph& graph,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write labels file: " + path);
    const Index offset = graph.type_offset(labels.target_type);
    for (Index i = 0; i < labels.labels.rows(); ++i) {
        if (labels.labeled_mask[offset + i] == 0.0) continue;
        out << i << '\t';
        bool first = true;
        for (Index c = 0; c < labels.num_classes; ++c) {
            if (labels.labels(i, c) != 0.0) {
                if (!first) out << ',';
                out << c;
                first = false;
            }
        }
        out << '\n';
    }
}

void save_features(const HeteroGraph& graph, int type_id, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write features file: " + path);
    const Eigen::MatrixXd X = graph.features(type_id);
    out.precision(17);
    for (Index i = 0; i < X.rows(); ++i) {
        for (Index j = 0; j < X.cols(); ++j) {
            if (j) out << ' ';
            out << X(i, j);
        }
        out << '\n';
    }
}

LabelAssignment subsample_labels(const LabelAssignment& labels,
                                 const HeteroGraph& graph, double rate,
                                 std::uint64_t seed) {
    if (!(rate > 0.0 && rate <= 1.0))
        throw GraphError("label rate must lie in (0, 1]");
    const Index offset = graph.type_offset(labels.target_type);
    std::vector<Index> labeled;
    for (Index i = 0; i < labels.labels.rows(); ++i)
        if (labels.labeled_mask[offset + i] != 0.0) labeled.push_back(i);
    if (labeled.empty()) throw GraphError("no labels to subsample");

    const Index keep = static_cast<Index>(
        std::ceil(rate * static_cast<double>(labeled.size())));
    Rng rng = Rng(seed).substream("subsample_labels");
    rng.shuffle(labeled);
    labeled.resize(keep);
    std::sort(labeled.begin(), labeled.end());

    LabelAssignment out;
    out.target_type = labels.target_type;
    out.num_classes = labels.num_classes;
    out.labels = Eigen::MatrixXd::Zero(labels.labels.rows(), labels.num_classes);
    out.labeled_mask = Eigen::VectorXd::Zero(graph.num_nodes());
    for (Index i : labeled) {
        out.labels.row(i) = labels.labels.row(i);
        out.labeled_mask[offset + i] = 1.0;
    }
    return out;
}

} // namespace htad
