#include "clbr/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clbr/errors.hpp"
#include "clbr/rng.hpp"

namespace clbr {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

long long parse_int(const std::string& text, const std::filesystem::path& path, int line_no) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected an integer, got '" +
                        text + "'");
    }
}

double parse_real(const std::string& text, const std::filesystem::path& path, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected a number, got '" +
                        text + "'");
    }
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

EdgeList read_edge_list(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    EdgeList edges;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto fields = split_tabs(text);
        if (fields.size() != 2) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected '<src>\\t<dst>', got '" + text + "'");
        }
        edges.push_back(Edge{static_cast<NodeId>(parse_int(fields[0], path, line_no)),
                             static_cast<NodeId>(parse_int(fields[1], path, line_no))});
    }
    return edges;
}

void write_edge_list(const std::filesystem::path& path, const EdgeList& edges) {
    std::ofstream out = open_out(path);
    for (Edge e : edges) out << e.src << '\t' << e.dst << '\n';
}

void write_embedding_tsv(const std::filesystem::path& path, const Matrix& values,
                         const NodeSpace& space) {
    if (values.rows() != space.total()) {
        throw DataError("embedding table rows do not match the node space");
    }
    std::ofstream out = open_out(path);
    auto write_block = [&](NodeType type, NodeId count, NodeId offset) {
        for (NodeId i = 0; i < count; ++i) {
            out << node_type_name(type) << '\t' << i;
            for (Eigen::Index c = 0; c < values.cols(); ++c) {
                out << '\t' << format_double(values(offset + i, c));
            }
            out << '\n';
        }
    };
    write_block(NodeType::User, space.num_users, 0);
    write_block(NodeType::Item, space.num_items, space.num_users);
    write_block(NodeType::Bundle, space.num_bundles, space.num_users + space.num_items);
}

Matrix read_embedding_tsv(const std::filesystem::path& path, const NodeSpace& space) {
    std::ifstream in = open_in(path);
    Matrix values;
    std::vector<bool> seen(static_cast<std::size_t>(space.total()), false);
    std::string line;
    int line_no = 0;
    int dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto fields = split_tabs(text);
        if (fields.size() < 3) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected '<type>\\t<id>\\t<d_0>...'");
        }
        const NodeType type = parse_node_type(fields[0]);
        const NodeId local = static_cast<NodeId>(parse_int(fields[1], path, line_no));
        if (local < 0 || local >= space.count(type)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + fields[0] +
                            " id " + fields[1] + " out of bounds");
        }
        const int row_dim = static_cast<int>(fields.size()) - 2;
        if (dim == -1) {
            dim = row_dim;
            values.resize(space.total(), dim);
        } else if (row_dim != dim) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": inconsistent embedding dimension");
        }
        const NodeId g = space.global_id(type, local);
        if (seen[g]) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate row for " +
                            fields[0] + " " + fields[1]);
        }
        seen[g] = true;
        for (int c = 0; c < dim; ++c) values(g, c) = parse_real(fields[c + 2], path, line_no);
    }
    if (dim == -1 || !std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw DataError(path.string() + ": embedding file does not cover every node");
    }
    return values;
}

void write_view_delta(const std::filesystem::path& path, const ViewDelta& delta,
                      std::uint64_t seed, const AugmentConfig& cfg) {
    std::ofstream out = open_out(path);
    out << "# clbr view delta\n";
    out << "# seed = " << seed << '\n';
    out << "# sampler = " << sampler_name(cfg.sampler) << '\n';
    out << "# r_ub = " << format_double(cfg.r_ub) << '\n';
    out << "# r_ui = " << format_double(cfg.r_ui) << '\n';
    out << "# r_bi = " << format_double(cfg.r_bi) << '\n';
    for (RelationKind kind : kAllRelations) {
        for (Edge e : delta.adds_for(kind)) {
            out << "+\t" << relation_name(kind) << '\t' << e.src << '\t' << e.dst << '\n';
        }
    }
    for (RelationKind kind : kAllRelations) {
        for (Edge e : delta.drops_for(kind)) {
            out << "-\t" << relation_name(kind) << '\t' << e.src << '\t' << e.dst << '\n';
        }
    }
}

ViewDelta read_view_delta(const std::filesystem::path& path, std::uint64_t* seed_out) {
    std::ifstream in = open_in(path);
    ViewDelta delta;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (text[0] == '#') {
            if (seed_out != nullptr) {
                std::istringstream header(text.substr(1));
                std::string key, eq;
                unsigned long long value = 0;
                if (header >> key >> eq >> value && key == "seed" && eq == "=") {
                    *seed_out = value;
                }
            }
            continue;
        }
        const auto fields = split_tabs(text);
        if (fields.size() != 4 || (fields[0] != "+" && fields[0] != "-")) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected '<+|->\\t<relation>\\t<src>\\t<dst>'");
        }
        const RelationKind kind = parse_relation(fields[1]);
        const Edge e{static_cast<NodeId>(parse_int(fields[2], path, line_no)),
                     static_cast<NodeId>(parse_int(fields[3], path, line_no))};
        if (fields[0] == "+") {
            delta.adds_for(kind).push_back(e);
        } else {
            delta.drops_for(kind).push_back(e);
        }
    }
    for (int t = 0; t < 3; ++t) {
        std::sort(delta.adds[t].begin(), delta.adds[t].end());
        std::sort(delta.drops[t].begin(), delta.drops[t].end());
    }
    return delta;
}

void write_train_log_csv(const std::filesystem::path& path, const std::vector<EpochLog>& history) {
    std::ofstream out = open_out(path);
    out << "epoch,view_index,l_task,l_u,l_b,total,lr\n";
    for (const EpochLog& log : history) {
        out << log.epoch << ',' << log.view_index << ',' << format_double(log.l_task) << ','
            << format_double(log.l_u) << ',' << format_double(log.l_b) << ','
            << format_double(log.total) << ',' << format_double(log.lr) << '\n';
    }
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
    std::ofstream out = open_out(path);
    out << "metric,k,value,n_users,seed\n";
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
        out << "recall," << report.ks[i] << ',' << format_double(report.recall_mean[i]) << ','
            << report.evaluated_users.size() << ',' << report.seed << '\n';
        out << "ndcg," << report.ks[i] << ',' << format_double(report.ndcg_mean[i]) << ','
            << report.evaluated_users.size() << ',' << report.seed << '\n';
    }
}

void write_metrics_summary(const std::filesystem::path& path, const MetricsReport& report) {
    KeyValueFile summary;
    summary.set("n_users", std::to_string(report.evaluated_users.size()));
    summary.set("seed", std::to_string(report.seed));
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
        summary.set("recall.at_" + std::to_string(report.ks[i]),
                    format_double(report.recall_mean[i]));
        summary.set("ndcg.at_" + std::to_string(report.ks[i]),
                    format_double(report.ndcg_mean[i]));
    }
    summary.save(path);
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    KeyValueFile kv;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) {
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + text + "'");
            }
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + text + "'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        }
        kv.entries_[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

void KeyValueFile::save(const std::filesystem::path& path) const {
    std::ofstream out = open_out(path);
    // Top-level keys first, then one block per section, everything sorted
    // so identical contents serialize identically.
    for (const auto& [key, value] : entries_) {
        if (key.find('.') == std::string::npos) out << key << " = " << value << '\n';
    }
    std::string current;
    for (const auto& [key, value] : entries_) {
        const auto dot = key.find('.');
        if (dot == std::string::npos) continue;
        const std::string section = key.substr(0, dot);
        if (section != current) {
            out << "\n[" << section << "]\n";
            current = section;
        }
        out << key.substr(dot + 1) << " = " << value << '\n';
    }
}

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "' for checksumming");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return out;
}

}  // namespace clbr
