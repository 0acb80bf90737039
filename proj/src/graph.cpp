#include "syncnet/graph.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace syncnet::graph {

std::optional<NodeId> Graph::find(const UserId& user) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), user);
    if (it == names_.end() || *it != user) return std::nullopt;
    return static_cast<NodeId>(it - names_.begin());
}

std::optional<double> Graph::edge_weight(NodeId a, NodeId b) const {
    const auto& adj = adjacency_[a];
    auto it = std::lower_bound(adj.begin(), adj.end(), b, [](const Neighbor& n, NodeId x) { return n.node < x; });
    if (it == adj.end() || it->node != b) return std::nullopt;
    return it->weight;
}

Graph Graph::with_classes(const std::map<UserId, UserClass>& classes) const {
    Graph g = *this;
    for (NodeId n = 0; n < g.num_nodes(); ++n) {
        auto it = classes.find(g.names_[n]);
        g.classes_[n] = it == classes.end() ? UserClass::unknown : it->second;
    }
    return g;
}

Graph Graph::with_csi_user(const csi::UserScores& scores) const {
    Graph g = *this;
    for (NodeId n = 0; n < g.num_nodes(); ++n) {
        auto it = scores.find(g.names_[n]);
        g.csi_[n] = it == scores.end() ? std::nullopt : std::optional<double>(it->second);
    }
    return g;
}

Graph Graph::induced(const std::vector<bool>& keep) const {
    GraphBuilder b;
    for (NodeId n = 0; n < num_nodes(); ++n) {
        if (!keep[n]) continue;
        b.add_node(names_[n]);
        b.set_class(names_[n], classes_[n]);
        if (csi_[n]) b.set_csi_user(names_[n], *csi_[n]);
    }
    for (const auto& e : edges_)
        if (keep[e.u] && keep[e.v]) b.add_edge(names_[e.u], names_[e.v], e.weight);
    return b.build();
}

void GraphBuilder::add_node(const UserId& user) { nodes_.insert(user); }

void GraphBuilder::add_edge(const UserId& a, const UserId& b, double weight) {
    if (a == b) return;
    nodes_.insert(a);
    nodes_.insert(b);
    edges_[UserPair::of(a, b)] += weight;
}

void GraphBuilder::set_class(const UserId& user, UserClass c) {
    nodes_.insert(user);
    classes_[user] = c;
}

void GraphBuilder::set_csi_user(const UserId& user, double v) {
    nodes_.insert(user);
    csi_[user] = v;
}

Graph GraphBuilder::build() const {
    Graph g;
    g.names_.assign(nodes_.begin(), nodes_.end());
    const std::size_t n = g.names_.size();
    g.adjacency_.resize(n);
    g.classes_.assign(n, UserClass::unknown);
    g.csi_.assign(n, std::nullopt);
    for (const auto& [user, c] : classes_) g.classes_[*g.find(user)] = c;
    for (const auto& [user, v] : csi_) g.csi_[*g.find(user)] = v;
    g.edges_.reserve(edges_.size());
    for (const auto& [pair, w] : edges_) {
        const NodeId u = *g.find(pair.first);
        const NodeId v = *g.find(pair.second);
        g.edges_.push_back(Edge{u, v, w});
        g.adjacency_[u].push_back(Neighbor{v, w});
        g.adjacency_[v].push_back(Neighbor{u, w});
    }
    for (auto& adj : g.adjacency_)
        std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    return g;
}

Graph build_sync_graph(const csi::PairScores& pair_scores) {
    GraphBuilder b;
    for (const auto& [pair, score] : pair_scores) {
        b.add_node(pair.first);
        b.add_node(pair.second);
        if (score > 0.0) b.add_edge(pair.first, pair.second, score);
    }
    return b.build();
}

Graph build_allcomm_graph(std::span<const ingest::InteractionRecord> interactions, const std::set<UserId>& extra_users) {
    GraphBuilder b;
    for (const auto& u : extra_users) b.add_node(u);
    for (const auto& r : interactions) {
        b.add_node(r.source_user);
        b.add_node(r.target_user);
        if (r.source_user != r.target_user) b.add_edge(r.source_user, r.target_user, 1.0);
    }
    return b.build();
}

Graph prune_by_partner_count(const Graph& g, std::size_t min_partners) {
    const std::size_t n = g.num_nodes();
    std::vector<std::size_t> degree(n);
    std::vector<bool> alive(n, true);
    std::vector<NodeId> queue;
    for (NodeId v = 0; v < n; ++v) {
        degree[v] = g.degree(v);
        if (degree[v] < min_partners) {
            alive[v] = false;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const NodeId v = queue.back();
        queue.pop_back();
        for (const auto& nb : g.neighbors(v)) {
            if (!alive[nb.node]) continue;
            if (--degree[nb.node] < min_partners) {
                alive[nb.node] = false;
                queue.push_back(nb.node);
            }
        }
    }
    return g.induced(alive);
}

Graph induced_subgraph(const Graph& g, UserClass cls) {
    std::vector<bool> keep(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) keep[v] = g.user_class(v) == cls;
    return g.induced(keep);
}

std::optional<ExportFormat> parse_export_format(std::string_view s) {
    if (s == "graphml") return ExportFormat::graphml;
    if (s == "dot") return ExportFormat::dot;
    if (s == "edge_csv" || s == "csv") return ExportFormat::edge_csv;
    return std::nullopt;
}

namespace {

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string xml_unescape(std::string_view s) {
    static const std::pair<std::string_view, char> entities[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        bool matched = false;
        if (s[i] == '&') {
            for (const auto& [ent, c] : entities) {
                if (s.substr(i, ent.size()) == ent) {
                    out.push_back(c);
                    i += ent.size();
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) out.push_back(s[i++]);
    }
    return out;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_graphml(const Graph& g, std::ostream& out) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
        << "  <key id=\"user_class\" for=\"node\" attr.name=\"user_class\" attr.type=\"string\"/>\n"
        << "  <key id=\"csi_user\" for=\"node\" attr.name=\"csi_user\" attr.type=\"double\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << "    <node id=\"" << xml_escape(g.name(v)) << "\"><data key=\"user_class\">"
            << to_string(g.user_class(v)) << "</data>";
        if (auto c = g.csi_user(v)) out << "<data key=\"csi_user\">" << csv::format_double(*c) << "</data>";
        out << "</node>\n";
    }
    for (const auto& e : g.edges()) {
        out << "    <edge source=\"" << xml_escape(g.name(e.u)) << "\" target=\"" << xml_escape(g.name(e.v))
            << "\"><data key=\"weight\">" << csv::format_double(e.weight) << "</data></edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void write_dot(const Graph& g, std::ostream& out) {
    out << "graph G {\n";
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << "  " << dot_quote(g.name(v)) << " [user_class=" << dot_quote(to_string(g.user_class(v)));
        if (auto c = g.csi_user(v)) out << ", csi_user=" << csv::format_double(*c);
        out << "];\n";
    }
    for (const auto& e : g.edges()) {
        out << "  " << dot_quote(g.name(e.u)) << " -- " << dot_quote(g.name(e.v))
            << " [weight=" << csv::format_double(e.weight) << "];\n";
    }
    out << "}\n";
}

void write_edge_csv(const Graph& g, std::ostream& out) {
    csv::write_row(out, {"user_u", "user_v", "weight"});
    for (const auto& e : g.edges()) csv::write_row(out, {g.name(e.u), g.name(e.v), csv::format_double(e.weight)});
}

struct Tag {
    std::string name;
    std::map<std::string, std::string> attrs;
    bool closing = false;
    bool self_closing = false;
};

// Tokenizer for the element subset write_graphml emits.
class XmlScanner {
public:
    XmlScanner(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

    std::optional<Tag> next_tag() {
        while (true) {
            const auto lt = text_.find('<', pos_);
            if (lt == std::string::npos) return std::nullopt;
            pos_ = lt + 1;
            if (text_.compare(pos_, 1, "?") == 0 || text_.compare(pos_, 1, "!") == 0) {
                const auto gt = text_.find('>', pos_);
                if (gt == std::string::npos) fail("unterminated declaration");
                pos_ = gt + 1;
                continue;
            }
            const auto gt = text_.find('>', pos_);
            if (gt == std::string::npos) fail("unterminated tag");
            std::string_view body(text_.data() + pos_, gt - pos_);
            pos_ = gt + 1;
            return parse_tag(body);
        }
    }

    std::string text_until(std::string_view closing) {
        const auto end = text_.find(closing, pos_);
        if (end == std::string::npos) fail("missing " + std::string(closing));
        std::string out = xml_unescape(std::string_view(text_).substr(pos_, end - pos_));
        pos_ = end + closing.size();
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_ + ": " + what); }

private:
    Tag parse_tag(std::string_view body) const {
        Tag t;
        if (!body.empty() && body.front() == '/') {
            t.closing = true;
            body.remove_prefix(1);
        }
        if (!body.empty() && body.back() == '/') {
            t.self_closing = true;
            body.remove_suffix(1);
        }
        std::size_t i = 0;
        while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
        t.name = std::string(body.substr(0, i));
        while (i < body.size()) {
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
            if (i >= body.size()) break;
            const auto eq = body.find('=', i);
            if (eq == std::string_view::npos || eq + 1 >= body.size()) fail("malformed attribute in <" + t.name + ">");
            const char quote = body[eq + 1];
            if (quote != '"' && quote != '\'') fail("unquoted attribute in <" + t.name + ">");
            const auto close = body.find(quote, eq + 2);
            if (close == std::string_view::npos) fail("unterminated attribute in <" + t.name + ">");
            std::string key(body.substr(i, eq - i));
            while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
            t.attrs[key] = xml_unescape(body.substr(eq + 2, close - eq - 2));
            i = close + 1;
        }
        return t;
    }

    std::string text_;
    std::string source_;
    std::size_t pos_ = 0;
};

} // namespace

void write_graph(const Graph& g, ExportFormat format, std::ostream& out) {
    switch (format) {
    case ExportFormat::graphml: write_graphml(g, out); break;
    case ExportFormat::dot: write_dot(g, out); break;
    case ExportFormat::edge_csv: write_edge_csv(g, out); break;
    }
}

void export_graph(const Graph& g, ExportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write graph file '" + path.string() + "'");
    write_graph(g, format, out);
    out.flush();
    if (!out) throw IoError("failed writing graph file '" + path.string() + "'");
}

Graph read_graphml(std::istream& in, const std::string& source) {
    XmlScanner scan(std::string(std::istreambuf_iterator<char>(in), {}), source);
    GraphBuilder b;
    enum class In { none, node, edge } state = In::none;
    std::string node_id, edge_source, edge_target;
    std::optional<double> edge_w;
    bool seen_graphml = false;

    auto number = [&](const std::string& text, const char* what) {
        auto v = csv::parse_double(text);
        if (!v) scan.fail(std::string("non-numeric ") + what + " '" + text + "'");
        return *v;
    };
    auto finish_edge = [&] {
        if (edge_source.empty() || edge_target.empty()) scan.fail("edge without source/target");
        b.add_edge(edge_source, edge_target, edge_w.value_or(1.0));
        state = In::none;
    };

    while (auto tag = scan.next_tag()) {
        if (tag->name == "graphml" && !tag->closing) seen_graphml = true;
        if (tag->name == "node" && !tag->closing) {
            node_id = tag->attrs["id"];
            if (node_id.empty()) scan.fail("node without id");
            b.add_node(node_id);
            state = tag->self_closing ? In::none : In::node;
        } else if (tag->name == "node" && tag->closing) {
            state = In::none;
        } else if (tag->name == "edge" && !tag->closing) {
            edge_source = tag->attrs["source"];
            edge_target = tag->attrs["target"];
            edge_w.reset();
            state = In::edge;
            if (tag->self_closing) finish_edge();
        } else if (tag->name == "edge" && tag->closing) {
            finish_edge();
        } else if (tag->name == "data" && !tag->closing && !tag->self_closing) {
            const std::string key = tag->attrs["key"];
            const std::string value = scan.text_until("</data>");
            if (state == In::node && key == "user_class") {
                auto c = parse_user_class(value);
                if (!c) scan.fail("unknown user_class '" + value + "'");
                b.set_class(node_id, *c);
            } else if (state == In::node && key == "csi_user") {
                b.set_csi_user(node_id, number(value, "csi_user"));
            } else if (state == In::edge && key == "weight") {
                edge_w = number(value, "weight");
            }
        }
    }
    if (!seen_graphml) scan.fail("not a GraphML document");
    return b.build();
}

Graph read_edge_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in, {"user_u", "user_v", "weight"}, source);
    GraphBuilder b;
    while (auto row = reader.next()) {
        const auto where = source + " line " + std::to_string(row->line_no);
        if (!row->ok) throw ParseError(where + ": wrong field count");
        const auto& u = reader.get(*row, "user_u");
        const auto& v = reader.get(*row, "user_v");
        const auto w = csv::parse_double(reader.get(*row, "weight"));
        if (u.empty() || v.empty()) throw ParseError(where + ": empty user id");
        if (!w) throw ParseError(where + ": weight is not a number");
        b.add_edge(u, v, *w);
    }
    return b.build();
}

Graph import_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open graph file '" + path.string() + "'");
    if (path.extension() == ".csv") return read_edge_csv(in, path.string());
    return read_graphml(in, path.string());
}

} // namespace syncnet::graph
