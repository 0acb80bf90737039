#pragma once

#include "syncnet/csi.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

namespace syncnet::graph {

using NodeId = std::uint32_t;

struct Neighbor {
    NodeId node;
    double weight;

    bool operator==(const Neighbor&) const = default;
};

// Edge endpoints satisfy u < v; since node ids follow the lexicographic order
// of user ids, edges() is sorted by (user_u, user_v).
struct Edge {
    NodeId u;
    NodeId v;
    double weight;

    bool operator==(const Edge&) const = default;
};

// Weighted undirected simple graph over user ids with optional per-node
// attributes. Immutable once built; use GraphBuilder to make one.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const { return names_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<UserId>& nodes() const { return names_; }
    const UserId& name(NodeId n) const { return names_[n]; }
    std::optional<NodeId> find(const UserId& user) const;

    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const Neighbor> neighbors(NodeId n) const { return adjacency_[n]; }
    std::size_t degree(NodeId n) const { return adjacency_[n].size(); }
    std::optional<double> edge_weight(NodeId a, NodeId b) const;

    UserClass user_class(NodeId n) const { return classes_[n]; }
    std::optional<double> csi_user(NodeId n) const { return csi_[n]; }

    // Attribute setters return a modified copy.
    Graph with_classes(const std::map<UserId, UserClass>& classes) const;
    Graph with_csi_user(const csi::UserScores& scores) const;

    // Subgraph over the nodes with keep[n] set; attributes are carried over.
    Graph induced(const std::vector<bool>& keep) const;

    bool operator==(const Graph&) const = default;

private:
    friend class GraphBuilder;

    std::vector<UserId> names_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::vector<Edge> edges_;
    std::vector<UserClass> classes_;
    std::vector<std::optional<double>> csi_;
};

class GraphBuilder {
public:
    void add_node(const UserId& user);
    // Self-loops are ignored. Repeated edges accumulate their weights.
    void add_edge(const UserId& a, const UserId& b, double weight);
    void set_class(const UserId& user, UserClass c);
    void set_csi_user(const UserId& user, double v);

    Graph build() const;

private:
    std::set<UserId> nodes_;
    std::map<UserPair, double> edges_;
    std::map<UserId, UserClass> classes_;
    std::map<UserId, double> csi_;
};

// One edge per pair, weighted by its CSI-UserPair. Pairs with a non-positive
// score (possible under the prose/literal formulas) contribute their
// endpoints but no edge.
Graph build_sync_graph(const csi::PairScores& pair_scores);

// Interaction counts between users, direction ignored. Self-interactions are
// dropped. `extra_users` (e.g. post authors) become nodes as well.
Graph build_allcomm_graph(std::span<const ingest::InteractionRecord> interactions,
                          const std::set<UserId>& extra_users = {});

// Iteratively removes nodes of degree < min_partners (the k-core).
Graph prune_by_partner_count(const Graph& g, std::size_t min_partners = 5);

// Nodes of one class plus the edges between them.
Graph induced_subgraph(const Graph& g, UserClass cls);

enum class ExportFormat { graphml, dot, edge_csv };

std::optional<ExportFormat> parse_export_format(std::string_view s);

void write_graph(const Graph& g, ExportFormat format, std::ostream& out);
// Throws IoError when the path cannot be written.
void export_graph(const Graph& g, ExportFormat format, const std::filesystem::path& path);

// Readers for the files written above (not general GraphML/CSV parsers).
Graph read_graphml(std::istream& in, const std::string& source = "graphml");
Graph read_edge_csv(std::istream& in, const std::string& source = "edge csv");
// Chooses the reader from the extension (.graphml or .csv).
Graph import_graph(const std::filesystem::path& path);

} // namespace syncnet::graph
