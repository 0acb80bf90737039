#pragma once

#include "syncnet/graph.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace syncnet::metrics {

using graph::Graph;

// Per-node values are indexed by graph::NodeId.
using NodeValues = std::vector<double>;

// Unweighted degree / (n - 1). Throws UndefinedNetwork when n < 2.
NodeValues degree_centrality(const Graph& g);

// Brandes on unweighted shortest paths, normalized by (n-1)(n-2)/2; all zeros
// when n < 3. Sources are processed in fixed-size blocks and the block sums
// are reduced in order, so the result is bit-identical for any worker count.
NodeValues betweenness_centrality(const Graph& g, unsigned workers = 1);

struct EigenvectorResult {
    NodeValues values;   // max component = 1
    double eigenvalue = 0.0; // Rayleigh quotient of the weighted adjacency
    int iterations = 0;
};

// Power iteration on the weighted adjacency, shifted by the identity so that
// bipartite graphs converge. Starts from the all-ones vector and stops when
// successive max-normalized iterates differ by less than `tol` in max norm.
// Throws UndefinedNetwork on an edgeless graph and ConvergenceError (holding
// the last iterate) after `max_iter` iterations.
EigenvectorResult eigenvector_centrality(const Graph& g, double tol = 1e-9, int max_iter = 1000);

// Community label per node.
using Partition = std::vector<std::uint32_t>;

// Unweighted Newman modularity: sum over communities of
// (fraction of edges inside) - (fraction of edge endpoints in it)^2.
// Zero for an edgeless graph.
double newman_modularity(const Graph& g, const Partition& partition);

struct LouvainResult {
    Partition partition; // labels numbered by first appearance in node order
    std::size_t num_communities = 0;
    double modularity = 0.0;
};

// Greedy multi-level modularity optimization on the unweighted graph. The
// node visiting order at every level is a permutation drawn from `seed`.
LouvainResult louvain_partition(const Graph& g, std::uint64_t seed = 0);

enum class HierarchyOrientation {
    csi_order, // each edge points from the lower CSI-User endpoint to the higher
    symmetric  // each edge becomes two arcs
};

std::string_view to_string(HierarchyOrientation o);
std::optional<HierarchyOrientation> parse_hierarchy_orientation(std::string_view s);

// 1 - (mutually reachable pairs) / (pairs reachable in at least one
// direction) on the oriented digraph; 1 when nothing is reachable. csi_order
// reads the csi_user node attribute (missing = 0); ties point toward the
// lexicographically larger user id.
double krackhardt_hierarchy(const Graph& g, HierarchyOrientation orientation = HierarchyOrientation::csi_order);

// 3 * triangles / connected triples; 0 when there are no triples.
double transitivity(const Graph& g);
// Mean local clustering; nodes of degree < 2 count as 0. 0 on an empty graph.
double avg_local_clustering(const Graph& g);
std::size_t connected_triples(const Graph& g);

// 2|E| / (n(n-1)). Throws UndefinedNetwork when n < 2.
double density(const Graph& g);

struct CentralityReport {
    NodeValues total_degree;
    NodeValues betweenness;
    NodeValues eigenvector;
    bool eigenvector_converged = true;
};

// Degree is zero for n < 2 and eigenvector is zero on an edgeless graph. A
// non-converged eigenvector keeps the last iterate and clears the flag.
CentralityReport compute_centralities(const Graph& g, unsigned workers = 1, int eigen_max_iter = 1000);

struct StructureReport {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double density = 0.0;
    double modularity = 0.0;
    std::string partition_method = "louvain";
    std::size_t communities = 0;
    double hierarchy = 1.0;
    HierarchyOrientation hierarchy_orientation = HierarchyOrientation::csi_order;
    double transitivity = 0.0;
    double avg_local_clustering = 0.0;
    std::vector<std::string> warnings;
};

StructureReport compute_structure(const Graph& g, std::uint64_t seed = 0,
                                  HierarchyOrientation orientation = HierarchyOrientation::csi_order);

struct LevelStats {
    std::size_t users = 0;
    std::array<double, 3> mean{}; // total_degree, betweenness, eigenvector
    std::array<double, 3> sd{};   // population standard deviation
};

struct LevelRow {
    UserId user;
    int num_action_types = 0;
    double total_degree = 0.0;
    double betweenness = 0.0;
    double eigenvector = 0.0;
};

struct CentralityByLevel {
    std::vector<LevelRow> rows; // ordered by user id
    std::array<std::optional<LevelStats>, 3> levels{}; // index 0 = one action type
    std::size_t excluded = 0; // users missing from the interaction graph
};

// Centralities on the all-communication graph, grouped by how many action
// types each synchronizing user synchronizes in.
CentralityByLevel centrality_by_action_type_count(const Graph& allcomm, const std::map<UserId, int>& participation,
                                                  const CentralityReport& centralities);
CentralityByLevel centrality_by_action_type_count(const Graph& allcomm, const std::map<UserId, int>& participation);

// user_id,total_degree,betweenness,eigenvector
void write_centrality_csv(const Graph& g, const CentralityReport& c, std::ostream& out);

// {density, modularity, partition_method, hierarchy, hierarchy_orientation,
//  transitivity, avg_local_clustering}
void write_metrics_json(const StructureReport& s, std::ostream& out);

} // namespace syncnet::metrics
