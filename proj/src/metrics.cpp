#include "syncnet/metrics.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"
#include "syncnet/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <thread>

namespace syncnet::metrics {

using graph::NodeId;

namespace {

constexpr std::size_t kBrandesBlock = 32;

// Single-source dependency accumulation (Brandes 2001), added into `acc`.
class BrandesWorker {
public:
    explicit BrandesWorker(const Graph& g)
        : g_(g), sigma_(g.num_nodes()), dist_(g.num_nodes()), delta_(g.num_nodes()), preds_(g.num_nodes()) {}

    void accumulate(NodeId s, NodeValues& acc) {
        const std::size_t n = g_.num_nodes();
        std::fill(sigma_.begin(), sigma_.end(), 0.0);
        std::fill(dist_.begin(), dist_.end(), -1);
        std::fill(delta_.begin(), delta_.end(), 0.0);
        for (auto& p : preds_) p.clear();
        order_.clear();

        sigma_[s] = 1.0;
        dist_[s] = 0;
        std::size_t head = 0;
        order_.push_back(s);
        while (head < order_.size()) {
            const NodeId v = order_[head++];
            for (const auto& nb : g_.neighbors(v)) {
                const NodeId w = nb.node;
                if (dist_[w] < 0) {
                    dist_[w] = dist_[v] + 1;
                    order_.push_back(w);
                }
                if (dist_[w] == dist_[v] + 1) {
                    sigma_[w] += sigma_[v];
                    preds_[w].push_back(v);
                }
            }
        }
        for (std::size_t i = order_.size(); i-- > 0;) {
            const NodeId w = order_[i];
            for (NodeId v : preds_[w]) delta_[v] += sigma_[v] / sigma_[w] * (1.0 + delta_[w]);
            if (w != s) acc[w] += delta_[w];
        }
        (void)n;
    }

private:
    const Graph& g_;
    std::vector<double> sigma_;
    std::vector<long> dist_;
    std::vector<double> delta_;
    std::vector<std::vector<NodeId>> preds_;
    std::vector<NodeId> order_;
};

// Aggregated graph used inside Louvain. self_loop[i] holds the sum of A_ii,
// where an internal edge counts twice.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
    std::vector<double> self_loop;
    std::vector<double> strength;
    double total = 0.0; // 2m
};

LevelGraph level_from(const Graph& g) {
    LevelGraph lg;
    const std::size_t n = g.num_nodes();
    lg.adj.resize(n);
    lg.self_loop.assign(n, 0.0);
    lg.strength.assign(n, 0.0);
    for (const auto& e : g.edges()) {
        lg.adj[e.u].emplace_back(e.v, 1.0);
        lg.adj[e.v].emplace_back(e.u, 1.0);
        lg.strength[e.u] += 1.0;
        lg.strength[e.v] += 1.0;
    }
    lg.total = 2.0 * static_cast<double>(g.num_edges());
    return lg;
}

// One round of local moving. Returns true if any node changed community.
bool local_moving(const LevelGraph& lg, std::vector<std::uint32_t>& community, rng::Engine& eng) {
    const std::size_t n = lg.adj.size();
    std::vector<double> tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) tot[community[i]] += lg.strength[i];

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    rng::shuffle(std::span<std::uint32_t>(order), eng);

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::uint32_t i : order) {
            const std::uint32_t own = community[i];
            const double k_i = lg.strength[i];
            touched.clear();
            for (const auto& [j, w] : lg.adj[i]) {
                const std::uint32_t c = community[j];
                if (link[c] == 0.0) touched.push_back(c);
                link[c] += w;
            }
            tot[own] -= k_i;
            double best_gain = link[own] - tot[own] * k_i / lg.total;
            std::uint32_t best = own;
            for (std::uint32_t c : touched) {
                const double gain = link[c] - tot[c] * k_i / lg.total;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            tot[best] += k_i;
            for (std::uint32_t c : touched) link[c] = 0.0;
            if (best != own) {
                community[i] = best;
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

// Renumbers labels densely by first appearance; returns the label count.
std::size_t renumber(std::vector<std::uint32_t>& labels) {
    std::vector<std::uint32_t> remap(labels.size() + 1, UINT32_MAX);
    std::uint32_t next = 0;
    for (auto& l : labels) {
        if (remap[l] == UINT32_MAX) remap[l] = next++;
        l = remap[l];
    }
    return next;
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<std::uint32_t>& community, std::size_t count) {
    LevelGraph out;
    out.adj.resize(count);
    out.self_loop.assign(count, 0.0);
    out.strength.assign(count, 0.0);
    out.total = lg.total;
    std::vector<std::map<std::uint32_t, double>> links(count);
    for (std::size_t i = 0; i < lg.adj.size(); ++i) {
        const auto ci = community[i];
        out.self_loop[ci] += lg.self_loop[i];
        out.strength[ci] += lg.strength[i];
        for (const auto& [j, w] : lg.adj[i]) {
            const auto cj = community[j];
            if (ci == cj) {
                out.self_loop[ci] += w;
            } else {
                links[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < count; ++c)
        for (const auto& [d, w] : links[c]) out.adj[c].emplace_back(d, w);
    return out;
}

// Strongly connected components (iterative Tarjan). Returns the component
// label per node and the number of components.
std::pair<std::vector<std::uint32_t>, std::size_t> strong_components(const std::vector<std::vector<NodeId>>& out) {
    const std::size_t n = out.size();
    constexpr std::uint32_t unvisited = UINT32_MAX;
    std::vector<std::uint32_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<NodeId> stack;
    std::vector<std::pair<NodeId, std::size_t>> call;
    std::uint32_t counter = 0;
    std::uint32_t ncomp = 0;
    for (NodeId root = 0; root < n; ++root) {
        if (index[root] != unvisited) continue;
        call.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [v, next] = call.back();
            if (next < out[v].size()) {
                const NodeId w = out[v][next++];
                if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const NodeId done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                } while (w != done);
                ++ncomp;
            }
        }
    }
    return {comp, ncomp};
}

std::vector<std::size_t> triangles_per_node(const Graph& g) {
    std::vector<std::size_t> tri(g.num_nodes(), 0);
    for (const auto& e : g.edges()) {
        const auto a = g.neighbors(e.u);
        const auto b = g.neighbors(e.v);
        // count each triangle once via its largest vertex w > v > u
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (ia->node < ib->node) {
                ++ia;
            } else if (ib->node < ia->node) {
                ++ib;
            } else {
                if (ia->node > e.v) {
                    ++tri[e.u];
                    ++tri[e.v];
                    ++tri[ia->node];
                }
                ++ia;
                ++ib;
            }
        }
    }
    return tri;
}

} // namespace

NodeValues degree_centrality(const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n < 2) throw UndefinedNetwork("degree centrality needs at least two nodes");
    NodeValues out(n);
    for (NodeId v = 0; v < n; ++v) out[v] = static_cast<double>(g.degree(v)) / static_cast<double>(n - 1);
    return out;
}

NodeValues betweenness_centrality(const Graph& g, unsigned workers) {
    const std::size_t n = g.num_nodes();
    NodeValues result(n, 0.0);
    if (n < 3) return result;

    const std::size_t num_blocks = (n + kBrandesBlock - 1) / kBrandesBlock;
    std::vector<NodeValues> partial(num_blocks, NodeValues(n, 0.0));
    std::atomic<std::size_t> next_block{0};
    auto run = [&] {
        BrandesWorker worker(g);
        for (std::size_t b; (b = next_block.fetch_add(1)) < num_blocks;) {
            const std::size_t hi = std::min(n, (b + 1) * kBrandesBlock);
            for (std::size_t s = b * kBrandesBlock; s < hi; ++s) worker.accumulate(static_cast<NodeId>(s), partial[b]);
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(num_blocks)));
    if (n_threads == 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < n_threads; ++t) threads.emplace_back(run);
        for (auto& t : threads) t.join();
    }
    for (const auto& p : partial)
        for (std::size_t v = 0; v < n; ++v) result[v] += p[v];

    // each unordered pair was seen from both endpoints
    const double scale = 0.5 / (static_cast<double>(n - 1) * static_cast<double>(n - 2) / 2.0);
    for (auto& v : result) v *= scale;
    return result;
}

EigenvectorResult eigenvector_centrality(const Graph& g, double tol, int max_iter) {
    const std::size_t n = g.num_nodes();
    if (g.num_edges() == 0) throw UndefinedNetwork("eigenvector centrality needs at least one edge");
    NodeValues x(n, 1.0), y(n);
    auto multiply = [&](const NodeValues& in, NodeValues& out, bool shifted) {
        for (NodeId v = 0; v < n; ++v) {
            double s = shifted ? in[v] : 0.0;
            for (const auto& nb : g.neighbors(v)) s += nb.weight * in[nb.node];
            out[v] = s;
        }
    };
    for (int it = 1; it <= max_iter; ++it) {
        multiply(x, y, true);
        const double top = *std::max_element(y.begin(), y.end());
        double diff = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            y[v] /= top;
            diff = std::max(diff, std::abs(y[v] - x[v]));
        }
        std::swap(x, y);
        if (diff < tol) {
            EigenvectorResult r;
            multiply(x, y, false);
            double num = 0.0, den = 0.0;
            for (NodeId v = 0; v < n; ++v) {
                num += x[v] * y[v];
                den += x[v] * x[v];
            }
            r.eigenvalue = num / den;
            r.values = std::move(x);
            r.iterations = it;
            return r;
        }
    }
    throw ConvergenceError("eigenvector centrality did not converge in " + std::to_string(max_iter) + " iterations",
                           std::move(x));
}

double newman_modularity(const Graph& g, const Partition& partition) {
    if (partition.size() != g.num_nodes()) throw std::invalid_argument("partition does not cover every node");
    const double m = static_cast<double>(g.num_edges());
    if (m == 0.0) return 0.0;
    std::map<std::uint32_t, std::pair<double, double>> per; // inside edges, endpoint count
    for (NodeId v = 0; v < g.num_nodes(); ++v) per[partition[v]].second += static_cast<double>(g.degree(v));
    for (const auto& e : g.edges())
        if (partition[e.u] == partition[e.v]) per[partition[e.u]].first += 1.0;
    double q = 0.0;
    for (const auto& [c, v] : per) {
        const double a = v.second / (2.0 * m);
        q += v.first / m - a * a;
    }
    return q;
}

LouvainResult louvain_partition(const Graph& g, std::uint64_t seed) {
    const std::size_t n = g.num_nodes();
    LouvainResult r;
    r.partition.resize(n);
    std::iota(r.partition.begin(), r.partition.end(), 0u);
    if (g.num_edges() == 0) {
        r.num_communities = n;
        return r;
    }
    rng::Engine eng(seed);
    LevelGraph lg = level_from(g);
    while (true) {
        std::vector<std::uint32_t> community(lg.adj.size());
        std::iota(community.begin(), community.end(), 0u);
        if (!local_moving(lg, community, eng)) break;
        const std::size_t count = renumber(community);
        for (auto& c : r.partition) c = community[c];
        if (count == lg.adj.size()) break;
        lg = aggregate(lg, community, count);
    }
    r.num_communities = renumber(r.partition);
    r.modularity = newman_modularity(g, r.partition);
    return r;
}

std::string_view to_string(HierarchyOrientation o) {
    return o == HierarchyOrientation::csi_order ? "csi_order" : "symmetric";
}

std::optional<HierarchyOrientation> parse_hierarchy_orientation(std::string_view s) {
    if (s == "csi_order") return HierarchyOrientation::csi_order;
    if (s == "symmetric") return HierarchyOrientation::symmetric;
    return std::nullopt;
}

double krackhardt_hierarchy(const Graph& g, HierarchyOrientation orientation) {
    const std::size_t n = g.num_nodes();
    std::vector<std::vector<NodeId>> out(n);
    for (const auto& e : g.edges()) {
        if (orientation == HierarchyOrientation::symmetric) {
            out[e.u].push_back(e.v);
            out[e.v].push_back(e.u);
            continue;
        }
        const double su = g.csi_user(e.u).value_or(0.0);
        const double sv = g.csi_user(e.v).value_or(0.0);
        // e.u < e.v, so on a tie the arc points to the larger id e.v
        if (su <= sv) {
            out[e.u].push_back(e.v);
        } else {
            out[e.v].push_back(e.u);
        }
    }

    const auto [comp, ncomp] = strong_components(out);
    std::vector<double> size(ncomp, 0.0);
    for (NodeId v = 0; v < n; ++v) size[comp[v]] += 1.0;
    double mutual = 0.0;
    for (double s : size) mutual += s * (s - 1.0) / 2.0;
    if (mutual == 0.0) return 1.0;

    // Ordered reachable pairs, counted on the condensation.
    std::vector<std::set<std::uint32_t>> dag(ncomp);
    for (NodeId v = 0; v < n; ++v)
        for (NodeId w : out[v])
            if (comp[v] != comp[w]) dag[comp[v]].insert(comp[w]);
    double ordered = 0.0;
    std::vector<std::uint32_t> seen(ncomp, UINT32_MAX);
    std::vector<std::uint32_t> stack;
    for (std::uint32_t c = 0; c < ncomp; ++c) {
        ordered += size[c] * (size[c] - 1.0);
        if (dag[c].empty()) continue;
        double reach = 0.0;
        stack.assign(dag[c].begin(), dag[c].end());
        for (auto d : stack) seen[d] = c;
        while (!stack.empty()) {
            const auto d = stack.back();
            stack.pop_back();
            reach += size[d];
            for (auto e : dag[d]) {
                if (seen[e] != c) {
                    seen[e] = c;
                    stack.push_back(e);
                }
            }
        }
        ordered += size[c] * reach;
    }
    const double reachable_unordered = ordered - mutual;
    return 1.0 - mutual / reachable_unordered;
}

std::size_t connected_triples(const Graph& g) {
    std::size_t triples = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const std::size_t d = g.degree(v);
        triples += d * (d - (d > 0 ? 1 : 0)) / 2;
    }
    return triples;
}

double transitivity(const Graph& g) {
    const std::size_t triples = connected_triples(g);
    if (triples == 0) return 0.0;
    const auto tri = triangles_per_node(g);
    // each triangle closes three triples, one at each vertex
    const std::size_t closed = std::accumulate(tri.begin(), tri.end(), std::size_t{0});
    return static_cast<double>(closed) / static_cast<double>(triples);
}

double avg_local_clustering(const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n == 0) return 0.0;
    const auto tri = triangles_per_node(g);
    double sum = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        const double d = static_cast<double>(g.degree(v));
        if (d >= 2.0) sum += static_cast<double>(tri[v]) / (d * (d - 1.0) / 2.0);
    }
    return sum / static_cast<double>(n);
}

double density(const Graph& g) {
    const double n = static_cast<double>(g.num_nodes());
    if (g.num_nodes() < 2) throw UndefinedNetwork("density needs at least two nodes");
    return 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

CentralityReport compute_centralities(const Graph& g, unsigned workers, int eigen_max_iter) {
    CentralityReport r;
    const std::size_t n = g.num_nodes();
    r.total_degree = n >= 2 ? degree_centrality(g) : NodeValues(n, 0.0);
    r.betweenness = betweenness_centrality(g, workers);
    if (g.num_edges() == 0) {
        r.eigenvector.assign(n, 0.0);
    } else {
        try {
            r.eigenvector = eigenvector_centrality(g, 1e-9, eigen_max_iter).values;
        } catch (const ConvergenceError& e) {
            r.eigenvector = e.last_iterate;
            r.eigenvector_converged = false;
        }
    }
    return r;
}

StructureReport compute_structure(const Graph& g, std::uint64_t seed, HierarchyOrientation orientation) {
    StructureReport s;
    s.nodes = g.num_nodes();
    s.edges = g.num_edges();
    if (g.num_nodes() >= 2) {
        s.density = density(g);
    } else {
        s.warnings.push_back("density undefined for fewer than two nodes; reported as 0");
    }
    if (g.num_edges() == 0) s.warnings.push_back("graph has no edges; modularity reported as 0");
    const auto louvain = louvain_partition(g, seed);
    s.modularity = louvain.modularity;
    s.communities = louvain.num_communities;
    s.hierarchy_orientation = orientation;
    s.hierarchy = krackhardt_hierarchy(g, orientation);
    if (connected_triples(g) == 0) s.warnings.push_back("graph has no connected triples; transitivity reported as 0");
    s.transitivity = transitivity(g);
    s.avg_local_clustering = avg_local_clustering(g);
    return s;
}

CentralityByLevel centrality_by_action_type_count(const Graph& allcomm, const std::map<UserId, int>& participation,
                                                  const CentralityReport& c) {
    CentralityByLevel out;
    std::array<std::vector<const LevelRow*>, 3> members;
    out.rows.reserve(participation.size());
    for (const auto& [user, level] : participation) {
        const auto node = allcomm.find(user);
        if (!node || level < 1 || level > 3) {
            ++out.excluded;
            continue;
        }
        out.rows.push_back(LevelRow{user, level, c.total_degree[*node], c.betweenness[*node], c.eigenvector[*node]});
    }
    for (const auto& row : out.rows) members[static_cast<std::size_t>(row.num_action_types - 1)].push_back(&row);
    for (std::size_t l = 0; l < 3; ++l) {
        if (members[l].empty()) continue;
        LevelStats st;
        st.users = members[l].size();
        const double cnt = static_cast<double>(st.users);
        for (std::size_t m = 0; m < 3; ++m) {
            auto value = [m](const LevelRow* r) {
                return m == 0 ? r->total_degree : (m == 1 ? r->betweenness : r->eigenvector);
            };
            double sum = 0.0;
            for (auto* r : members[l]) sum += value(r);
            const double mean = sum / cnt;
            double ss = 0.0;
            for (auto* r : members[l]) ss += (value(r) - mean) * (value(r) - mean);
            st.mean[m] = mean;
            st.sd[m] = std::sqrt(ss / cnt);
        }
        out.levels[l] = st;
    }
    return out;
}

CentralityByLevel centrality_by_action_type_count(const Graph& allcomm, const std::map<UserId, int>& participation) {
    return centrality_by_action_type_count(allcomm, participation, compute_centralities(allcomm));
}

void write_centrality_csv(const Graph& g, const CentralityReport& c, std::ostream& out) {
    csv::write_row(out, {"user_id", "total_degree", "betweenness", "eigenvector"});
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        csv::write_row(out, {g.name(v), csv::format_double(c.total_degree[v]), csv::format_double(c.betweenness[v]),
                             csv::format_double(c.eigenvector[v])});
    }
}

void write_metrics_json(const StructureReport& s, std::ostream& out) {
    nlohmann::ordered_json j;
    j["density"] = s.density;
    j["modularity"] = s.modularity;
    j["partition_method"] = s.partition_method;
    j["communities"] = s.communities;
    j["hierarchy"] = s.hierarchy;
    j["hierarchy_orientation"] = to_string(s.hierarchy_orientation);
    j["transitivity"] = s.transitivity;
    j["avg_local_clustering"] = s.avg_local_clustering;
    j["nodes"] = s.nodes;
    j["edges"] = s.edges;
    j["warnings"] = s.warnings;
    out << j.dump(2) << '\n';
}

} // namespace syncnet::metrics
