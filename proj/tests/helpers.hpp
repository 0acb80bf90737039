#pragma once

// Shared fixtures and hand-rolled generators for the test suites.

#include "syncnet/graph.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/synchrony.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace testutil {

using namespace syncnet;

// splitmix64; kept separate from the library RNG on purpose.
struct Gen {
    std::uint64_t state;
    explicit Gen(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // [lo, hi] inclusive
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
};

inline std::string user_name(std::int64_t i) {
    std::string s = "u";
    if (i < 10) s += '0';
    return s + std::to_string(i);
}

inline ingest::ActionRecord act(const std::string& user, Timestamp t, ActionType a, const std::string& artifact,
                                const std::string& post = "") {
    return ingest::ActionRecord{post.empty() ? user + "@" + std::to_string(t) : post, user, t, a, artifact};
}

// Up to `max_users` users, `max_records` records, `vocab` artifacts per type,
// timestamps within `span` seconds.
inline std::vector<ingest::ActionRecord> random_actions(Gen& g, int max_users, int max_records, int vocab,
                                                        std::int64_t span = 3000) {
    const int users = static_cast<int>(g.range(1, max_users));
    const int records = static_cast<int>(g.range(0, max_records));
    const int v = static_cast<int>(g.range(1, vocab));
    std::vector<ingest::ActionRecord> out;
    out.reserve(records);
    for (int i = 0; i < records; ++i) {
        const auto a = static_cast<ActionType>(g.range(0, 2));
        out.push_back(act(user_name(g.range(0, users - 1)), g.range(0, span), a, "x" + std::to_string(g.range(0, v - 1)),
                          "p" + std::to_string(i)));
    }
    return out;
}

inline graph::Graph complete_graph(int n) {
    graph::GraphBuilder b;
    for (int i = 0; i < n; ++i) b.add_node(user_name(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) b.add_edge(user_name(i), user_name(j), 1.0);
    return b.build();
}

inline graph::Graph path_graph(int n) {
    graph::GraphBuilder b;
    for (int i = 0; i < n; ++i) b.add_node(user_name(i));
    for (int i = 0; i + 1 < n; ++i) b.add_edge(user_name(i), user_name(i + 1), 1.0);
    return b.build();
}

// Node u00 is the center.
inline graph::Graph star_graph(int leaves) {
    graph::GraphBuilder b;
    b.add_node(user_name(0));
    for (int i = 1; i <= leaves; ++i) b.add_edge(user_name(0), user_name(i), 1.0);
    return b.build();
}

inline graph::Graph random_graph(Gen& g, int n, double p) {
    graph::GraphBuilder b;
    for (int i = 0; i < n; ++i) b.add_node(user_name(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (g.chance(p)) b.add_edge(user_name(i), user_name(j), 1.0 + static_cast<double>(g.range(0, 4)));
    return b.build();
}

// Betweenness from all-pairs distances (Floyd-Warshall) and shortest-path
// counts built up distance layer by layer.
inline std::vector<double> naive_betweenness(const graph::Graph& g) {
    const std::size_t n = g.num_nodes();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& e : g.edges()) d[e.u][e.v] = d[e.v][e.u] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
    for (std::size_t s = 0; s < n; ++s) {
        sigma[s][s] = 1;
        for (double layer = 1; layer <= static_cast<double>(n); ++layer)
            for (std::size_t t = 0; t < n; ++t) {
                if (d[s][t] != layer) continue;
                for (const auto& nb : g.neighbors(static_cast<graph::NodeId>(t)))
                    if (d[s][nb.node] == layer - 1) sigma[s][t] += sigma[s][nb.node];
            }
    }
    std::vector<double> bc(n, 0.0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = s + 1; t < n; ++t) {
            if (d[s][t] == inf) continue;
            for (std::size_t v = 0; v < n; ++v) {
                if (v == s || v == t) continue;
                if (d[s][v] + d[v][t] == d[s][t]) bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
            }
        }
    if (n >= 3)
        for (auto& x : bc) x /= static_cast<double>((n - 1) * (n - 2)) / 2.0;
    else
        std::fill(bc.begin(), bc.end(), 0.0);
    return bc;
}

inline std::size_t node(const graph::Graph& g, const std::string& name) { return *g.find(name); }

} // namespace testutil
