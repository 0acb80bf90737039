#include "syncnet/bots.hpp"
#include "syncnet/csi.hpp"
#include "syncnet/error.hpp"
#include "syncnet/graph.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/metrics.hpp"
#include "syncnet/pipeline.hpp"
#include "syncnet/simulate.hpp"
#include "syncnet/synchrony.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace syncnet;

namespace {

ActionType action_arg(const std::string& s) {
    auto a = parse_action_type(s);
    if (!a) throw py::value_error("unknown action type '" + s + "'");
    return *a;
}

csi::CsiConfig csi_arg(const std::string& formula, const std::string& normalization) {
    auto f = csi::parse_pair_formula(formula);
    auto n = csi::parse_normalization(normalization);
    if (!f) throw py::value_error("unknown pair formula '" + formula + "'");
    if (!n) throw py::value_error("unknown normalization '" + normalization + "'");
    return {*f, *n};
}

using PairKey = std::pair<std::string, std::string>;
using PyCounts = std::map<PairKey, std::map<std::string, std::uint32_t>>;

PyCounts counts_to_py(const synchrony::PairSyncCounts& counts) {
    PyCounts out;
    for (const auto& [pair, c] : counts.entries()) {
        auto& row = out[{pair.first, pair.second}];
        for (auto a : kAllActionTypes)
            if (c[index_of(a)] > 0) row[std::string(to_string(a))] = c[index_of(a)];
    }
    return out;
}

synchrony::PairSyncCounts counts_from_py(const PyCounts& in) {
    synchrony::PairSyncCounts out;
    for (const auto& [key, row] : in)
        for (const auto& [a, n] : row)
            if (n > 0) out.add(UserPair::of(key.first, key.second), action_arg(a), n);
    return out;
}

std::vector<ingest::ActionRecord> actions_from_py(
    const std::vector<std::tuple<std::string, Timestamp, std::string, std::string>>& rows) {
    std::vector<ingest::ActionRecord> out;
    out.reserve(rows.size());
    std::size_t i = 0;
    for (const auto& [user, t, type, artifact] : rows)
        out.push_back({"r" + std::to_string(i++), user, t, action_arg(type), artifact});
    return out;
}

graph::Graph graph_from_edges(const std::vector<std::tuple<std::string, std::string, double>>& edges,
                              const std::vector<std::string>& nodes) {
    graph::GraphBuilder b;
    for (const auto& n : nodes) b.add_node(n);
    for (const auto& [u, v, w] : edges) {
        b.add_node(u);
        b.add_node(v);
        b.add_edge(u, v, w);
    }
    return b.build();
}

} // namespace

PYBIND11_MODULE(_syncnet, m) {
    m.doc() = "Synchronized-action detection and the Combined Synchronization Index";

    auto base = py::register_exception<Error>(m, "SyncnetError", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<CorpusRejected>(m, "CorpusRejected", base.ptr());
    py::register_exception<InvalidRecord>(m, "InvalidRecord", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<UndefinedNetwork>(m, "UndefinedNetwork", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    m.def(
        "canonicalize_artifact",
        [](const std::string& action_type, const std::string& raw) {
            return ingest::canonicalize_artifact(action_arg(action_type), raw);
        },
        py::arg("action_type"), py::arg("raw"));

    m.def(
        "parse_events",
        [](const std::filesystem::path& path) {
            auto r = ingest::parse_events_file(path);
            std::ostringstream out;
            ingest::write_jsonl(r.dataset, out);
            py::dict stats;
            stats["records"] = r.stats.records;
            stats["posts"] = r.stats.posts;
            stats["interactions"] = r.stats.interactions;
            stats["malformed"] = r.stats.malformed;
            stats["errors"] = r.stats.errors;
            return py::make_tuple(out.str(), stats);
        },
        py::arg("path"), "Parse an event file; returns (canonical JSONL text, stats).");

    m.def(
        "detect",
        [](const std::vector<std::tuple<std::string, Timestamp, std::string, std::string>>& actions,
           std::int64_t window, unsigned workers) {
            synchrony::SyncWindowConfig cfg;
            cfg.window_seconds = window;
            return counts_to_py(synchrony::detect(actions_from_py(actions), cfg, workers));
        },
        py::arg("actions"), py::arg("window") = 300, py::arg("workers") = 1,
        "actions: (user, timestamp, action_type, artifact) tuples. Returns {(u, v): {action_type: count}}.");

    m.def(
        "brute_force_detect",
        [](const std::vector<std::tuple<std::string, Timestamp, std::string, std::string>>& actions,
           std::int64_t window) {
            synchrony::SyncWindowConfig cfg;
            cfg.window_seconds = window;
            return counts_to_py(synchrony::brute_force_detect(actions_from_py(actions), cfg));
        },
        py::arg("actions"), py::arg("window") = 300);

    m.def(
        "pair_score",
        [](const std::vector<double>& normalized, const std::string& formula) {
            return csi::pair_score(normalized, csi_arg(formula, "none").pair_formula);
        },
        py::arg("normalized"), py::arg("formula") = "anchored");

    m.def(
        "compute_csi",
        [](const PyCounts& counts, const std::string& formula, const std::string& normalization) {
            const auto t = csi::compute_csi(counts_from_py(counts), csi_arg(formula, normalization));
            std::map<PairKey, double> pairs;
            for (const auto& [p, s] : t.pair_scores) pairs[{p.first, p.second}] = s;
            std::map<std::string, std::optional<double>> per_action;
            for (auto a : kAllActionTypes) per_action[std::string(to_string(a))] = t.per_action_network[index_of(a)];
            py::dict out;
            out["pair_scores"] = pairs;
            out["user_scores"] = t.user_scores;
            out["network"] = t.network_score;
            out["per_action"] = per_action;
            return out;
        },
        py::arg("counts"), py::arg("pair_formula") = "anchored", py::arg("normalization") = "none");

    m.def(
        "classify_user", [](double score, double threshold) { return std::string(to_string(bots::classify_user(score, threshold))); },
        py::arg("score"), py::arg("threshold") = bots::kDefaultThreshold);

    m.def(
        "graph_metrics",
        [](const std::vector<std::tuple<std::string, std::string, double>>& edges, const std::vector<std::string>& nodes,
           std::uint64_t seed) {
            const auto g = graph_from_edges(edges, nodes);
            const auto s = metrics::compute_structure(g, seed, metrics::HierarchyOrientation::symmetric);
            const auto c = metrics::compute_centralities(g);
            py::dict cent;
            for (graph::NodeId v = 0; v < g.num_nodes(); ++v) {
                py::dict row;
                row["total_degree"] = c.total_degree[v];
                row["betweenness"] = c.betweenness[v];
                row["eigenvector"] = c.eigenvector[v];
                cent[py::str(g.name(v))] = row;
            }
            py::dict out;
            out["nodes"] = s.nodes;
            out["edges"] = s.edges;
            out["density"] = s.density;
            out["modularity"] = s.modularity;
            out["communities"] = s.communities;
            out["transitivity"] = s.transitivity;
            out["avg_local_clustering"] = s.avg_local_clustering;
            out["hierarchy_symmetric"] = s.hierarchy;
            out["centrality"] = cent;
            return out;
        },
        py::arg("edges"), py::arg("nodes") = std::vector<std::string>{}, py::arg("seed") = 0,
        "Structure metrics and centralities of an undirected weighted edge list.");

    m.def(
        "prune",
        [](const std::vector<std::tuple<std::string, std::string, double>>& edges, std::size_t min_partners) {
            const auto g = graph::prune_by_partner_count(graph_from_edges(edges, {}), min_partners);
            return g.nodes();
        },
        py::arg("edges"), py::arg("min_partners") = 5, "Nodes left after k-core pruning.");

    m.def(
        "run_report",
        [](const std::filesystem::path& events, const std::optional<std::filesystem::path>& bots,
           const std::optional<std::filesystem::path>& out_dir, std::int64_t window, const std::string& formula,
           const std::string& normalization, std::size_t min_partners, const std::string& lang, double bot_threshold,
           std::uint64_t seed, unsigned workers) {
            pipeline::PipelineConfig cfg;
            cfg.window.window_seconds = window;
            cfg.csi = csi_arg(formula, normalization);
            cfg.min_partners = min_partners;
            cfg.lang = lang;
            cfg.bot_threshold = bot_threshold;
            cfg.seed = seed;
            cfg.workers = workers;
            std::string text;
            {
                py::gil_scoped_release release;
                const auto r = pipeline::run_pipeline(events, bots, cfg);
                if (out_dir) pipeline::write_outputs(r, *out_dir);
                text = pipeline::dump_report(r.report);
            }
            return text;
        },
        py::arg("events"), py::arg("bots") = std::nullopt, py::arg("out_dir") = std::nullopt, py::arg("window") = 300,
        py::arg("pair_formula") = "anchored", py::arg("normalization") = "none", py::arg("min_partners") = 5,
        py::arg("lang") = "", py::arg("bot_threshold") = bots::kDefaultThreshold, py::arg("seed") = 0,
        py::arg("workers") = 1, "Full pipeline; returns the report JSON text.");

    m.def(
        "simulate",
        [](const std::string& config_json, const std::filesystem::path& out_dir) {
            std::istringstream in(config_json);
            const auto cfg = simulate::read_config(in);
            const auto sim = simulate::generate(cfg);
            std::filesystem::create_directories(out_dir);
            auto write = [&](const char* name, auto&& fn) {
                std::ofstream f(out_dir / name, std::ios::binary);
                if (!f) throw IoError("cannot write '" + (out_dir / name).string() + "'");
                fn(f);
            };
            write("events.jsonl", [&](std::ostream& o) { ingest::write_jsonl(sim.dataset, o); });
            write("ground_truth.csv", [&](std::ostream& o) { simulate::write_ground_truth_csv(sim.truth, o); });
            write("bots.csv", [&](std::ostream& o) { sim.bot_scores.write_csv(o); });
            std::vector<std::tuple<std::string, std::string, std::string, std::uint32_t>> truth;
            for (const auto& p : sim.truth)
                truth.emplace_back(p.pair.first, p.pair.second, std::string(to_string(p.action_type)), p.min_count);
            return truth;
        },
        py::arg("config_json"), py::arg("out_dir"),
        "Generate a synthetic dataset into out_dir; returns the planted pairs.");

    m.def(
        "compare",
        [](const std::vector<std::filesystem::path>& reports) {
            std::vector<std::tuple<std::string, double, std::string>> out;
            for (const auto& r : pipeline::compare(reports)) out.emplace_back(r.label, r.csi_network, r.source);
            return out;
        },
        py::arg("reports"), "Events ranked ascending by CSI-Network: (label, csi_network, source).");
}
