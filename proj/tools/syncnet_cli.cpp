// Command-line front end. Every subcommand reads and writes the documented
// file formats, so stages can be run one at a time or all at once via
// `report`. Exit codes: 0 success, 1 usage error, 2 data error.

#include "syncnet/bots.hpp"
#include "syncnet/csi.hpp"
#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"
#include "syncnet/graph.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/metrics.hpp"
#include "syncnet/pipeline.hpp"
#include "syncnet/simulate.hpp"
#include "syncnet/synchrony.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace syncnet;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct Options {
    std::string events;
    std::string interactions;
    std::string bots;
    std::string pairs;
    std::string scores;
    std::string users;
    std::string graph_path;
    std::string config;
    std::string out = ".";
    std::string format = "json";
    std::string graph_format = "graphml";
    std::string pair_formula = "anchored";
    std::string normalization = "none";
    std::string orientation = "csi_order";
    std::string lang;
    double bot_threshold = bots::kDefaultThreshold;
    std::int64_t window = 300;
    std::size_t min_partners = 5;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
    std::vector<std::string> reports;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename F>
void write_to(const fs::path& path, F&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    fn(out);
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

fs::path out_dir(const Options& o) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw IoError("cannot create output directory '" + o.out + "': " + ec.message());
    return o.out;
}

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
    return in;
}

csi::CsiConfig csi_config(const Options& o) {
    csi::CsiConfig c;
    auto f = csi::parse_pair_formula(o.pair_formula);
    auto n = csi::parse_normalization(o.normalization);
    if (!f) throw UsageError("--pair-formula must be anchored, prose or literal");
    if (!n) throw UsageError("--normalization must be none or per_action_max");
    c.pair_formula = *f;
    c.normalization = *n;
    return c;
}

pipeline::PipelineConfig pipeline_config(const Options& o) {
    pipeline::PipelineConfig c;
    c.window.window_seconds = o.window;
    c.csi = csi_config(o);
    c.min_partners = o.min_partners;
    c.lang = o.lang;
    c.bot_threshold = o.bot_threshold;
    c.seed = o.seed;
    c.workers = o.threads;
    auto orient = metrics::parse_hierarchy_orientation(o.orientation);
    if (!orient) throw UsageError("--hierarchy-orientation must be csi_order or symmetric");
    c.orientation = *orient;
    return c;
}

ingest::ParseResult load_events(const Options& o) {
    auto parsed = ingest::parse_events_file(o.events);
    if (!o.interactions.empty()) {
        auto extra = ingest::parse_events_file(o.interactions);
        parsed.stats.records += extra.stats.records;
        parsed.stats.malformed += extra.stats.malformed + ingest::merge_into(parsed.dataset, std::move(extra.dataset));
    }
    for (const auto& e : parsed.stats.errors) std::cerr << "warning: " << e << '\n';
    return parsed;
}

std::optional<bots::BotScoreTable> load_bots(const Options& o) {
    if (o.bots.empty()) return std::nullopt;
    auto in = open_input(o.bots, "bot score file");
    bots::BotScoreTable::ReadStats stats;
    auto table = bots::BotScoreTable::read_csv(in, o.bot_threshold, &stats, o.bots);
    if (stats.rejected) std::cerr << "warning: " << stats.rejected << " bot score rows rejected\n";
    return table;
}

int cmd_ingest(const Options& o) {
    const auto parsed = load_events(o);
    ingest::LanguageFilterStats lang_stats;
    const auto dataset = ingest::filter_language(parsed.dataset, o.lang, &lang_stats);
    const auto dir = out_dir(o);
    if (o.format == "csv") {
        write_to(dir / "posts.csv", [&](std::ostream& s) { ingest::write_posts_csv(dataset, s); });
        write_to(dir / "interactions.csv", [&](std::ostream& s) { ingest::write_interactions_csv(dataset, s); });
    } else {
        write_to(dir / "events.jsonl", [&](std::ostream& s) { ingest::write_jsonl(dataset, s); });
    }
    nlohmann::ordered_json summary = {{"label", dataset.label},
                                      {"records", parsed.stats.records},
                                      {"posts", dataset.posts.size()},
                                      {"interactions", dataset.interactions.size()},
                                      {"malformed", parsed.stats.malformed},
                                      {"posts_missing_lang", lang_stats.missing_lang},
                                      {"posts_other_lang", lang_stats.other_lang},
                                      {"errors", parsed.stats.errors}};
    write_to(dir / "ingest_summary.json", [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_detect(const Options& o) {
    const auto parsed = load_events(o);
    const auto dataset = ingest::filter_language(ingest::filter_originals(parsed.dataset), o.lang);
    const auto actions = ingest::extract_actions(dataset);
    synchrony::SyncWindowConfig window;
    window.window_seconds = o.window;
    const auto counts = synchrony::detect(actions, window, o.threads);
    const auto dir = out_dir(o);
    write_to(dir / "pair_counts.csv", [&](std::ostream& s) { synchrony::write_pair_counts_csv(counts, s); });
    const auto p = synchrony::action_type_participation(counts);
    nlohmann::ordered_json summary = {{"actions", actions.size()},
                                      {"pairs", counts.size()},
                                      {"synchronizing_users", p.total_users}};
    nlohmann::ordered_json levels = nlohmann::ordered_json::object();
    for (std::size_t l = 0; l < kNumActionTypes; ++l)
        levels[std::to_string(l + 1)] = {{"users", p.users_at_level[l]}, {"fraction", p.fraction[l]}};
    summary["action_type_participation"] = levels;
    write_to(dir / "participation.json", [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_score(const Options& o) {
    auto in = open_input(o.pairs, "pair count file");
    const auto counts = synchrony::read_pair_counts_csv(in, o.pairs);
    const auto config = csi_config(o);
    const auto tables = csi::compute_csi(counts, config);
    const auto dir = out_dir(o);
    write_to(dir / "csi_pairs.csv", [&](std::ostream& s) { csi::write_pair_scores_csv(tables.pair_scores, counts, s); });
    write_to(dir / "csi_users.csv", [&](std::ostream& s) { csi::write_user_scores_csv(tables.user_scores, s); });
    write_to(dir / "csi_network.json", [&](std::ostream& s) { csi::write_network_summary_json(tables, config, s); });
    csi::write_network_summary_json(tables, config, std::cout);
    return 0;
}

graph::Graph annotated_sync_graph(const Options& o) {
    auto in = open_input(o.scores, "pair score file");
    auto g = graph::build_sync_graph(csi::read_pair_scores_csv(in, o.scores));
    if (!o.users.empty()) {
        auto uin = open_input(o.users, "user score file");
        g = g.with_csi_user(csi::read_user_scores_csv(uin, o.users));
    }
    if (auto table = load_bots(o)) {
        std::map<UserId, UserClass> classes;
        for (const auto& u : g.nodes()) classes[u] = table->classify(u);
        g = g.with_classes(classes);
    }
    return g;
}

int cmd_graph(const Options& o) {
    const auto format = graph::parse_export_format(o.graph_format);
    if (!format) throw UsageError("--graph-format must be graphml, dot or edge_csv");
    const char* ext = *format == graph::ExportFormat::graphml ? ".graphml"
                      : *format == graph::ExportFormat::dot   ? ".dot"
                                                              : ".csv";
    const auto g = annotated_sync_graph(o);
    const auto pruned = graph::prune_by_partner_count(g, o.min_partners);
    const auto dir = out_dir(o);
    graph::export_graph(g, *format, dir / (std::string("sync_graph") + ext));
    graph::export_graph(pruned, *format, dir / (std::string("sync_graph_pruned") + ext));
    std::cout << "sync graph: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges; pruned (min partners "
              << o.min_partners << "): " << pruned.num_nodes() << " nodes, " << pruned.num_edges() << " edges\n";
    return 0;
}

int cmd_metrics(const Options& o) {
    auto g = graph::import_graph(o.graph_path);
    auto orient = metrics::parse_hierarchy_orientation(o.orientation);
    if (!orient) throw UsageError("--hierarchy-orientation must be csi_order or symmetric");
    const auto structure = metrics::compute_structure(g, o.seed, *orient);
    const auto centrality = metrics::compute_centralities(g, o.threads, 10000);
    if (!centrality.eigenvector_converged)
        std::cerr << "warning: eigenvector centrality did not converge; last iterate written\n";
    const auto dir = out_dir(o);
    write_to(dir / "metrics.json", [&](std::ostream& s) { metrics::write_metrics_json(structure, s); });
    write_to(dir / "centrality.csv", [&](std::ostream& s) { metrics::write_centrality_csv(g, centrality, s); });
    if (auto table = load_bots(o)) {
        nlohmann::ordered_json cbc = nlohmann::ordered_json::object();
        for (const auto& [cls, t] : bots::clustering_by_class(g, *table)) cbc[std::string(to_string(cls))] = t;
        write_to(dir / "clustering_by_class.json", [&](std::ostream& s) { s << cbc.dump(2) << '\n'; });
    }
    metrics::write_metrics_json(structure, std::cout);
    return 0;
}

int cmd_report(const Options& o) {
    const auto config = pipeline_config(o);
    const auto parsed = load_events(o);
    const auto result = pipeline::analyze(parsed.dataset, load_bots(o), config, parsed.stats);
    pipeline::write_outputs(result, out_dir(o));
    std::cout << pipeline::dump_report(result.report);
    return 0;
}

int cmd_simulate(const Options& o) {
    simulate::SimConfig config;
    if (!o.config.empty()) config = simulate::read_config_file(o.config);
    if (o.seed_given) config.seed = o.seed;
    const auto sim = simulate::generate(config);
    const auto dir = out_dir(o);
    write_to(dir / "events.jsonl", [&](std::ostream& s) { ingest::write_jsonl(sim.dataset, s); });
    write_to(dir / "ground_truth.csv", [&](std::ostream& s) { simulate::write_ground_truth_csv(sim.truth, s); });
    write_to(dir / "bots.csv", [&](std::ostream& s) { sim.bot_scores.write_csv(s); });
    write_to(dir / "sim_config.json", [&](std::ostream& s) { simulate::write_config(config, s); });
    std::cout << "simulated " << sim.dataset.posts.size() << " posts, " << sim.dataset.interactions.size()
              << " interactions, " << sim.truth.size() << " planted pair entries\n";
    return 0;
}

int cmd_compare(const Options& o) {
    std::vector<fs::path> paths(o.reports.begin(), o.reports.end());
    const auto ranking = pipeline::compare(paths);
    std::string text;
    if (o.format == "csv") {
        text = "rank,event_label,csi_network,source\n";
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            text += std::to_string(i + 1) + "," + csv::escape(ranking[i].label) + "," +
                    csv::format_double(ranking[i].csi_network) + "," + csv::escape(ranking[i].source) + "\n";
        }
    } else {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < ranking.size(); ++i)
            j.push_back({{"rank", i + 1},
                         {"event_label", ranking[i].label},
                         {"csi_network", ranking[i].csi_network},
                         {"source", ranking[i].source}});
        text = j.dump(2) + "\n";
    }
    if (o.out != ".") {
        const auto dir = out_dir(o);
        write_to(dir / (o.format == "csv" ? "ranking.csv" : "ranking.json"), [&](std::ostream& s) { s << text; });
    }
    std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synchronized-action analysis: co-timed hashtag/URL/mention detection and the "
                 "Combined Synchronization Index"};
    app.require_subcommand(1);
    Options o;

    auto add_events = [&](CLI::App* sub) {
        sub->add_option("--events", o.events, "Event file (JSONL, or CSV by extension)")->required();
        sub->add_option("--interactions", o.interactions, "Extra interaction records (JSONL or CSV)");
        sub->add_option("--lang", o.lang, "Keep only posts with this language tag");
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory"); };
    auto add_csi = [&](CLI::App* sub) {
        sub->add_option("--pair-formula", o.pair_formula, "anchored | prose | literal")
            ->check(CLI::IsMember({"anchored", "prose", "literal"}));
        sub->add_option("--normalization", o.normalization, "none | per_action_max")
            ->check(CLI::IsMember({"none", "per_action_max"}));
    };
    auto add_bots = [&](CLI::App* sub) {
        sub->add_option("--bots", o.bots, "Bot score CSV (user_id,score)");
        sub->add_option("--bot-threshold", o.bot_threshold, "Scores strictly above are bots")
            ->check(CLI::Range(0.0, 1.0));
    };
    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
    };
    auto add_window = [&](CLI::App* sub) {
        sub->add_option("--window", o.window, "Synchrony window in seconds")->check(CLI::PositiveNumber);
    };

    auto* ingest_cmd = app.add_subcommand("ingest", "Parse, validate and canonicalize event files");
    add_events(ingest_cmd);
    add_out(ingest_cmd);
    ingest_cmd->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

    auto* detect_cmd = app.add_subcommand("detect", "Count co-timed actions per user pair");
    add_events(detect_cmd);
    add_window(detect_cmd);
    add_threads(detect_cmd);
    add_out(detect_cmd);

    auto* score_cmd = app.add_subcommand("score", "Compute CSI-UserPair, CSI-User and CSI-Network");
    score_cmd->add_option("--pairs", o.pairs, "pair_counts.csv from detect")->required();
    add_csi(score_cmd);
    add_out(score_cmd);

    auto* graph_cmd = app.add_subcommand("graph", "Build and prune the synchronized network graph");
    graph_cmd->add_option("--scores", o.scores, "csi_pairs.csv from score")->required();
    graph_cmd->add_option("--users", o.users, "csi_users.csv from score");
    graph_cmd->add_option("--min-partners", o.min_partners, "k-core threshold for the pruned graph");
    graph_cmd->add_option("--graph-format", o.graph_format, "graphml | dot | edge_csv")
        ->check(CLI::IsMember({"graphml", "dot", "edge_csv"}));
    add_bots(graph_cmd);
    add_out(graph_cmd);

    auto* metrics_cmd = app.add_subcommand("metrics", "Structure metrics and centralities of a graph file");
    metrics_cmd->add_option("--graph", o.graph_path, "GraphML or edge CSV")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--seed", o.seed, "Seed for the community partition");
    metrics_cmd->add_option("--hierarchy-orientation", o.orientation, "csi_order | symmetric");
    add_bots(metrics_cmd);
    add_threads(metrics_cmd);
    add_out(metrics_cmd);

    auto* report_cmd = app.add_subcommand("report", "Run the full pipeline and write the event report");
    add_events(report_cmd);
    add_bots(report_cmd);
    add_window(report_cmd);
    add_csi(report_cmd);
    report_cmd->add_option("--min-partners", o.min_partners, "k-core threshold for the pruned graph");
    report_cmd->add_option("--seed", o.seed, "Seed for the community partition");
    report_cmd->add_option("--hierarchy-orientation", o.orientation, "csi_order | symmetric");
    add_threads(report_cmd);
    add_out(report_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset with planted cohorts");
    sim_cmd->add_option("--config", o.config, "Simulator config JSON");
    sim_cmd->add_option("--seed", o.seed, "Override the config seed")->each([&](const std::string&) {
        o.seed_given = true;
    });
    add_out(sim_cmd);

    auto* compare_cmd = app.add_subcommand("compare", "Rank events by CSI-Network");
    compare_cmd->add_option("reports", o.reports, "report.json files")->required()->expected(1, -1);
    compare_cmd->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    add_out(compare_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kUsageError;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(o);
        if (*detect_cmd) return cmd_detect(o);
        if (*score_cmd) return cmd_score(o);
        if (*graph_cmd) return cmd_graph(o);
        if (*metrics_cmd) return cmd_metrics(o);
        if (*report_cmd) return cmd_report(o);
        if (*sim_cmd) return cmd_simulate(o);
        if (*compare_cmd) return cmd_compare(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}
