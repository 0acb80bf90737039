#include "syncnet/pipeline.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace syncnet::pipeline {

namespace {

using ojson = nlohmann::ordered_json;

const char* level_key(std::size_t level_index) {
    static const char* keys[] = {"1", "2", "3"};
    return keys[level_index];
}

void round_numbers(ojson& j) {
    if (j.is_number_float()) {
        j = report_precision(j.get<double>());
    } else if (j.is_structured()) {
        for (auto& el : j) round_numbers(el);
    }
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    fn(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

} // namespace

double report_precision(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

std::string dump_report(const ojson& report) {
    ojson copy = report;
    round_numbers(copy);
    return copy.dump(2) + "\n";
}

PipelineResult analyze(const ingest::EventDataset& dataset, const std::optional<bots::BotScoreTable>& bot_table,
                       const PipelineConfig& config, const std::optional<ingest::ParseStats>& parse_stats) {
    config.window.validate();
    PipelineResult r;
    r.config = config;
    std::vector<std::string> notices;

    const auto originals = ingest::filter_originals(dataset);
    ingest::LanguageFilterStats lang_stats;
    r.originals = ingest::filter_language(originals, config.lang, &lang_stats);
    if (!config.lang.empty() && r.originals.posts.empty() && !originals.posts.empty())
        notices.push_back("language filter '" + config.lang + "' removed every post");
    r.actions = ingest::extract_actions(r.originals);
    r.counts = synchrony::detect(r.actions, config.window, config.workers);
    r.tables = csi::compute_csi(r.counts, config.csi);

    std::optional<bots::BotScoreTable> table;
    if (bot_table) table = bot_table->with_threshold(config.bot_threshold);

    auto sync = graph::build_sync_graph(r.tables.pair_scores).with_csi_user(r.tables.user_scores);
    if (table) {
        std::map<UserId, UserClass> classes;
        for (const auto& u : sync.nodes()) classes[u] = table->classify(u);
        sync = sync.with_classes(classes);
    }
    r.sync_graph = std::move(sync);
    r.pruned_graph = graph::prune_by_partner_count(r.sync_graph, config.min_partners);
    r.allcomm_graph = graph::build_allcomm_graph(dataset.interactions, dataset.users());
    r.allcomm_centrality = metrics::compute_centralities(r.allcomm_graph, config.workers, 10000);
    if (!r.allcomm_centrality.eigenvector_converged)
        notices.push_back("eigenvector centrality on the all-communication graph did not converge; last iterate used");
    r.structure = metrics::compute_structure(r.sync_graph, config.seed, config.orientation);
    const auto participation_by_user = synchrony::user_action_type_counts(r.counts);
    r.centrality_by_level =
        metrics::centrality_by_action_type_count(r.allcomm_graph, participation_by_user, r.allcomm_centrality);

    ojson rep;
    rep["event_label"] = dataset.label;
    rep["config"] = {{"window_seconds", config.window.window_seconds},
                     {"pair_formula", csi::to_string(config.csi.pair_formula)},
                     {"normalization", csi::to_string(config.csi.normalization)},
                     {"min_partners", config.min_partners},
                     {"lang", config.lang},
                     {"bot_threshold", config.bot_threshold},
                     {"seed", config.seed},
                     {"hierarchy_orientation", metrics::to_string(config.orientation)}};

    ojson input;
    input["posts"] = dataset.posts.size();
    input["original_posts"] = originals.posts.size();
    input["posts_analyzed"] = r.originals.posts.size();
    input["posts_missing_lang"] = lang_stats.missing_lang;
    input["interactions"] = dataset.interactions.size();
    input["actions"] = r.actions.size();
    input["users"] = r.allcomm_graph.num_nodes();
    if (parse_stats) {
        input["records"] = parse_stats->records;
        input["malformed_records"] = parse_stats->malformed;
    }
    rep["input"] = input;

    const auto participation = synchrony::action_type_participation(r.counts);
    rep["synchrony"] = {{"pairs", r.counts.size()}, {"synchronizing_users", participation.total_users}};
    ojson part = ojson::object();
    if (participation.total_users > 0)
        for (std::size_t l = 0; l < kNumActionTypes; ++l)
            part[level_key(l)] = {{"users", participation.users_at_level[l]}, {"fraction", participation.fraction[l]}};
    rep["action_type_participation"] = part;

    if (r.tables.network_score) {
        rep["csi_network_combined"] = *r.tables.network_score;
    } else {
        rep["no_synchrony_reason"] = "no user pair shared an artifact within one " +
                                     std::to_string(config.window.window_seconds) + "-second window";
    }
    ojson per_action = ojson::object();
    for (ActionType a : kAllActionTypes)
        per_action[std::string(to_string(a))] = optional_number(r.tables.per_action_network[index_of(a)]);
    rep["csi_network_per_action"] = per_action;

    if (table) {
        ojson pair_classes = ojson::object();
        const auto pc = bots::average_csi_by_pair_class(r.tables.pair_scores, *table);
        for (const auto& [cls, m] : pc.by_class)
            pair_classes[std::string(bots::to_string(cls))] = {{"mean", m.mean}, {"pairs", m.count}};
        rep["avg_csi_userpair_by_pair_class"] = pair_classes;

        const auto uc = bots::average_csi_by_user_class(r.tables.user_scores, *table);
        ojson user_classes = ojson::object();
        for (const auto& [cls, m] : uc.by_class)
            user_classes[std::string(to_string(cls))] = {{"mean", m.mean}, {"sd", m.sd}, {"users", m.count}};
        user_classes["unknown_users"] = uc.unknown;
        rep["avg_csi_user_by_user_class"] = user_classes;

        const auto cc =
            bots::centrality_by_class(r.allcomm_graph, r.allcomm_centrality, *table, r.counts.users());
        ojson cent = ojson::object();
        for (const auto& [cls, c] : cc)
            cent[std::string(to_string(cls))] = {{"total_degree", c.total_degree},
                                                 {"betweenness", c.betweenness},
                                                 {"eigenvector", c.eigenvector},
                                                 {"users", c.users}};
        rep["centrality_by_class"] = cent;

        auto bot = uc.by_class.find(UserClass::bot);
        auto human = uc.by_class.find(UserClass::human);
        if (bot != uc.by_class.end() && human != uc.by_class.end()) {
            rep["dominant_sync_class"] = bot->second.mean > human->second.mean   ? "bot"
                                         : human->second.mean > bot->second.mean ? "human"
                                                                                 : "tie";
        } else if (bot != uc.by_class.end()) {
            rep["dominant_sync_class"] = "bot";
        } else if (human != uc.by_class.end()) {
            rep["dominant_sync_class"] = "human";
        }
    } else {
        notices.push_back("no bot scores supplied; class sections omitted");
    }

    ojson levels = ojson::object();
    for (std::size_t l = 0; l < 3; ++l) {
        const auto& st = r.centrality_by_level.levels[l];
        if (!st) continue;
        levels[level_key(l)] = {
            {"users", st->users},
            {"mean", {{"total_degree", st->mean[0]}, {"betweenness", st->mean[1]}, {"eigenvector", st->mean[2]}}},
            {"sd", {{"total_degree", st->sd[0]}, {"betweenness", st->sd[1]}, {"eigenvector", st->sd[2]}}}};
    }
    rep["centrality_by_action_type_count"] = levels;

    ojson structure;
    structure["nodes"] = r.structure.nodes;
    structure["edges"] = r.structure.edges;
    structure["density"] = r.structure.density;
    structure["modularity"] = r.structure.modularity;
    structure["partition_method"] = r.structure.partition_method;
    structure["communities"] = r.structure.communities;
    structure["hierarchy"] = r.structure.hierarchy;
    structure["hierarchy_orientation"] = metrics::to_string(r.structure.hierarchy_orientation);
    structure["transitivity"] = r.structure.transitivity;
    structure["avg_local_clustering"] = r.structure.avg_local_clustering;
    if (table) {
        ojson cbc = ojson::object();
        for (const auto& [cls, t] : bots::clustering_by_class(r.sync_graph, *table))
            cbc[std::string(to_string(cls))] = t;
        structure["clustering_by_class"] = cbc;
    }
    rep["structure"] = structure;
    rep["pruned_graph"] = {{"min_partners", config.min_partners},
                           {"nodes", r.pruned_graph.num_nodes()},
                           {"edges", r.pruned_graph.num_edges()}};
    for (const auto& w : r.structure.warnings) notices.push_back(w);
    rep["notices"] = notices;
    r.report = std::move(rep);
    return r;
}

PipelineResult run_pipeline(const std::filesystem::path& events_path,
                            const std::optional<std::filesystem::path>& bots_path, const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& interactions_path) {
    auto parsed = ingest::parse_events_file(events_path);
    if (interactions_path) {
        auto extra = ingest::parse_events_file(*interactions_path);
        parsed.stats.records += extra.stats.records;
        parsed.stats.malformed += extra.stats.malformed;
        parsed.stats.malformed += ingest::merge_into(parsed.dataset, std::move(extra.dataset));
    }
    std::optional<bots::BotScoreTable> table;
    if (bots_path) {
        std::ifstream in(*bots_path);
        if (!in) throw IoError("cannot open bot score file '" + bots_path->string() + "'");
        table = bots::BotScoreTable::read_csv(in, config.bot_threshold, nullptr, bots_path->string());
    }
    return analyze(parsed.dataset, table, config, parsed.stats);
}

void write_outputs(const PipelineResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    write_file(dir / "report.json", [&](std::ostream& o) { o << dump_report(r.report); });
    write_file(dir / "pair_counts.csv", [&](std::ostream& o) { synchrony::write_pair_counts_csv(r.counts, o); });
    write_file(dir / "csi_pairs.csv",
               [&](std::ostream& o) { csi::write_pair_scores_csv(r.tables.pair_scores, r.counts, o); });
    write_file(dir / "csi_users.csv", [&](std::ostream& o) { csi::write_user_scores_csv(r.tables.user_scores, o); });
    write_file(dir / "csi_network.json",
               [&](std::ostream& o) { csi::write_network_summary_json(r.tables, r.config.csi, o); });
    graph::export_graph(r.sync_graph, graph::ExportFormat::graphml, dir / "sync_graph.graphml");
    graph::export_graph(r.pruned_graph, graph::ExportFormat::graphml, dir / "sync_graph_pruned.graphml");
    write_file(dir / "metrics.json", [&](std::ostream& o) { metrics::write_metrics_json(r.structure, o); });
    graph::export_graph(r.allcomm_graph, graph::ExportFormat::graphml, dir / "allcomm_graph.graphml");
    write_file(dir / "allcomm_centrality.csv",
               [&](std::ostream& o) { metrics::write_centrality_csv(r.allcomm_graph, r.allcomm_centrality, o); });
    write_file(dir / "centrality_by_action_types.csv", [&](std::ostream& o) {
        o << "user_id,num_action_types,total_degree,betweenness,eigenvector\n";
        for (const auto& row : r.centrality_by_level.rows) {
            o << csv::escape(row.user) << ',' << row.num_action_types << ',' << csv::format_double(row.total_degree)
              << ',' << csv::format_double(row.betweenness) << ',' << csv::format_double(row.eigenvector) << '\n';
        }
    });
}

std::vector<RankedEvent> rank_events(std::vector<RankedEvent> events) {
    std::sort(events.begin(), events.end(), [](const RankedEvent& a, const RankedEvent& b) {
        if (a.csi_network != b.csi_network) return a.csi_network < b.csi_network;
        return a.label < b.label;
    });
    return events;
}

std::vector<RankedEvent> compare(const std::vector<std::filesystem::path>& report_paths) {
    std::vector<RankedEvent> events;
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open report '" + path.string() + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("report '" + path.string() + "': " + e.what());
        }
        if (!j.is_object()) throw ParseError("report '" + path.string() + "': not a JSON object");
        auto csi_it = j.find("csi_network_combined");
        if (csi_it == j.end() || !csi_it->is_number())
            throw ParseError("report '" + path.string() + "': missing numeric csi_network_combined");
        RankedEvent e;
        e.csi_network = csi_it->get<double>();
        if (auto label = j.find("event_label"); label != j.end() && label->is_string()) {
            e.label = label->get<std::string>();
        } else {
            throw ParseError("report '" + path.string() + "': missing event_label");
        }
        e.source = path.string();
        events.push_back(std::move(e));
    }
    return rank_events(std::move(events));
}

} // namespace syncnet::pipeline
