#pragma once

#include "syncnet/bots.hpp"
#include "syncnet/csi.hpp"
#include "syncnet/graph.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/metrics.hpp"
#include "syncnet/synchrony.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace syncnet::pipeline {

struct PipelineConfig {
    synchrony::SyncWindowConfig window;
    csi::CsiConfig csi;
    std::size_t min_partners = 5;
    std::string lang; // empty: no language filter
    double bot_threshold = bots::kDefaultThreshold;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    metrics::HierarchyOrientation orientation = metrics::HierarchyOrientation::csi_order;
};

// Everything the pipeline computed, kept for the side outputs.
struct PipelineResult {
    PipelineConfig config;
    ingest::EventDataset originals; // after the post-type and language filters
    std::vector<ingest::ActionRecord> actions;
    synchrony::PairSyncCounts counts;
    csi::CsiTables tables;
    graph::Graph sync_graph;   // annotated with user_class and csi_user
    graph::Graph pruned_graph;
    graph::Graph allcomm_graph;
    metrics::CentralityReport allcomm_centrality;
    metrics::StructureReport structure;
    metrics::CentralityByLevel centrality_by_level;
    nlohmann::ordered_json report;
};

// Runs detect -> CSI -> graphs -> metrics -> bot overlay on a parsed
// dataset. `parse_stats` only feeds the report's input summary. Without a
// bot table the class sections are omitted and a notice says so.
PipelineResult analyze(const ingest::EventDataset& dataset, const std::optional<bots::BotScoreTable>& bot_table,
                       const PipelineConfig& config, const std::optional<ingest::ParseStats>& parse_stats = {});

// Reads the inputs and calls analyze(). `interactions_path` is merged into
// the events.
PipelineResult run_pipeline(const std::filesystem::path& events_path,
                            const std::optional<std::filesystem::path>& bots_path, const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& interactions_path = {});

// Writes report.json plus pair_counts.csv, csi_pairs.csv, csi_users.csv,
// csi_network.json, sync_graph.graphml, sync_graph_pruned.graphml,
// metrics.json, allcomm_graph.graphml, allcomm_centrality.csv and
// centrality_by_action_types.csv into `dir`.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

// The report as it is written to disk: two-space indented JSON with every
// floating-point value rounded to six significant digits.
std::string dump_report(const nlohmann::ordered_json& report);

// Rounds to six significant digits (the precision used in reports).
double report_precision(double v);

struct RankedEvent {
    std::string label;
    double csi_network = 0.0;
    std::string source;
};

// Events sorted ascending by csi_network_combined, ties by label. Throws
// ParseError naming the file for a malformed report or one without a
// CSI-Network value.
std::vector<RankedEvent> compare(const std::vector<std::filesystem::path>& report_paths);
std::vector<RankedEvent> rank_events(std::vector<RankedEvent> events);

} // namespace syncnet::pipeline
