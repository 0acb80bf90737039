#pragma once

#include "syncnet/bots.hpp"
#include "syncnet/ingest.hpp"
#include "syncnet/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace syncnet::simulate {

struct BackgroundConfig {
    std::size_t users = 200;
    double posts_per_hour = 0.5;       // Poisson rate per user
    double bot_fraction = 0.0;         // share of background users scored as bots
    double non_original_fraction = 0.1;
    std::array<double, kNumActionTypes> artifact_probability{0.8, 0.4, 0.3}; // hashtag, url, mention
    double interaction_probability = 0.3; // chance a post also emits an interaction record
};

// A group of users that post the same artifact inside one detection bucket in
// each of `windows_active` distinct buckets.
struct CohortConfig {
    std::size_t members = 5;
    UserClass user_class = UserClass::human;
    std::vector<ActionType> action_types{ActionType::hashtag};
    std::size_t artifact_pool = 1; // per action type; one is picked per active window
    std::size_t windows_active = 4;
    std::size_t posts_per_window = 1;
};

struct SimConfig {
    std::uint64_t seed = 0;
    std::string label = "simulated";
    Timestamp start_time = 1609459200; // 2021-01-01T00:00:00Z
    std::int64_t duration_seconds = 86400;
    std::int64_t window_seconds = 300;
    std::string lang = "en";
    BackgroundConfig background;
    std::vector<CohortConfig> cohorts;
    std::array<std::size_t, kNumActionTypes> vocabulary{10000, 10000, 10000};

    // Throws ConfigError on zero users, non-positive duration/window, cohorts
    // with fewer than two members or more active windows than buckets.
    void validate() const;
};

// Reads a JSON config (keys mirror the structs above; absent keys keep their
// defaults, unknown keys are an error). Throws ConfigError.
SimConfig read_config(std::istream& in);
SimConfig read_config_file(const std::filesystem::path& path);
void write_config(const SimConfig& config, std::ostream& out);

struct PlantedPair {
    UserPair pair;
    ActionType action_type;
    std::uint32_t min_count; // lower bound on S(u,v,a)

    bool operator==(const PlantedPair&) const = default;
};

using GroundTruth = std::vector<PlantedPair>;

struct SimOutput {
    ingest::EventDataset dataset;
    GroundTruth truth;      // ordered by pair, then action type
    bots::BotScoreTable bot_scores;
};

// Deterministic for a fixed config (seed included).
SimOutput generate(const SimConfig& config);

// user_u,user_v,action_type,min_count
void write_ground_truth_csv(const GroundTruth& truth, std::ostream& out);
GroundTruth read_ground_truth_csv(std::istream& in, const std::string& source = "ground truth");

} // namespace syncnet::simulate
