#pragma once

#include "syncnet/csi.hpp"
#include "syncnet/graph.hpp"
#include "syncnet/metrics.hpp"
#include "syncnet/types.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string_view>

namespace syncnet::bots {

inline constexpr double kDefaultThreshold = 0.70;

// bot iff score > threshold (strictly above). Throws InvalidRecord for a
// score outside [0, 1].
UserClass classify_user(double score, double threshold = kDefaultThreshold);

// Bot likelihoods supplied by an external classifier. Users without a score
// classify as unknown.
class BotScoreTable {
public:
    explicit BotScoreTable(double threshold = kDefaultThreshold);

    // Throws InvalidRecord for a score outside [0, 1].
    void set(const UserId& user, double score);

    std::optional<double> score(const UserId& user) const;
    UserClass classify(const UserId& user) const;
    double threshold() const { return threshold_; }
    std::size_t size() const { return scores_.size(); }
    const std::map<UserId, double>& scores() const { return scores_; }

    BotScoreTable with_threshold(double threshold) const;

    // Class of every scored user.
    std::map<UserId, UserClass> classes() const;

    struct ReadStats {
        std::size_t rows = 0;
        std::size_t rejected = 0;
    };

    // CSV with header user_id,score. Unparseable or out-of-range scores are
    // rejected and counted; a missing header throws ParseError.
    static BotScoreTable read_csv(std::istream& in, double threshold = kDefaultThreshold,
                                  ReadStats* stats = nullptr, const std::string& source = "bot scores");

    void write_csv(std::ostream& out) const;

private:
    std::map<UserId, double> scores_;
    double threshold_;
};

enum class PairClass { bot_bot, bot_human, human_human, unknown_involved };

std::string_view to_string(PairClass c);

PairClass classify_pair(const BotScoreTable& table, const UserPair& pair);

struct ClassMean {
    double mean = 0.0;
    std::size_t count = 0;
};

// Keys exist only for classes with at least one pair.
struct PairClassAverages {
    std::map<PairClass, ClassMean> by_class; // includes unknown_involved when present
    std::size_t total_pairs = 0;
};

PairClassAverages average_csi_by_pair_class(const csi::PairScores& pair_scores, const BotScoreTable& table);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0; // population standard deviation
    std::size_t count = 0;
};

struct UserClassAverages {
    std::map<UserClass, MeanSd> by_class; // bot and/or human
    std::size_t unknown = 0;
};

UserClassAverages average_csi_by_user_class(const csi::UserScores& user_scores, const BotScoreTable& table);

struct ClassCentrality {
    std::size_t users = 0;
    double total_degree = 0.0;
    double betweenness = 0.0;
    double eigenvector = 0.0;
};

// Per-class mean centralities on the all-communication graph, over the
// synchronizing users that appear in it. Unknown-class users are skipped.
std::map<UserClass, ClassCentrality> centrality_by_class(const graph::Graph& allcomm,
                                                         const metrics::CentralityReport& centralities,
                                                         const BotScoreTable& table,
                                                         const std::set<UserId>& synchronizing_users);
std::map<UserClass, ClassCentrality> centrality_by_class(const graph::Graph& allcomm, const BotScoreTable& table,
                                                         const std::set<UserId>& synchronizing_users);

// Transitivity of the bot and human induced subgraphs. A class with no nodes
// has no key.
std::map<UserClass, double> clustering_by_class(const graph::Graph& sync_graph, const BotScoreTable& table);

} // namespace syncnet::bots
