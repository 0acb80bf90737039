#pragma once

#include "syncnet/synchrony.hpp"
#include "syncnet/types.hpp"

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>

namespace syncnet::csi {

// How per-action counts are combined into a pair score, with
// sum = sum of normalized counts over the k action types the pair shares:
//   anchored: k * (sum - (k - 1))   one synchronization is worth one point
//   prose:    k * (sum - k)
//   literal:  sum - k * k
enum class PairFormula { anchored, prose, literal };

enum class Normalization {
    none,          // normalized count = raw count
    per_action_max // divide by the largest count of that action type
};

std::string_view to_string(PairFormula f);
std::string_view to_string(Normalization n);
std::optional<PairFormula> parse_pair_formula(std::string_view s);
std::optional<Normalization> parse_normalization(std::string_view s);

struct CsiConfig {
    PairFormula pair_formula = PairFormula::anchored;
    Normalization normalization = Normalization::none;
};

// Normalized counts; an entry is positive exactly where the raw count is.
using NormalizedCounts = std::map<UserPair, std::array<double, kNumActionTypes>>;
using PairScores = std::map<UserPair, double>;
using UserScores = std::map<UserId, double>;

NormalizedCounts normalize_counts(const synchrony::PairSyncCounts& counts, Normalization strategy);

// Pair score from the normalized counts of the action types a pair shares
// (zeros are ignored).
double pair_score(std::span<const double> normalized, PairFormula formula);

// Throws std::out_of_range when the pair is not in `normalized`.
double csi_userpair(const NormalizedCounts& normalized, const UserPair& pair, PairFormula formula);

PairScores csi_userpairs(const NormalizedCounts& normalized, PairFormula formula);

// CSI-User(u) = sum over u's pairs of S_total(u,v) * CSI-UserPair(u,v).
UserScores csi_user(const PairScores& pair_scores, const synchrony::PairSyncCounts& counts);

// Mean CSI-User over synchronizing users. Throws UndefinedNetwork when empty.
double csi_network(const UserScores& user_scores);

// Full pipeline restricted to the pairs that synchronize on `action`.
// Throws UndefinedNetwork if there are none.
double csi_single_action(const synchrony::PairSyncCounts& counts, ActionType action, const CsiConfig& config = {});

struct CsiTables {
    PairScores pair_scores;
    UserScores user_scores;
    std::optional<double> network_score; // absent when nothing synchronizes
    std::array<std::optional<double>, kNumActionTypes> per_action_network{};
};

CsiTables compute_csi(const synchrony::PairSyncCounts& counts, const CsiConfig& config = {});

// user_u,user_v,num_action_types,s_total,csi_userpair
void write_pair_scores_csv(const PairScores& scores, const synchrony::PairSyncCounts& counts, std::ostream& out);
PairScores read_pair_scores_csv(std::istream& in, const std::string& source = "pair scores");

// user_id,csi_user
void write_user_scores_csv(const UserScores& scores, std::ostream& out);
UserScores read_user_scores_csv(std::istream& in, const std::string& source = "user scores");

// {csi_network, per_action: {hashtag, url, mention}, formula, normalization};
// absent values are written as null.
void write_network_summary_json(const CsiTables& tables, const CsiConfig& config, std::ostream& out);

} // namespace syncnet::csi
