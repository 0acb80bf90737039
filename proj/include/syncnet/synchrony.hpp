#pragma once

#include "syncnet/ingest.hpp"
#include "syncnet/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>

namespace syncnet::synchrony {

// Fixed epoch-aligned buckets: an action at time t falls in bucket
// floor(t / window_seconds). Two actions in different buckets never
// synchronize, even one second apart.
struct SyncWindowConfig {
    std::int64_t window_seconds = 300;

    std::int64_t bucket_of(Timestamp t) const;
    void validate() const; // throws ConfigError unless window_seconds > 0
};

using ActionCounts = std::array<std::uint32_t, kNumActionTypes>;

// S(u,v,a) keyed on the unordered pair. Only pairs with at least one
// positive count are stored.
class PairSyncCounts {
public:
    using Table = std::map<UserPair, ActionCounts>;

    void add(const UserPair& pair, ActionType a, std::uint32_t n = 1);

    std::uint32_t count(const UserPair& pair, ActionType a) const;
    // S_total(u,v) = sum over action types.
    std::uint64_t total(const UserPair& pair) const;
    // |a|(u,v): number of action types with a positive count.
    int num_action_types(const UserPair& pair) const;

    const Table& entries() const { return table_; }
    std::size_t size() const { return table_.size(); }
    bool empty() const { return table_.empty(); }
    std::set<UserId> users() const;

    // Keeps only pairs with a positive count on `a`, zeroing other actions.
    PairSyncCounts restricted_to(ActionType a) const;

    bool operator==(const PairSyncCounts&) const = default;

private:
    Table table_;
};

std::uint64_t total(const ActionCounts& c);
int num_action_types(const ActionCounts& c);

// Every (action type, artifact, bucket) group with k distinct users adds one
// to each of its C(k,2) pairs. Groups are split across `workers` threads;
// the result does not depend on the worker count or the input order.
PairSyncCounts detect(std::span<const ingest::ActionRecord> actions, const SyncWindowConfig& config = {},
                      unsigned workers = 1);

// Independent oracle for detect(): enumerates all record pairs directly.
// Quadratic in the number of records.
PairSyncCounts brute_force_detect(std::span<const ingest::ActionRecord> actions,
                                  const SyncWindowConfig& config = {});

// Per user, the number of distinct action types (1..3) over all of the
// user's synchronizing pairs.
std::map<UserId, int> user_action_type_counts(const PairSyncCounts& counts);

struct Participation {
    std::size_t total_users = 0;
    std::array<std::size_t, kNumActionTypes> users_at_level{}; // index 0 = one type
    std::array<double, kNumActionTypes> fraction{};            // zeros when empty
};

Participation action_type_participation(const PairSyncCounts& counts);

// user_u,user_v,action_type,count; rows ordered by pair then action type.
void write_pair_counts_csv(const PairSyncCounts& counts, std::ostream& out);
PairSyncCounts read_pair_counts_csv(std::istream& in, const std::string& source = "pair counts");

} // namespace syncnet::synchrony
