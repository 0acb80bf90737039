#include "syncnet/synchrony.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string_view>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace syncnet::synchrony {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Dense ids in lexicographic order, so id order equals string order.
class Interner {
public:
    explicit Interner(std::vector<std::string> values) : values_(std::move(values)) {
        std::sort(values_.begin(), values_.end());
        values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
    }
    std::uint32_t id(const std::string& s) const {
        return static_cast<std::uint32_t>(std::lower_bound(values_.begin(), values_.end(), s) - values_.begin());
    }
    const std::string& value(std::uint32_t id) const { return values_[id]; }

private:
    std::vector<std::string> values_;
};

struct Member {
    std::uint8_t action;
    std::uint32_t artifact;
    std::int64_t bucket;
    std::uint32_t user;

    auto key() const { return std::tie(action, artifact, bucket, user); }
    bool same_group(const Member& o) const {
        return action == o.action && artifact == o.artifact && bucket == o.bucket;
    }
};

using PairKey = std::uint64_t;
using LocalTable = std::unordered_map<PairKey, ActionCounts>;

PairKey pair_key(std::uint32_t a, std::uint32_t b) { return (static_cast<PairKey>(a) << 32) | b; }

void count_groups(const std::vector<Member>& members, const std::vector<std::size_t>& group_starts,
                  std::size_t first_group, std::size_t last_group, LocalTable& out) {
    for (std::size_t g = first_group; g < last_group; ++g) {
        const std::size_t begin = group_starts[g];
        const std::size_t end = group_starts[g + 1];
        const std::uint8_t action = members[begin].action;
        // members are sorted by user within a group, so i < j means user_i < user_j
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = i + 1; j < end; ++j)
                ++out[pair_key(members[i].user, members[j].user)][action];
    }
}

} // namespace

std::int64_t SyncWindowConfig::bucket_of(Timestamp t) const { return floor_div(t, window_seconds); }

void SyncWindowConfig::validate() const {
    if (window_seconds <= 0) throw ConfigError("window_seconds must be positive");
}

void PairSyncCounts::add(const UserPair& pair, ActionType a, std::uint32_t n) {
    if (n == 0) return;
    if (pair.first == pair.second) throw InvalidRecord("self-pair for user '" + pair.first + "'");
    table_[pair][index_of(a)] += n;
}

std::uint32_t PairSyncCounts::count(const UserPair& pair, ActionType a) const {
    auto it = table_.find(pair);
    return it == table_.end() ? 0 : it->second[index_of(a)];
}

std::uint64_t PairSyncCounts::total(const UserPair& pair) const {
    auto it = table_.find(pair);
    return it == table_.end() ? 0 : synchrony::total(it->second);
}

int PairSyncCounts::num_action_types(const UserPair& pair) const {
    auto it = table_.find(pair);
    return it == table_.end() ? 0 : synchrony::num_action_types(it->second);
}

std::set<UserId> PairSyncCounts::users() const {
    std::set<UserId> out;
    for (const auto& [pair, _] : table_) {
        out.insert(pair.first);
        out.insert(pair.second);
    }
    return out;
}

PairSyncCounts PairSyncCounts::restricted_to(ActionType a) const {
    PairSyncCounts out;
    for (const auto& [pair, c] : table_) {
        if (c[index_of(a)] == 0) continue;
        ActionCounts only{};
        only[index_of(a)] = c[index_of(a)];
        out.table_.emplace_hint(out.table_.end(), pair, only);
    }
    return out;
}

std::uint64_t total(const ActionCounts& c) {
    std::uint64_t s = 0;
    for (auto v : c) s += v;
    return s;
}

int num_action_types(const ActionCounts& c) {
    return static_cast<int>(std::count_if(c.begin(), c.end(), [](auto v) { return v > 0; }));
}

PairSyncCounts detect(std::span<const ingest::ActionRecord> actions, const SyncWindowConfig& config,
                      unsigned workers) {
    config.validate();
    PairSyncCounts result;
    if (actions.empty()) return result;

    std::vector<std::string> user_names, artifact_names;
    user_names.reserve(actions.size());
    artifact_names.reserve(actions.size());
    for (const auto& r : actions) {
        user_names.push_back(r.user_id);
        artifact_names.push_back(r.artifact_id);
    }
    const Interner users(std::move(user_names));
    const Interner artifacts(std::move(artifact_names));

    std::vector<Member> members;
    members.reserve(actions.size());
    for (const auto& r : actions) {
        members.push_back(Member{static_cast<std::uint8_t>(index_of(r.action_type)), artifacts.id(r.artifact_id),
                                 config.bucket_of(r.timestamp), users.id(r.user_id)});
    }
    std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) { return a.key() < b.key(); });
    members.erase(std::unique(members.begin(), members.end(),
                              [](const Member& a, const Member& b) { return a.key() == b.key(); }),
                  members.end());

    // Only groups with two or more distinct users produce pairs.
    std::vector<Member> grouped;
    std::vector<std::size_t> group_starts;
    for (std::size_t i = 0; i < members.size();) {
        std::size_t j = i + 1;
        while (j < members.size() && members[j].same_group(members[i])) ++j;
        if (j - i >= 2) {
            group_starts.push_back(grouped.size());
            grouped.insert(grouped.end(), members.begin() + static_cast<std::ptrdiff_t>(i),
                           members.begin() + static_cast<std::ptrdiff_t>(j));
        }
        i = j;
    }
    const std::size_t num_groups = group_starts.size();
    group_starts.push_back(grouped.size());

    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(num_groups)));
    std::vector<LocalTable> locals(n_workers);
    if (n_workers == 1) {
        count_groups(grouped, group_starts, 0, num_groups, locals[0]);
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (num_groups + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::size_t lo = std::min(num_groups, w * chunk);
            const std::size_t hi = std::min(num_groups, lo + chunk);
            threads.emplace_back([&, w, lo, hi] { count_groups(grouped, group_starts, lo, hi, locals[w]); });
        }
        for (auto& t : threads) t.join();
    }

    // Integer sums commute, so merge order does not matter; sorting the keys
    // keeps map insertion sequential.
    LocalTable merged = std::move(locals[0]);
    for (std::size_t w = 1; w < locals.size(); ++w)
        for (const auto& [key, c] : locals[w])
            for (std::size_t a = 0; a < kNumActionTypes; ++a) merged[key][a] += c[a];

    std::vector<std::pair<PairKey, ActionCounts>> sorted(merged.begin(), merged.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, c] : sorted) {
        const UserPair pair{users.value(static_cast<std::uint32_t>(key >> 32)),
                            users.value(static_cast<std::uint32_t>(key & 0xffffffffu))};
        for (ActionType a : kAllActionTypes) result.add(pair, a, c[index_of(a)]);
    }
    return result;
}

PairSyncCounts brute_force_detect(std::span<const ingest::ActionRecord> actions, const SyncWindowConfig& config) {
    config.validate();
    // (action, artifact, bucket, pair) tuples witnessed by at least one record pair.
    std::set<std::tuple<ActionType, std::string, std::int64_t, UserPair>> witnessed;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        for (std::size_t j = i + 1; j < actions.size(); ++j) {
            const auto& x = actions[i];
            const auto& y = actions[j];
            if (x.action_type != y.action_type || x.artifact_id != y.artifact_id || x.user_id == y.user_id) continue;
            const auto bucket = config.bucket_of(x.timestamp);
            if (bucket != config.bucket_of(y.timestamp)) continue;
            witnessed.emplace(x.action_type, x.artifact_id, bucket, UserPair::of(x.user_id, y.user_id));
        }
    }
    PairSyncCounts out;
    for (const auto& [action, artifact, bucket, pair] : witnessed) out.add(pair, action);
    return out;
}

std::map<UserId, int> user_action_type_counts(const PairSyncCounts& counts) {
    std::map<UserId, std::array<bool, kNumActionTypes>> seen;
    for (const auto& [pair, c] : counts.entries()) {
        for (std::size_t a = 0; a < kNumActionTypes; ++a) {
            if (c[a] == 0) continue;
            seen[pair.first][a] = true;
            seen[pair.second][a] = true;
        }
    }
    std::map<UserId, int> out;
    for (const auto& [user, flags] : seen)
        out.emplace_hint(out.end(), user, static_cast<int>(std::count(flags.begin(), flags.end(), true)));
    return out;
}

Participation action_type_participation(const PairSyncCounts& counts) {
    Participation p;
    for (const auto& [user, level] : user_action_type_counts(counts)) {
        ++p.users_at_level[static_cast<std::size_t>(level - 1)];
        ++p.total_users;
    }
    if (p.total_users == 0) return p;
    for (std::size_t i = 0; i < kNumActionTypes; ++i)
        p.fraction[i] = static_cast<double>(p.users_at_level[i]) / static_cast<double>(p.total_users);
    return p;
}

void write_pair_counts_csv(const PairSyncCounts& counts, std::ostream& out) {
    csv::write_row(out, {"user_u", "user_v", "action_type", "count"});
    for (const auto& [pair, c] : counts.entries())
        for (ActionType a : kAllActionTypes)
            if (c[index_of(a)] > 0)
                csv::write_row(out, {pair.first, pair.second, std::string(to_string(a)), std::to_string(c[index_of(a)])});
}

PairSyncCounts read_pair_counts_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in, {"user_u", "user_v", "action_type", "count"}, source);
    PairSyncCounts out;
    while (auto row = reader.next()) {
        const auto where = source + " line " + std::to_string(row->line_no);
        if (!row->ok) throw ParseError(where + ": wrong field count");
        const auto action = parse_action_type(reader.get(*row, "action_type"));
        const auto n = csv::parse_int(reader.get(*row, "count"));
        if (!action) throw ParseError(where + ": unknown action_type");
        if (!n || *n <= 0) throw ParseError(where + ": count must be a positive integer");
        const auto& u = reader.get(*row, "user_u");
        const auto& v = reader.get(*row, "user_v");
        if (u.empty() || v.empty() || u == v) throw ParseError(where + ": invalid user pair");
        out.add(UserPair::of(u, v), *action, static_cast<std::uint32_t>(*n));
    }
    return out;
}

} // namespace syncnet::synchrony
