#include "syncnet/bots.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace syncnet::bots {

UserClass classify_user(double score, double threshold) {
    if (!(score >= 0.0 && score <= 1.0)) throw InvalidRecord("bot score outside [0, 1]");
    return score > threshold ? UserClass::bot : UserClass::human;
}

BotScoreTable::BotScoreTable(double threshold) : threshold_(threshold) {}

void BotScoreTable::set(const UserId& user, double score) {
    if (!(score >= 0.0 && score <= 1.0))
        throw InvalidRecord("bot score for '" + user + "' outside [0, 1]");
    scores_[user] = score;
}

std::optional<double> BotScoreTable::score(const UserId& user) const {
    auto it = scores_.find(user);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

UserClass BotScoreTable::classify(const UserId& user) const {
    auto s = score(user);
    return s ? classify_user(*s, threshold_) : UserClass::unknown;
}

BotScoreTable BotScoreTable::with_threshold(double threshold) const {
    BotScoreTable t = *this;
    t.threshold_ = threshold;
    return t;
}

std::map<UserId, UserClass> BotScoreTable::classes() const {
    std::map<UserId, UserClass> out;
    for (const auto& [user, s] : scores_) out.emplace_hint(out.end(), user, classify_user(s, threshold_));
    return out;
}

BotScoreTable BotScoreTable::read_csv(std::istream& in, double threshold, ReadStats* stats, const std::string& source) {
    csv::Reader reader(in, {"user_id", "score"}, source);
    BotScoreTable table(threshold);
    ReadStats local;
    while (auto row = reader.next()) {
        ++local.rows;
        if (!row->ok) {
            ++local.rejected;
            continue;
        }
        const auto& user = reader.get(*row, "user_id");
        const auto score = csv::parse_double(reader.get(*row, "score"));
        if (user.empty() || !score || !(*score >= 0.0 && *score <= 1.0)) {
            ++local.rejected;
            continue;
        }
        table.scores_[user] = *score;
    }
    if (stats) *stats = local;
    return table;
}

void BotScoreTable::write_csv(std::ostream& out) const {
    csv::write_row(out, {"user_id", "score"});
    for (const auto& [user, s] : scores_) csv::write_row(out, {user, csv::format_double(s)});
}

std::string_view to_string(PairClass c) {
    switch (c) {
    case PairClass::bot_bot: return "bot-bot";
    case PairClass::bot_human: return "bot-human";
    case PairClass::human_human: return "human-human";
    case PairClass::unknown_involved: return "unknown-involved";
    }
    return "?";
}

PairClass classify_pair(const BotScoreTable& table, const UserPair& pair) {
    const auto a = table.classify(pair.first);
    const auto b = table.classify(pair.second);
    if (a == UserClass::unknown || b == UserClass::unknown) return PairClass::unknown_involved;
    if (a == UserClass::bot && b == UserClass::bot) return PairClass::bot_bot;
    if (a == UserClass::human && b == UserClass::human) return PairClass::human_human;
    return PairClass::bot_human;
}

PairClassAverages average_csi_by_pair_class(const csi::PairScores& pair_scores, const BotScoreTable& table) {
    PairClassAverages out;
    std::map<PairClass, double> sums;
    for (const auto& [pair, score] : pair_scores) {
        const auto c = classify_pair(table, pair);
        sums[c] += score;
        ++out.by_class[c].count;
        ++out.total_pairs;
    }
    for (auto& [c, m] : out.by_class) m.mean = sums[c] / static_cast<double>(m.count);
    return out;
}

UserClassAverages average_csi_by_user_class(const csi::UserScores& user_scores, const BotScoreTable& table) {
    UserClassAverages out;
    std::map<UserClass, std::vector<double>> values;
    for (const auto& [user, score] : user_scores) {
        const auto c = table.classify(user);
        if (c == UserClass::unknown) {
            ++out.unknown;
        } else {
            values[c].push_back(score);
        }
    }
    for (const auto& [c, v] : values) {
        MeanSd m;
        m.count = v.size();
        double sum = 0.0;
        for (double x : v) sum += x;
        m.mean = sum / static_cast<double>(m.count);
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(m.count));
        out.by_class[c] = m;
    }
    return out;
}

std::map<UserClass, ClassCentrality> centrality_by_class(const graph::Graph& allcomm,
                                                         const metrics::CentralityReport& c,
                                                         const BotScoreTable& table,
                                                         const std::set<UserId>& synchronizing_users) {
    std::map<UserClass, ClassCentrality> out;
    for (const auto& user : synchronizing_users) {
        const auto cls = table.classify(user);
        if (cls == UserClass::unknown) continue;
        const auto node = allcomm.find(user);
        if (!node) continue;
        auto& acc = out[cls];
        ++acc.users;
        acc.total_degree += c.total_degree[*node];
        acc.betweenness += c.betweenness[*node];
        acc.eigenvector += c.eigenvector[*node];
    }
    for (auto& [cls, acc] : out) {
        const double n = static_cast<double>(acc.users);
        acc.total_degree /= n;
        acc.betweenness /= n;
        acc.eigenvector /= n;
    }
    return out;
}

std::map<UserClass, ClassCentrality> centrality_by_class(const graph::Graph& allcomm, const BotScoreTable& table,
                                                         const std::set<UserId>& synchronizing_users) {
    return centrality_by_class(allcomm, metrics::compute_centralities(allcomm), table, synchronizing_users);
}

std::map<UserClass, double> clustering_by_class(const graph::Graph& sync_graph, const BotScoreTable& table) {
    std::map<UserId, UserClass> classes;
    for (const auto& user : sync_graph.nodes()) classes[user] = table.classify(user);
    const auto classified = sync_graph.with_classes(classes);
    std::map<UserClass, double> out;
    for (UserClass cls : {UserClass::bot, UserClass::human}) {
        const auto sub = graph::induced_subgraph(classified, cls);
        if (sub.num_nodes() == 0) continue;
        out[cls] = metrics::transitivity(sub);
    }
    return out;
}

} // namespace syncnet::bots
