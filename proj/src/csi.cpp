#include "syncnet/csi.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace syncnet::csi {

std::string_view to_string(PairFormula f) {
    switch (f) {
    case PairFormula::anchored: return "anchored";
    case PairFormula::prose: return "prose";
    case PairFormula::literal: return "literal";
    }
    return "?";
}

std::string_view to_string(Normalization n) {
    switch (n) {
    case Normalization::none: return "none";
    case Normalization::per_action_max: return "per_action_max";
    }
    return "?";
}

std::optional<PairFormula> parse_pair_formula(std::string_view s) {
    if (s == "anchored") return PairFormula::anchored;
    if (s == "prose") return PairFormula::prose;
    if (s == "literal") return PairFormula::literal;
    return std::nullopt;
}

std::optional<Normalization> parse_normalization(std::string_view s) {
    if (s == "none") return Normalization::none;
    if (s == "per_action_max") return Normalization::per_action_max;
    return std::nullopt;
}

NormalizedCounts normalize_counts(const synchrony::PairSyncCounts& counts, Normalization strategy) {
    std::array<double, kNumActionTypes> scale{1.0, 1.0, 1.0};
    if (strategy == Normalization::per_action_max) {
        std::array<std::uint32_t, kNumActionTypes> max_count{};
        for (const auto& [pair, c] : counts.entries())
            for (std::size_t a = 0; a < kNumActionTypes; ++a) max_count[a] = std::max(max_count[a], c[a]);
        // an action without pairs keeps scale 1 and contributes only zeros
        for (std::size_t a = 0; a < kNumActionTypes; ++a)
            if (max_count[a] > 0) scale[a] = static_cast<double>(max_count[a]);
    }
    NormalizedCounts out;
    for (const auto& [pair, c] : counts.entries()) {
        std::array<double, kNumActionTypes> n{};
        for (std::size_t a = 0; a < kNumActionTypes; ++a) n[a] = static_cast<double>(c[a]) / scale[a];
        out.emplace_hint(out.end(), pair, n);
    }
    return out;
}

double pair_score(std::span<const double> normalized, PairFormula formula) {
    double sum = 0.0;
    int k = 0;
    for (double v : normalized) {
        if (v > 0.0) {
            sum += v;
            ++k;
        }
    }
    const double kd = k;
    switch (formula) {
    case PairFormula::anchored: return kd * (sum - (kd - 1.0));
    case PairFormula::prose: return kd * (sum - kd);
    case PairFormula::literal: return sum - kd * kd;
    }
    return 0.0;
}

double csi_userpair(const NormalizedCounts& normalized, const UserPair& pair, PairFormula formula) {
    auto it = normalized.find(pair);
    if (it == normalized.end())
        throw std::out_of_range("pair {" + pair.first + ", " + pair.second + "} has no synchrony counts");
    return pair_score(it->second, formula);
}

PairScores csi_userpairs(const NormalizedCounts& normalized, PairFormula formula) {
    PairScores out;
    for (const auto& [pair, n] : normalized) out.emplace_hint(out.end(), pair, pair_score(n, formula));
    return out;
}

UserScores csi_user(const PairScores& pair_scores, const synchrony::PairSyncCounts& counts) {
    UserScores out;
    for (const auto& [pair, score] : pair_scores) {
        const double term = static_cast<double>(counts.total(pair)) * score;
        out[pair.first] += term;
        out[pair.second] += term;
    }
    return out;
}

double csi_network(const UserScores& user_scores) {
    if (user_scores.empty()) throw UndefinedNetwork("CSI-Network is undefined without synchronizing users");
    double sum = 0.0;
    for (const auto& [user, score] : user_scores) sum += score;
    return sum / static_cast<double>(user_scores.size());
}

double csi_single_action(const synchrony::PairSyncCounts& counts, ActionType action, const CsiConfig& config) {
    const auto restricted = counts.restricted_to(action);
    if (restricted.empty())
        throw UndefinedNetwork("no synchronizing pairs for action type '" + std::string(to_string(action)) + "'");
    const auto pairs = csi_userpairs(normalize_counts(restricted, config.normalization), config.pair_formula);
    return csi_network(csi_user(pairs, restricted));
}

CsiTables compute_csi(const synchrony::PairSyncCounts& counts, const CsiConfig& config) {
    CsiTables t;
    t.pair_scores = csi_userpairs(normalize_counts(counts, config.normalization), config.pair_formula);
    t.user_scores = csi_user(t.pair_scores, counts);
    if (!t.user_scores.empty()) t.network_score = csi_network(t.user_scores);
    for (ActionType a : kAllActionTypes) {
        if (counts.restricted_to(a).empty()) continue;
        t.per_action_network[index_of(a)] = csi_single_action(counts, a, config);
    }
    return t;
}

void write_pair_scores_csv(const PairScores& scores, const synchrony::PairSyncCounts& counts, std::ostream& out) {
    csv::write_row(out, {"user_u", "user_v", "num_action_types", "s_total", "csi_userpair"});
    for (const auto& [pair, score] : scores) {
        csv::write_row(out, {pair.first, pair.second, std::to_string(counts.num_action_types(pair)),
                             std::to_string(counts.total(pair)), csv::format_double(score)});
    }
}

PairScores read_pair_scores_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in, {"user_u", "user_v", "csi_userpair"}, source);
    PairScores out;
    while (auto row = reader.next()) {
        const auto where = source + " line " + std::to_string(row->line_no);
        if (!row->ok) throw ParseError(where + ": wrong field count");
        const auto& u = reader.get(*row, "user_u");
        const auto& v = reader.get(*row, "user_v");
        const auto score = csv::parse_double(reader.get(*row, "csi_userpair"));
        if (u.empty() || v.empty() || u == v) throw ParseError(where + ": invalid user pair");
        if (!score) throw ParseError(where + ": csi_userpair is not a number");
        out[UserPair::of(u, v)] = *score;
    }
    return out;
}

void write_user_scores_csv(const UserScores& scores, std::ostream& out) {
    csv::write_row(out, {"user_id", "csi_user"});
    for (const auto& [user, score] : scores) csv::write_row(out, {user, csv::format_double(score)});
}

UserScores read_user_scores_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in, {"user_id", "csi_user"}, source);
    UserScores out;
    while (auto row = reader.next()) {
        const auto where = source + " line " + std::to_string(row->line_no);
        if (!row->ok) throw ParseError(where + ": wrong field count");
        const auto score = csv::parse_double(reader.get(*row, "csi_user"));
        if (!score) throw ParseError(where + ": csi_user is not a number");
        out[reader.get(*row, "user_id")] = *score;
    }
    return out;
}

void write_network_summary_json(const CsiTables& tables, const CsiConfig& config, std::ostream& out) {
    nlohmann::ordered_json j;
    j["csi_network"] = tables.network_score ? nlohmann::ordered_json(*tables.network_score) : nullptr;
    nlohmann::ordered_json per_action = nlohmann::ordered_json::object();
    for (ActionType a : kAllActionTypes) {
        const auto& v = tables.per_action_network[index_of(a)];
        per_action[std::string(to_string(a))] = v ? nlohmann::ordered_json(*v) : nullptr;
    }
    j["per_action"] = per_action;
    j["formula"] = to_string(config.pair_formula);
    j["normalization"] = to_string(config.normalization);
    out << j.dump(2) << '\n';
}

} // namespace syncnet::csi
