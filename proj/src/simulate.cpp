#include "syncnet/simulate.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"
#include "syncnet/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace syncnet::simulate {

namespace {

using json = nlohmann::json;

std::string padded(const char* prefix, std::size_t n, int width) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
    return buf;
}

std::string background_artifact(ActionType a, std::uint64_t k) {
    switch (a) {
    case ActionType::hashtag: return "#topic" + std::to_string(k);
    case ActionType::url: return "https://news" + std::to_string(k) + ".example.org/story";
    case ActionType::mention: return "@account" + std::to_string(k);
    }
    return {};
}

std::string cohort_artifact(ActionType a, std::size_t cohort, std::size_t k) {
    const std::string tag = "coord" + std::to_string(cohort) + "x" + std::to_string(k);
    switch (a) {
    case ActionType::hashtag: return "#" + tag;
    case ActionType::url: return "https://" + tag + ".example.net/campaign";
    case ActionType::mention: return "@" + tag;
    }
    return {};
}

InteractionType interaction_for(PostType t) {
    switch (t) {
    case PostType::original: return InteractionType::mention;
    case PostType::retweet: return InteractionType::retweet;
    case PostType::quote: return InteractionType::quote;
    case PostType::reply: return InteractionType::reply;
    }
    return InteractionType::mention;
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

std::array<double, kNumActionTypes> per_action_doubles(const json& obj, std::array<double, kNumActionTypes> values,
                                                       const std::string& where) {
    reject_unknown(obj, {"hashtag", "url", "mention"}, where);
    for (ActionType a : kAllActionTypes) read_key(obj, std::string(to_string(a)).c_str(), values[index_of(a)]);
    return values;
}

std::int64_t first_full_bucket(const SimConfig& c) {
    return (c.start_time + c.window_seconds - 1) / c.window_seconds;
}

std::int64_t bucket_count(const SimConfig& c) {
    return (c.start_time + c.duration_seconds) / c.window_seconds - first_full_bucket(c);
}

} // namespace

void SimConfig::validate() const {
    if (duration_seconds <= 0) throw ConfigError("duration_seconds must be positive");
    if (window_seconds <= 0) throw ConfigError("window_seconds must be positive");
    if (start_time < 0) throw ConfigError("start_time must be non-negative");
    std::size_t users = background.users;
    for (const auto& c : cohorts) users += c.members;
    if (users == 0) throw ConfigError("configuration has no users");
    if (background.posts_per_hour < 0.0) throw ConfigError("background posts_per_hour must be non-negative");
    auto probability = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
    };
    probability(background.bot_fraction, "bot_fraction");
    probability(background.non_original_fraction, "non_original_fraction");
    probability(background.interaction_probability, "interaction_probability");
    for (double p : background.artifact_probability) probability(p, "artifact_probability");
    for (std::size_t v : vocabulary)
        if (v == 0) throw ConfigError("vocabulary sizes must be positive");
    const auto buckets = bucket_count(*this);
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        const auto& c = cohorts[i];
        const std::string where = "cohort " + std::to_string(i);
        if (c.members < 2) throw ConfigError(where + ": needs at least two members");
        if (c.action_types.empty()) throw ConfigError(where + ": no action types");
        if (c.artifact_pool == 0) throw ConfigError(where + ": artifact_pool must be positive");
        if (c.posts_per_window == 0) throw ConfigError(where + ": posts_per_window must be positive");
        if (c.user_class == UserClass::unknown) throw ConfigError(where + ": user_class must be bot or human");
        if (static_cast<std::int64_t>(c.windows_active) > buckets)
            throw ConfigError(where + ": more active windows than buckets in the duration");
    }
}

SimConfig read_config(std::istream& in) {
    SimConfig c;
    try {
        const json j = json::parse(in);
        reject_unknown(j, {"seed", "label", "start_time", "duration_seconds", "window_seconds", "lang", "background",
                           "cohorts", "vocabulary"},
                       "config");
        read_key(j, "seed", c.seed);
        read_key(j, "label", c.label);
        read_key(j, "start_time", c.start_time);
        read_key(j, "duration_seconds", c.duration_seconds);
        read_key(j, "window_seconds", c.window_seconds);
        read_key(j, "lang", c.lang);
        if (auto it = j.find("background"); it != j.end()) {
            reject_unknown(*it,
                           {"users", "posts_per_hour", "bot_fraction", "non_original_fraction", "artifact_probability",
                            "interaction_probability"},
                           "background");
            auto& b = c.background;
            read_key(*it, "users", b.users);
            read_key(*it, "posts_per_hour", b.posts_per_hour);
            read_key(*it, "bot_fraction", b.bot_fraction);
            read_key(*it, "non_original_fraction", b.non_original_fraction);
            read_key(*it, "interaction_probability", b.interaction_probability);
            if (auto p = it->find("artifact_probability"); p != it->end())
                b.artifact_probability = per_action_doubles(*p, b.artifact_probability, "artifact_probability");
        }
        if (auto it = j.find("vocabulary"); it != j.end()) {
            std::array<double, kNumActionTypes> v{};
            for (std::size_t a = 0; a < kNumActionTypes; ++a) v[a] = static_cast<double>(c.vocabulary[a]);
            v = per_action_doubles(*it, v, "vocabulary");
            for (std::size_t a = 0; a < kNumActionTypes; ++a) {
                if (v[a] < 0 || v[a] != std::floor(v[a])) throw ConfigError("vocabulary sizes must be integers");
                c.vocabulary[a] = static_cast<std::size_t>(v[a]);
            }
        }
        if (auto it = j.find("cohorts"); it != j.end()) {
            if (!it->is_array()) throw ConfigError("cohorts must be a list");
            for (const auto& cj : *it) {
                reject_unknown(cj, {"members", "user_class", "action_types", "artifact_pool", "windows_active",
                                    "posts_per_window"},
                               "cohort");
                CohortConfig co;
                read_key(cj, "members", co.members);
                read_key(cj, "artifact_pool", co.artifact_pool);
                read_key(cj, "windows_active", co.windows_active);
                read_key(cj, "posts_per_window", co.posts_per_window);
                if (auto uc = cj.find("user_class"); uc != cj.end()) {
                    auto cls = parse_user_class(uc->get<std::string>());
                    if (!cls) throw ConfigError("unknown user_class '" + uc->get<std::string>() + "'");
                    co.user_class = *cls;
                }
                if (auto at = cj.find("action_types"); at != cj.end()) {
                    co.action_types.clear();
                    for (const auto& name : *at) {
                        auto a = parse_action_type(name.get<std::string>());
                        if (!a) throw ConfigError("unknown action type '" + name.get<std::string>() + "'");
                        if (std::find(co.action_types.begin(), co.action_types.end(), *a) == co.action_types.end())
                            co.action_types.push_back(*a);
                    }
                }
                c.cohorts.push_back(std::move(co));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid simulator config: ") + e.what());
    }
    c.validate();
    return c;
}

SimConfig read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open simulator config '" + path.string() + "'");
    return read_config(in);
}

void write_config(const SimConfig& c, std::ostream& out) {
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["label"] = c.label;
    j["start_time"] = c.start_time;
    j["duration_seconds"] = c.duration_seconds;
    j["window_seconds"] = c.window_seconds;
    j["lang"] = c.lang;
    auto per_action = [](const auto& arr) {
        nlohmann::ordered_json o;
        for (ActionType a : kAllActionTypes) o[std::string(to_string(a))] = arr[index_of(a)];
        return o;
    };
    j["background"] = {{"users", c.background.users},
                       {"posts_per_hour", c.background.posts_per_hour},
                       {"bot_fraction", c.background.bot_fraction},
                       {"non_original_fraction", c.background.non_original_fraction},
                       {"artifact_probability", per_action(c.background.artifact_probability)},
                       {"interaction_probability", c.background.interaction_probability}};
    j["vocabulary"] = per_action(c.vocabulary);
    j["cohorts"] = nlohmann::ordered_json::array();
    for (const auto& co : c.cohorts) {
        nlohmann::ordered_json cj;
        cj["members"] = co.members;
        cj["user_class"] = to_string(co.user_class);
        cj["action_types"] = nlohmann::ordered_json::array();
        for (ActionType a : co.action_types) cj["action_types"].push_back(to_string(a));
        cj["artifact_pool"] = co.artifact_pool;
        cj["windows_active"] = co.windows_active;
        cj["posts_per_window"] = co.posts_per_window;
        j["cohorts"].push_back(cj);
    }
    out << j.dump(2) << '\n';
}

SimOutput generate(const SimConfig& config) {
    config.validate();
    rng::Engine eng(config.seed);
    SimOutput out;
    out.dataset.label = config.label;

    std::vector<UserId> users;
    for (std::size_t i = 0; i < config.background.users; ++i) {
        users.push_back(padded("bg", i, 5));
        const bool bot = rng::unit(eng) < config.background.bot_fraction;
        // human scores stay within [0, 0.7], bot scores within [0.71, 1)
        const double score = bot ? 0.71 + 0.29 * rng::unit(eng) : 0.7 * rng::unit(eng);
        out.bot_scores.set(users.back(), score);
    }
    std::vector<std::vector<UserId>> cohort_members(config.cohorts.size());
    for (std::size_t c = 0; c < config.cohorts.size(); ++c) {
        for (std::size_t m = 0; m < config.cohorts[c].members; ++m) {
            cohort_members[c].push_back("c" + std::to_string(c) + "_" + padded("m", m, 3));
            users.push_back(cohort_members[c].back());
            out.bot_scores.set(users.back(), config.cohorts[c].user_class == UserClass::bot ? 0.9 : 0.1);
        }
    }

    std::size_t next_post = 0;
    auto add_post = [&](ingest::PostEvent p) {
        p.post_id = padded("p", next_post++, 7);
        if (users.size() > 1 && rng::unit(eng) < config.background.interaction_probability) {
            UserId target;
            do {
                target = users[rng::below(eng, users.size())];
            } while (target == p.user_id);
            out.dataset.interactions.push_back(
                ingest::InteractionRecord{p.user_id, target, interaction_for(p.post_type), p.timestamp});
        }
        out.dataset.posts.push_back(std::move(p));
    };

    const Timestamp end = config.start_time + config.duration_seconds;
    const double rate_per_second = config.background.posts_per_hour / 3600.0;
    for (std::size_t i = 0; i < config.background.users; ++i) {
        if (rate_per_second <= 0.0) break;
        double t = static_cast<double>(config.start_time);
        while (true) {
            t += -std::log(1.0 - rng::unit(eng)) / rate_per_second;
            if (t >= static_cast<double>(end)) break;
            ingest::PostEvent p;
            p.user_id = users[i];
            p.timestamp = static_cast<Timestamp>(t);
            p.lang = config.lang;
            if (rng::unit(eng) < config.background.non_original_fraction) {
                static constexpr PostType others[] = {PostType::retweet, PostType::quote, PostType::reply};
                p.post_type = others[rng::below(eng, 3)];
            }
            for (ActionType a : kAllActionTypes) {
                if (rng::unit(eng) < config.background.artifact_probability[index_of(a)]) {
                    const auto k = rng::below(eng, config.vocabulary[index_of(a)]);
                    const std::string artifact = background_artifact(a, k);
                    switch (a) {
                    case ActionType::hashtag: p.hashtags.insert(artifact); break;
                    case ActionType::url: p.urls.insert(artifact); break;
                    case ActionType::mention: p.mentions.insert(artifact); break;
                    }
                }
            }
            add_post(std::move(p));
        }
    }

    const std::int64_t first_bucket = first_full_bucket(config);
    const std::int64_t buckets = bucket_count(config);
    for (std::size_t c = 0; c < config.cohorts.size(); ++c) {
        const auto& co = config.cohorts[c];
        std::set<std::int64_t> chosen;
        while (chosen.size() < co.windows_active)
            chosen.insert(first_bucket + static_cast<std::int64_t>(rng::below(eng, static_cast<std::uint64_t>(buckets))));
        for (std::int64_t bucket : chosen) {
            std::array<std::string, kNumActionTypes> shared;
            for (ActionType a : co.action_types) shared[index_of(a)] = cohort_artifact(a, c, rng::below(eng, co.artifact_pool));
            for (const auto& member : cohort_members[c]) {
                for (std::size_t k = 0; k < co.posts_per_window; ++k) {
                    ingest::PostEvent p;
                    p.user_id = member;
                    p.timestamp = bucket * config.window_seconds +
                                  static_cast<Timestamp>(rng::below(eng, static_cast<std::uint64_t>(config.window_seconds)));
                    p.lang = config.lang;
                    for (ActionType a : co.action_types) {
                        switch (a) {
                        case ActionType::hashtag: p.hashtags.insert(shared[index_of(a)]); break;
                        case ActionType::url: p.urls.insert(shared[index_of(a)]); break;
                        case ActionType::mention: p.mentions.insert(shared[index_of(a)]); break;
                        }
                    }
                    add_post(std::move(p));
                }
            }
        }
        for (std::size_t i = 0; i < cohort_members[c].size(); ++i)
            for (std::size_t j = i + 1; j < cohort_members[c].size(); ++j)
                for (ActionType a : co.action_types)
                    out.truth.push_back(PlantedPair{UserPair::of(cohort_members[c][i], cohort_members[c][j]), a,
                                                    static_cast<std::uint32_t>(co.windows_active)});
    }
    std::sort(out.truth.begin(), out.truth.end(), [](const PlantedPair& a, const PlantedPair& b) {
        return std::tie(a.pair, a.action_type) < std::tie(b.pair, b.action_type);
    });
    ingest::sort_dataset(out.dataset);
    return out;
}

void write_ground_truth_csv(const GroundTruth& truth, std::ostream& out) {
    csv::write_row(out, {"user_u", "user_v", "action_type", "min_count"});
    for (const auto& p : truth)
        csv::write_row(out, {p.pair.first, p.pair.second, std::string(to_string(p.action_type)), std::to_string(p.min_count)});
}

GroundTruth read_ground_truth_csv(std::istream& in, const std::string& source) {
    csv::Reader reader(in, {"user_u", "user_v", "action_type", "min_count"}, source);
    GroundTruth out;
    while (auto row = reader.next()) {
        const auto where = source + " line " + std::to_string(row->line_no);
        if (!row->ok) throw ParseError(where + ": wrong field count");
        const auto a = parse_action_type(reader.get(*row, "action_type"));
        const auto n = csv::parse_int(reader.get(*row, "min_count"));
        if (!a || !n || *n < 0) throw ParseError(where + ": bad action_type or min_count");
        out.push_back(PlantedPair{UserPair::of(reader.get(*row, "user_u"), reader.get(*row, "user_v")), *a,
                                  static_cast<std::uint32_t>(*n)});
    }
    return out;
}

} // namespace syncnet::simulate
