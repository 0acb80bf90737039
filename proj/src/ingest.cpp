#include "syncnet/ingest.hpp"

#include "syncnet/csv.hpp"
#include "syncnet/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace syncnet::ingest {

namespace {

using json = nlohmann::json;

constexpr std::size_t kMaxErrorMessages = 20;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

void lower_in_place(std::string& s, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end && i < s.size(); ++i) s[i] = lower(s[i]);
}

std::string canonical_tag(std::string_view raw, char sigil) {
    std::string_view s = trim(raw);
    while (!s.empty() && (s.front() == sigil || is_space(s.front()))) s.remove_prefix(1);
    std::string out(s);
    lower_in_place(out, 0, out.size());
    return out;
}

std::string canonical_url(std::string_view raw) {
    std::string s(trim(raw));
    std::size_t authority_begin = 0;
    const auto scheme_end = s.find("://");
    if (scheme_end != std::string::npos && s.find_first_of("/?#") > scheme_end) {
        lower_in_place(s, 0, scheme_end);
        authority_begin = scheme_end + 3;
    }
    auto authority_end = s.find_first_of("/?#", authority_begin);
    if (authority_end == std::string::npos) authority_end = s.size();
    lower_in_place(s, authority_begin, authority_end);

    const auto fragment = s.find('#', authority_end);
    if (fragment != std::string::npos) s.erase(fragment);
    while (s.size() > authority_begin && (s.back() == '/' || is_space(s.back()))) s.pop_back();
    return s;
}

struct LineError {
    std::string reason;
};

const std::string& require_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) throw LineError{std::string("missing or non-string '") + key + "'"};
    const auto& s = it->get_ref<const std::string&>();
    if (trim(s).empty()) throw LineError{std::string("empty '") + key + "'"};
    return s;
}

Timestamp timestamp_from_json(const json& obj) {
    auto it = obj.find("timestamp");
    if (it == obj.end()) throw LineError{"missing 'timestamp'"};
    std::optional<Timestamp> ts;
    if (it->is_number_integer()) {
        ts = it->get<std::int64_t>();
    } else if (it->is_number_float()) {
        const double v = it->get<double>();
        if (std::isfinite(v)) ts = static_cast<Timestamp>(std::floor(v));
    } else if (it->is_string()) {
        ts = parse_timestamp(it->get_ref<const std::string&>());
    }
    if (!ts) throw LineError{"unparseable 'timestamp'"};
    if (*ts < 0) throw LineError{"negative 'timestamp'"};
    return *ts;
}

void check_artifact(ActionType type, const std::string& raw) {
    try {
        canonicalize_artifact(type, raw);
    } catch (const InvalidRecord&) {
        throw LineError{"blank " + std::string(to_string(type)) + " artifact"};
    }
}

std::set<std::string> artifact_list(const json& obj, const char* key, ActionType type) {
    std::set<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) throw LineError{std::string("'") + key + "' is not a list"};
    for (const auto& el : *it) {
        if (!el.is_string()) throw LineError{std::string("non-string entry in '") + key + "'"};
        const auto& s = el.get_ref<const std::string&>();
        check_artifact(type, s);
        out.insert(s);
    }
    return out;
}

std::set<std::string> artifact_field(std::string_view field, ActionType type) {
    std::set<std::string> out;
    if (trim(field).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto bar = field.find('|', start);
        std::string item(field.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start));
        check_artifact(type, item);
        out.insert(std::move(item));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

PostType post_type_from(std::string_view s) {
    auto t = parse_post_type(s);
    if (!t) throw LineError{"unknown post_type '" + std::string(s) + "'"};
    return *t;
}

InteractionType interaction_type_from(std::string_view s) {
    auto t = parse_interaction_type(s);
    if (!t) throw LineError{"unknown interaction_type '" + std::string(s) + "'"};
    return *t;
}

PostEvent post_from_json(const json& obj) {
    PostEvent p;
    p.post_id = require_string(obj, "post_id");
    p.user_id = require_string(obj, "user_id");
    p.timestamp = timestamp_from_json(obj);
    p.post_type = post_type_from(require_string(obj, "post_type"));
    if (auto it = obj.find("lang"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) throw LineError{"non-string 'lang'"};
        if (!it->get_ref<const std::string&>().empty()) p.lang = it->get<std::string>();
    }
    p.hashtags = artifact_list(obj, "hashtags", ActionType::hashtag);
    p.urls = artifact_list(obj, "urls", ActionType::url);
    p.mentions = artifact_list(obj, "mentions", ActionType::mention);
    return p;
}

InteractionRecord interaction_from_json(const json& obj) {
    InteractionRecord r;
    r.source_user = require_string(obj, "source_user");
    r.target_user = require_string(obj, "target_user");
    r.interaction_type = interaction_type_from(require_string(obj, "interaction_type"));
    r.timestamp = timestamp_from_json(obj);
    return r;
}

Timestamp timestamp_from_field(std::string_view s) {
    auto ts = parse_timestamp(s);
    if (!ts) throw LineError{"unparseable 'timestamp'"};
    if (*ts < 0) throw LineError{"negative 'timestamp'"};
    return *ts;
}

const std::string& required_field(const csv::Reader& r, const csv::Reader::Row& row, const char* key) {
    const auto& s = r.get(row, key);
    if (trim(s).empty()) throw LineError{std::string("empty '") + key + "'"};
    return s;
}

class Collector {
public:
    explicit Collector(std::string label) { result_.dataset.label = std::move(label); }

    void record_line() { ++result_.stats.records; }

    void malformed(std::size_t line_no, const std::string& reason) {
        ++result_.stats.malformed;
        if (result_.stats.errors.size() < kMaxErrorMessages)
            result_.stats.errors.push_back("line " + std::to_string(line_no) + ": " + reason);
    }

    void add(std::size_t line_no, PostEvent p) {
        if (!post_ids_.insert(p.post_id).second) {
            malformed(line_no, "duplicate post_id '" + p.post_id + "'");
            return;
        }
        ++result_.stats.posts;
        result_.dataset.posts.push_back(std::move(p));
    }

    void add(InteractionRecord r) {
        ++result_.stats.interactions;
        result_.dataset.interactions.push_back(std::move(r));
    }

    ParseResult finish() {
        const auto& st = result_.stats;
        if (st.malformed * 2 > st.records) throw CorpusRejected(st.malformed, st.records);
        sort_dataset(result_.dataset);
        return std::move(result_);
    }

private:
    ParseResult result_;
    std::unordered_set<std::string> post_ids_;
};

void parse_jsonl(std::istream& in, Collector& out) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        out.record_line();
        try {
            const json obj = json::parse(line);
            if (!obj.is_object()) throw LineError{"record is not an object"};
            if (obj.contains("post_id")) {
                out.add(line_no, post_from_json(obj));
            } else if (obj.contains("source_user")) {
                out.add(interaction_from_json(obj));
            } else {
                throw LineError{"neither a post nor an interaction record"};
            }
        } catch (const json::exception& e) {
            out.malformed(line_no, std::string("invalid JSON: ") + e.what());
        } catch (const LineError& e) {
            out.malformed(line_no, e.reason);
        }
    }
    if (in.bad()) throw IoError("read error while parsing events");
}

void parse_csv(std::istream& in, Collector& out) {
    csv::Reader reader(in, {}, "events");
    const bool posts = reader.has_column("post_id");
    const std::vector<std::string> post_cols = {"post_id", "user_id", "timestamp", "post_type"};
    const std::vector<std::string> inter_cols = {"source_user", "target_user", "interaction_type", "timestamp"};
    for (const auto& col : posts ? post_cols : inter_cols) {
        if (!reader.has_column(col)) throw ParseError("events CSV header lacks column '" + col + "'");
    }
    auto optional_field = [&](const csv::Reader::Row& row, const char* key) -> std::string_view {
        return reader.has_column(key) ? std::string_view(reader.get(row, key)) : std::string_view();
    };
    while (auto row = reader.next()) {
        out.record_line();
        try {
            if (!row->ok) throw LineError{"wrong field count"};
            if (posts) {
                PostEvent p;
                p.post_id = required_field(reader, *row, "post_id");
                p.user_id = required_field(reader, *row, "user_id");
                p.timestamp = timestamp_from_field(reader.get(*row, "timestamp"));
                p.post_type = post_type_from(reader.get(*row, "post_type"));
                if (auto lang = optional_field(*row, "lang"); !lang.empty()) p.lang = std::string(lang);
                p.hashtags = artifact_field(optional_field(*row, "hashtags"), ActionType::hashtag);
                p.urls = artifact_field(optional_field(*row, "urls"), ActionType::url);
                p.mentions = artifact_field(optional_field(*row, "mentions"), ActionType::mention);
                out.add(row->line_no, std::move(p));
            } else {
                InteractionRecord r;
                r.source_user = required_field(reader, *row, "source_user");
                r.target_user = required_field(reader, *row, "target_user");
                r.interaction_type = interaction_type_from(reader.get(*row, "interaction_type"));
                r.timestamp = timestamp_from_field(reader.get(*row, "timestamp"));
                out.add(std::move(r));
            }
        } catch (const LineError& e) {
            out.malformed(row->line_no, e.reason);
        }
    }
    if (in.bad()) throw IoError("read error while parsing events");
}

std::string join_pipe(const std::set<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out.push_back('|');
        out += s;
    }
    return out;
}

bool digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) return false;
    for (std::size_t i = pos; i < pos + n; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

int to_int(std::string_view s, std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

} // namespace

const std::set<std::string>& PostEvent::artifacts(ActionType a) const {
    switch (a) {
    case ActionType::hashtag: return hashtags;
    case ActionType::url: return urls;
    case ActionType::mention: return mentions;
    }
    return hashtags;
}

std::set<UserId> EventDataset::users() const {
    std::set<UserId> out;
    for (const auto& p : posts) out.insert(p.user_id);
    for (const auto& r : interactions) {
        out.insert(r.source_user);
        out.insert(r.target_user);
    }
    return out;
}

std::optional<Format> parse_format(std::string_view s) {
    if (s == "jsonl" || s == "json") return Format::jsonl;
    if (s == "csv") return Format::csv;
    return std::nullopt;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    const std::string_view s = trim(text);
    if (s.empty()) return std::nullopt;
    if (auto v = csv::parse_int(s)) return static_cast<Timestamp>(*v);

    // YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|+HHMM|+HH]
    if (!digits(s, 0, 4) || s.size() < 19 || s[4] != '-' || !digits(s, 5, 2) || s[7] != '-' ||
        !digits(s, 8, 2) || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') || !digits(s, 11, 2) ||
        s[13] != ':' || !digits(s, 14, 2) || s[16] != ':' || !digits(s, 17, 2))
        return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{to_int(s, 0, 4)}, month{static_cast<unsigned>(to_int(s, 5, 2))},
                             day{static_cast<unsigned>(to_int(s, 8, 2))}};
    if (!ymd.ok()) return std::nullopt;
    const int hh = to_int(s, 11, 2), mm = to_int(s, 14, 2), ss = to_int(s, 17, 2);
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

    std::size_t pos = 19;
    if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
    }
    long offset = 0;
    if (pos < s.size()) {
        const char c = s[pos];
        if ((c == 'Z' || c == 'z') && pos + 1 == s.size()) {
            pos = s.size();
        } else if (c == '+' || c == '-') {
            const std::string_view tz = s.substr(pos + 1);
            int oh = 0, om = 0;
            if (tz.size() == 2 && digits(tz, 0, 2)) {
                oh = to_int(tz, 0, 2);
            } else if (tz.size() == 4 && digits(tz, 0, 4)) {
                oh = to_int(tz, 0, 2);
                om = to_int(tz, 2, 2);
            } else if (tz.size() == 5 && digits(tz, 0, 2) && tz[2] == ':' && digits(tz, 3, 2)) {
                oh = to_int(tz, 0, 2);
                om = to_int(tz, 3, 2);
            } else {
                return std::nullopt;
            }
            if (oh > 23 || om > 59) return std::nullopt;
            offset = (c == '+' ? 1 : -1) * (oh * 3600L + om * 60L);
            pos = s.size();
        } else {
            return std::nullopt;
        }
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mm * 60 + ss - offset;
}

ParseResult parse_events(std::istream& in, Format format, std::string label) {
    if (!in.good() && !in.eof()) throw IoError("event stream is not readable");
    Collector out(std::move(label));
    if (format == Format::jsonl) {
        parse_jsonl(in, out);
    } else {
        if (in.peek() == std::char_traits<char>::eof()) return out.finish();
        parse_csv(in, out);
    }
    return out.finish();
}

ParseResult parse_events_file(const std::filesystem::path& path, std::optional<Format> format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open events file '" + path.string() + "'");
    const Format f = format.value_or(path.extension() == ".csv" ? Format::csv : Format::jsonl);
    return parse_events(in, f, path.stem().string());
}

std::size_t merge_into(EventDataset& base, EventDataset extra) {
    std::unordered_set<std::string> ids;
    for (const auto& p : base.posts) ids.insert(p.post_id);
    std::size_t dropped = 0;
    for (auto& p : extra.posts) {
        if (ids.insert(p.post_id).second) {
            base.posts.push_back(std::move(p));
        } else {
            ++dropped;
        }
    }
    for (auto& r : extra.interactions) base.interactions.push_back(std::move(r));
    sort_dataset(base);
    return dropped;
}

void sort_dataset(EventDataset& dataset) {
    std::sort(dataset.posts.begin(), dataset.posts.end(), [](const PostEvent& a, const PostEvent& b) {
        return std::tie(a.timestamp, a.post_id) < std::tie(b.timestamp, b.post_id);
    });
    std::sort(dataset.interactions.begin(), dataset.interactions.end(),
              [](const InteractionRecord& a, const InteractionRecord& b) {
                  return std::tie(a.timestamp, a.source_user, a.target_user, a.interaction_type) <
                         std::tie(b.timestamp, b.source_user, b.target_user, b.interaction_type);
              });
}

void write_jsonl(const EventDataset& dataset, std::ostream& out) {
    using ojson = nlohmann::ordered_json;
    for (const auto& p : dataset.posts) {
        ojson obj;
        obj["post_id"] = p.post_id;
        obj["user_id"] = p.user_id;
        obj["timestamp"] = p.timestamp;
        obj["post_type"] = to_string(p.post_type);
        if (p.lang) obj["lang"] = *p.lang;
        obj["hashtags"] = p.hashtags;
        obj["urls"] = p.urls;
        obj["mentions"] = p.mentions;
        out << obj.dump() << '\n';
    }
    for (const auto& r : dataset.interactions) {
        ojson obj;
        obj["source_user"] = r.source_user;
        obj["target_user"] = r.target_user;
        obj["interaction_type"] = to_string(r.interaction_type);
        obj["timestamp"] = r.timestamp;
        out << obj.dump() << '\n';
    }
}

void write_posts_csv(const EventDataset& dataset, std::ostream& out) {
    csv::write_row(out, {"post_id", "user_id", "timestamp", "post_type", "lang", "hashtags", "urls", "mentions"});
    for (const auto& p : dataset.posts) {
        csv::write_row(out, {p.post_id, p.user_id, std::to_string(p.timestamp), std::string(to_string(p.post_type)),
                             p.lang.value_or(""), join_pipe(p.hashtags), join_pipe(p.urls), join_pipe(p.mentions)});
    }
}

void write_interactions_csv(const EventDataset& dataset, std::ostream& out) {
    csv::write_row(out, {"source_user", "target_user", "interaction_type", "timestamp"});
    for (const auto& r : dataset.interactions) {
        csv::write_row(out, {r.source_user, r.target_user, std::string(to_string(r.interaction_type)),
                             std::to_string(r.timestamp)});
    }
}

EventDataset filter_originals(const EventDataset& dataset) {
    EventDataset out;
    out.label = dataset.label;
    out.interactions = dataset.interactions;
    for (const auto& p : dataset.posts)
        if (p.post_type == PostType::original) out.posts.push_back(p);
    return out;
}

EventDataset filter_language(const EventDataset& dataset, std::string_view lang, LanguageFilterStats* stats) {
    if (lang.empty()) return dataset;
    EventDataset out;
    out.label = dataset.label;
    out.interactions = dataset.interactions;
    LanguageFilterStats local;
    for (const auto& p : dataset.posts) {
        if (!p.lang) {
            ++local.missing_lang;
        } else if (*p.lang != lang) {
            ++local.other_lang;
        } else {
            out.posts.push_back(p);
        }
    }
    if (stats) *stats = local;
    return out;
}

std::string canonicalize_artifact(ActionType type, std::string_view raw) {
    std::string out;
    switch (type) {
    case ActionType::hashtag: out = canonical_tag(raw, '#'); break;
    case ActionType::mention: out = canonical_tag(raw, '@'); break;
    case ActionType::url: out = canonical_url(raw); break;
    }
    if (out.empty()) throw InvalidRecord("blank " + std::string(to_string(type)) + " artifact");
    return out;
}

std::vector<ActionRecord> extract_actions(const EventDataset& dataset) {
    std::vector<ActionRecord> out;
    for (const auto& p : dataset.posts) {
        for (ActionType a : kAllActionTypes) {
            std::set<std::string> seen;
            for (const auto& raw : p.artifacts(a)) seen.insert(canonicalize_artifact(a, raw));
            for (const auto& id : seen) out.push_back(ActionRecord{p.post_id, p.user_id, p.timestamp, a, id});
        }
    }
    return out;
}

} // namespace syncnet::ingest
