#pragma once

#include "syncnet/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace syncnet::ingest {

struct PostEvent {
    std::string post_id;
    UserId user_id;
    Timestamp timestamp = 0;
    PostType post_type = PostType::original;
    std::optional<std::string> lang;
    std::set<std::string> hashtags;
    std::set<std::string> urls;
    std::set<std::string> mentions;

    const std::set<std::string>& artifacts(ActionType a) const;

    bool operator==(const PostEvent&) const = default;
};

struct InteractionRecord {
    UserId source_user;
    UserId target_user;
    InteractionType interaction_type = InteractionType::retweet;
    Timestamp timestamp = 0;

    bool operator==(const InteractionRecord&) const = default;
};

struct ActionRecord {
    std::string post_id;
    UserId user_id;
    Timestamp timestamp = 0;
    ActionType action_type = ActionType::hashtag;
    std::string artifact_id; // canonical form

    bool operator==(const ActionRecord&) const = default;
};

// Posts are kept sorted by (timestamp, post_id) and interactions by
// (timestamp, source, target, type) once a dataset leaves the parser.
struct EventDataset {
    std::string label;
    std::vector<PostEvent> posts;
    std::vector<InteractionRecord> interactions;

    // All users that authored a post or took part in an interaction.
    std::set<UserId> users() const;

    bool operator==(const EventDataset&) const = default;
};

enum class Format { jsonl, csv };

std::optional<Format> parse_format(std::string_view s);

struct ParseStats {
    std::size_t records = 0;   // non-blank lines seen
    std::size_t posts = 0;
    std::size_t interactions = 0;
    std::size_t malformed = 0; // includes duplicate post ids
    std::vector<std::string> errors; // first few diagnostics, "line N: reason"
};

struct ParseResult {
    EventDataset dataset;
    ParseStats stats;
};

// Parses line-delimited records. A CSV stream holds either posts (header has
// post_id) or interactions (header has source_user). Malformed lines are
// counted, not fatal, unless they exceed half of the records, in which case
// CorpusRejected is thrown.
ParseResult parse_events(std::istream& in, Format format, std::string label = {});

// Opens `path` and parses it; the format follows the extension (.csv, else
// JSONL) unless given. Throws IoError if the file cannot be read.
ParseResult parse_events_file(const std::filesystem::path& path, std::optional<Format> format = {});

// Appends `extra` into `base` and restores the sort order. Duplicate post ids
// across the two are dropped from `extra` and counted in the return value.
std::size_t merge_into(EventDataset& base, EventDataset extra);

// Restores the canonical order of posts and interactions.
void sort_dataset(EventDataset& dataset);

void write_jsonl(const EventDataset& dataset, std::ostream& out);
void write_posts_csv(const EventDataset& dataset, std::ostream& out);
void write_interactions_csv(const EventDataset& dataset, std::ostream& out);

// Parses an epoch integer or an ISO-8601 date-time ("2021-01-06T14:05:00Z",
// offsets and fractional seconds accepted, fraction truncated).
std::optional<Timestamp> parse_timestamp(std::string_view text);

EventDataset filter_originals(const EventDataset& dataset);

struct LanguageFilterStats {
    std::size_t missing_lang = 0;
    std::size_t other_lang = 0;
};

// Keeps posts whose lang tag equals `lang`. An empty code disables the filter.
EventDataset filter_language(const EventDataset& dataset, std::string_view lang,
                             LanguageFilterStats* stats = nullptr);

// hashtag/mention: surrounding whitespace trimmed, leading '#'/'@' stripped,
// ASCII-lowercased. url: scheme and host lowercased, fragment and trailing
// slashes removed, path and query kept byte-exact. Throws InvalidRecord when
// nothing is left.
std::string canonicalize_artifact(ActionType type, std::string_view raw);

// One record per (post, action type, distinct canonical artifact), in post
// order.
std::vector<ActionRecord> extract_actions(const EventDataset& dataset);

} // namespace syncnet::ingest
