#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace syncnet {

using UserId = std::string;
using Timestamp = std::int64_t; // seconds since the Unix epoch, UTC

enum class ActionType : std::uint8_t { hashtag = 0, url = 1, mention = 2 };

inline constexpr std::size_t kNumActionTypes = 3;
inline constexpr std::array<ActionType, kNumActionTypes> kAllActionTypes = {
    ActionType::hashtag, ActionType::url, ActionType::mention};

constexpr std::size_t index_of(ActionType a) { return static_cast<std::size_t>(a); }

std::string_view to_string(ActionType a);
std::optional<ActionType> parse_action_type(std::string_view s);

enum class PostType : std::uint8_t { original, retweet, quote, reply };

std::string_view to_string(PostType t);
std::optional<PostType> parse_post_type(std::string_view s);

enum class InteractionType : std::uint8_t { retweet, quote, mention, reply };

std::string_view to_string(InteractionType t);
std::optional<InteractionType> parse_interaction_type(std::string_view s);

enum class UserClass : std::uint8_t { bot, human, unknown };

std::string_view to_string(UserClass c);
std::optional<UserClass> parse_user_class(std::string_view s);

// Unordered user pair stored with first < second (byte-wise).
struct UserPair {
    UserId first;
    UserId second;

    // Throws InvalidRecord when a == b.
    static UserPair of(UserId a, UserId b);

    bool contains(const UserId& u) const { return first == u || second == u; }
    const UserId& other(const UserId& u) const { return u == first ? second : first; }

    auto operator<=>(const UserPair&) const = default;
    bool operator==(const UserPair&) const = default;
};

} // namespace syncnet
