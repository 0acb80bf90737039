#include "syncnet/types.hpp"

#include "syncnet/error.hpp"

namespace syncnet {

std::string_view to_string(ActionType a) {
    switch (a) {
    case ActionType::hashtag: return "hashtag";
    case ActionType::url: return "url";
    case ActionType::mention: return "mention";
    }
    return "?";
}

std::optional<ActionType> parse_action_type(std::string_view s) {
    if (s == "hashtag") return ActionType::hashtag;
    if (s == "url") return ActionType::url;
    if (s == "mention") return ActionType::mention;
    return std::nullopt;
}

std::string_view to_string(PostType t) {
    switch (t) {
    case PostType::original: return "original";
    case PostType::retweet: return "retweet";
    case PostType::quote: return "quote";
    case PostType::reply: return "reply";
    }
    return "?";
}

std::optional<PostType> parse_post_type(std::string_view s) {
    if (s == "original") return PostType::original;
    if (s == "retweet") return PostType::retweet;
    if (s == "quote") return PostType::quote;
    if (s == "reply") return PostType::reply;
    return std::nullopt;
}

std::string_view to_string(InteractionType t) {
    switch (t) {
    case InteractionType::retweet: return "retweet";
    case InteractionType::quote: return "quote";
    case InteractionType::mention: return "mention";
    case InteractionType::reply: return "reply";
    }
    return "?";
}

std::optional<InteractionType> parse_interaction_type(std::string_view s) {
    if (s == "retweet") return InteractionType::retweet;
    if (s == "quote") return InteractionType::quote;
    if (s == "mention") return InteractionType::mention;
    if (s == "reply") return InteractionType::reply;
    return std::nullopt;
}

std::string_view to_string(UserClass c) {
    switch (c) {
    case UserClass::bot: return "bot";
    case UserClass::human: return "human";
    case UserClass::unknown: return "unknown";
    }
    return "?";
}

std::optional<UserClass> parse_user_class(std::string_view s) {
    if (s == "bot") return UserClass::bot;
    if (s == "human") return UserClass::human;
    if (s == "unknown") return UserClass::unknown;
    return std::nullopt;
}

UserPair UserPair::of(UserId a, UserId b) {
    if (a == b) throw InvalidRecord("user pair requires two distinct users, got '" + a + "' twice");
    if (b < a) std::swap(a, b);
    return UserPair{std::move(a), std::move(b)};
}

} // namespace syncnet
