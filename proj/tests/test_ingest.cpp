#include "helpers.hpp"

#include "syncnet/error.hpp"
#include "syncnet/ingest.hpp"

#include <doctest.h>

#include <sstream>

using namespace syncnet;
using namespace syncnet::ingest;

namespace {

ParseResult parse_jsonl(const std::string& text) {
    std::istringstream in(text);
    return parse_events(in, Format::jsonl, "t");
}

PostEvent post(std::string id, std::string user, Timestamp t, PostType type = PostType::original,
               std::optional<std::string> lang = std::nullopt) {
    PostEvent p;
    p.post_id = std::move(id);
    p.user_id = std::move(user);
    p.timestamp = t;
    p.post_type = type;
    p.lang = std::move(lang);
    return p;
}

} // namespace

TEST_CASE("canonicalize_artifact examples") {
    CHECK(canonicalize_artifact(ActionType::hashtag, "#StopTheSteal") == "stopthesteal");
    CHECK(canonicalize_artifact(ActionType::url, "HTTPS://Example.com/Path/") == "https://example.com/Path");
    CHECK(canonicalize_artifact(ActionType::mention, "@Alice") == "alice");
}

TEST_CASE("canonicalize_artifact url details") {
    CHECK(canonicalize_artifact(ActionType::url, "http://A.COM/x?Q=1#Frag") == "http://a.com/x?Q=1");
    CHECK(canonicalize_artifact(ActionType::url, "https://a.com///") == "https://a.com");
    CHECK(canonicalize_artifact(ActionType::url, "HTTP://User@Host.Org:80/A/B") == "http://user@host.org:80/A/B");
    CHECK(canonicalize_artifact(ActionType::hashtag, "  #Tag ") == "tag");
}

TEST_CASE("canonicalize_artifact rejects whitespace-only and empty") {
    CHECK_THROWS_AS(canonicalize_artifact(ActionType::hashtag, "   "), InvalidRecord);
    CHECK_THROWS_AS(canonicalize_artifact(ActionType::url, ""), InvalidRecord);
    CHECK_THROWS_AS(canonicalize_artifact(ActionType::mention, "@"), InvalidRecord);
}

TEST_CASE("canonicalize_artifact is idempotent") {
    testutil::Gen g(11);
    const std::string alphabet = "#@aAbB/:.?#xX  -_%";
    for (int i = 0; i < 3000; ++i) {
        std::string raw;
        const int len = static_cast<int>(g.range(1, 16));
        if (g.chance(0.5)) raw = g.chance(0.5) ? "HTTP://" : "https://Ex.COM";
        for (int k = 0; k < len; ++k) raw += alphabet[g.range(0, static_cast<std::int64_t>(alphabet.size()) - 1)];
        for (auto a : kAllActionTypes) {
            std::string once;
            try {
                once = canonicalize_artifact(a, raw);
            } catch (const InvalidRecord&) {
                continue;
            }
            CHECK(canonicalize_artifact(a, once) == once);
        }
    }
}

TEST_CASE("parse_events basic cases") {
    SUBCASE("one valid post") {
        auto r = parse_jsonl(R"({"post_id":"1","user_id":"u","timestamp":5,"post_type":"original","hashtags":["#a"],"urls":[],"mentions":[]})"
                             "\n");
        CHECK(r.dataset.posts.size() == 1);
        CHECK(r.stats.malformed == 0);
    }
    SUBCASE("empty stream") {
        auto r = parse_jsonl("");
        CHECK(r.dataset.posts.empty());
        CHECK(r.dataset.interactions.empty());
        CHECK(r.stats.malformed == 0);
    }
    SUBCASE("three valid plus one missing user_id") {
        auto r = parse_jsonl(
            R"({"post_id":"1","user_id":"u","timestamp":30,"post_type":"original","hashtags":[],"urls":[],"mentions":[]})"
            "\n"
            R"({"post_id":"2","user_id":"v","timestamp":20,"post_type":"retweet","hashtags":[],"urls":[],"mentions":[]})"
            "\n"
            R"({"post_id":"3","timestamp":25,"post_type":"original","hashtags":[],"urls":[],"mentions":[]})"
            "\n"
            R"({"post_id":"4","user_id":"w","timestamp":10,"post_type":"reply","hashtags":[],"urls":[],"mentions":[]})"
            "\n");
        CHECK(r.dataset.posts.size() == 3);
        CHECK(r.stats.malformed == 1);
        REQUIRE(r.dataset.posts.size() == 3);
        CHECK(r.dataset.posts[0].timestamp == 10);
        CHECK(r.dataset.posts[1].timestamp == 20);
        CHECK(r.dataset.posts[2].timestamp == 30);
    }
}

TEST_CASE("parse_events interactions, ISO timestamps, garbage lines") {
    auto r = parse_jsonl(
        R"({"source_user":"a","target_user":"b","interaction_type":"retweet","timestamp":"2021-01-06T14:05:00Z"})"
        "\n"
        R"({"post_id":"p","user_id":"a","timestamp":"2021-01-06T14:05:00.999+01:00","post_type":"original","lang":"en","hashtags":["#x"],"urls":["http://a.b/c"],"mentions":["@b"]})"
        "\n"
        "not json\n");
    REQUIRE(r.dataset.interactions.size() == 1);
    REQUIRE(r.dataset.posts.size() == 1);
    CHECK(r.stats.malformed == 1);
    CHECK(r.dataset.interactions[0].timestamp == 1609941900);
    CHECK(r.dataset.posts[0].timestamp == 1609941900 - 3600);
    CHECK(r.dataset.posts[0].lang == std::optional<std::string>("en"));
}

TEST_CASE("parse_events rejects a corpus that is mostly malformed") {
    CHECK_THROWS_AS(parse_jsonl("x\ny\n{\"post_id\":\"1\",\"user_id\":\"u\",\"timestamp\":1,\"post_type\":\"original\"}\n"),
                    CorpusRejected);
    // exactly half is tolerated
    CHECK_NOTHROW(parse_jsonl("x\n{\"post_id\":\"1\",\"user_id\":\"u\",\"timestamp\":1,\"post_type\":\"original\"}\n"));
}

TEST_CASE("parse_events marks invalid fields malformed") {
    auto r = parse_jsonl(
        R"({"post_id":"1","user_id":"u","timestamp":-5,"post_type":"original"})"
        "\n"
        R"({"post_id":"2","user_id":"u","timestamp":5,"post_type":"boost"})"
        "\n"
        R"({"post_id":"3","user_id":"u","timestamp":5,"post_type":"original","hashtags":["  "]})"
        "\n"
        R"({"post_id":"4","user_id":"u","timestamp":5,"post_type":"original"})"
        "\n"
        R"({"post_id":"4","user_id":"v","timestamp":6,"post_type":"original"})"
        "\n"
        R"({"post_id":"5","user_id":"u","timestamp":5,"post_type":"original"})"
        "\n"
        R"({"post_id":"6","user_id":"u","timestamp":5,"post_type":"original"})"
        "\n"
        R"({"post_id":"7","user_id":"u","timestamp":5,"post_type":"original"})"
        "\n");
    CHECK(r.stats.malformed == 4);
    CHECK(r.dataset.posts.size() == 4);
}

TEST_CASE("self-interactions are kept at ingest and dropped by the graph builder") {
    auto r = parse_jsonl(R"({"source_user":"a","target_user":"a","interaction_type":"retweet","timestamp":1})"
                         "\n"
                         R"({"source_user":"a","target_user":"b","interaction_type":"mention","timestamp":1})"
                         "\n");
    CHECK(r.dataset.interactions.size() == 2);
}

TEST_CASE("csv posts and interactions") {
    std::istringstream posts("post_id,user_id,timestamp,post_type,lang,hashtags,urls,mentions\n"
                             "p1,u1,10,original,en,#a|#B,http://x.y/z,@m\n"
                             "p2,u2,5,retweet,,,,\n"
                             "p3,,5,original,,,,\n");
    auto r = parse_events(posts, Format::csv, "c");
    REQUIRE(r.dataset.posts.size() == 2);
    CHECK(r.stats.malformed == 1);
    CHECK(r.dataset.posts[1].hashtags == std::set<std::string>{"#a", "#B"});
    CHECK(!r.dataset.posts[0].lang.has_value());

    std::istringstream inter("source_user,target_user,interaction_type,timestamp\na,b,quote,3\n");
    auto ri = parse_events(inter, Format::csv, "c");
    CHECK(ri.dataset.interactions.size() == 1);
}

TEST_CASE("jsonl and csv round trips") {
    EventDataset ds;
    ds.label = "rt";
    auto p1 = post("p1", "alice", 100, PostType::original, "en");
    p1.hashtags = {"#A", "#b"};
    p1.urls = {"http://x.org/a,b", "https://q.com/\"q\""};
    auto p2 = post("p2", "bob", 50, PostType::quote);
    p2.mentions = {"@alice"};
    ds.posts = {p1, p2};
    ds.interactions = {{"bob", "alice", InteractionType::quote, 50}, {"alice", "bob", InteractionType::mention, 10}};
    sort_dataset(ds);

    std::ostringstream j;
    write_jsonl(ds, j);
    std::istringstream jin(j.str());
    auto back = parse_events(jin, Format::jsonl, "rt");
    CHECK(back.dataset == ds);

    std::ostringstream pc, ic;
    write_posts_csv(ds, pc);
    write_interactions_csv(ds, ic);
    std::istringstream pin(pc.str()), iin(ic.str());
    auto bp = parse_events(pin, Format::csv, "rt");
    auto bi = parse_events(iin, Format::csv, "rt");
    merge_into(bp.dataset, std::move(bi.dataset));
    CHECK(bp.dataset == ds);
}

TEST_CASE("filter_originals") {
    EventDataset ds;
    ds.posts = {post("1", "a", 1), post("2", "a", 2, PostType::retweet), post("3", "a", 3, PostType::reply)};
    ds.interactions = {{"a", "b", InteractionType::retweet, 2}};
    auto f = filter_originals(ds);
    REQUIRE(f.posts.size() == 1);
    CHECK(f.posts[0].post_id == "1");
    CHECK(f.interactions == ds.interactions);
    CHECK(filter_originals(f) == f);

    EventDataset all_rt;
    all_rt.posts = {post("1", "a", 1, PostType::retweet)};
    all_rt.interactions = ds.interactions;
    auto e = filter_originals(all_rt);
    CHECK(e.posts.empty());
    CHECK(e.interactions.size() == 1);

    EventDataset originals;
    originals.posts = {post("1", "a", 1), post("2", "b", 2)};
    CHECK(filter_originals(originals) == originals);
}

TEST_CASE("filter_language") {
    EventDataset ds;
    ds.posts = {post("1", "a", 1, PostType::original, "en"), post("2", "a", 2, PostType::original, "fr"),
                post("3", "a", 3, PostType::original, "en")};
    CHECK(filter_language(ds, "en").posts.size() == 2);
    CHECK(filter_language(ds, "") == ds);

    EventDataset untagged;
    untagged.posts = {post("1", "a", 1), post("2", "b", 2)};
    LanguageFilterStats stats;
    CHECK(filter_language(untagged, "en", &stats).posts.empty());
    CHECK(stats.missing_lang == 2);
}

TEST_CASE("extract_actions") {
    EventDataset ds;
    auto p = post("1", "a", 1);
    p.hashtags = {"#a", "#A"};
    p.urls = {"http://x.com/"};
    ds.posts.push_back(p);
    auto acts = extract_actions(ds);
    REQUIRE(acts.size() == 2);
    CHECK(acts[0].action_type == ActionType::hashtag);
    CHECK(acts[0].artifact_id == "a");
    CHECK(acts[1].artifact_id == "http://x.com");

    EventDataset empty_post;
    empty_post.posts.push_back(post("1", "a", 1));
    CHECK(extract_actions(empty_post).empty());

    EventDataset two;
    auto q1 = post("1", "a", 1), q2 = post("2", "a", 2);
    q1.hashtags = {"#x"};
    q2.hashtags = {"#x"};
    two.posts = {q1, q2};
    CHECK(extract_actions(two).size() == 2);
}

TEST_CASE("extract_actions emits no duplicate (post, type, artifact)") {
    testutil::Gen g(5);
    EventDataset ds;
    for (int i = 0; i < 200; ++i) {
        auto p = post("p" + std::to_string(i), "u", i);
        for (int k = 0; k < 5; ++k) {
            const auto n = std::to_string(g.range(0, 3));
            p.hashtags.insert(g.chance(0.5) ? "#t" + n : "#T" + n);
            p.mentions.insert(g.chance(0.5) ? "@M" + n : "m" + n);
        }
        ds.posts.push_back(p);
    }
    auto acts = extract_actions(ds);
    std::set<std::tuple<std::string, ActionType, std::string>> seen;
    for (const auto& a : acts) CHECK(seen.insert({a.post_id, a.action_type, a.artifact_id}).second);
}

TEST_CASE("parse_timestamp forms") {
    CHECK(parse_timestamp("0") == 0);
    CHECK(parse_timestamp("1609459200") == 1609459200);
    CHECK(parse_timestamp("2021-01-01T00:00:00Z") == 1609459200);
    CHECK(parse_timestamp("2021-01-01T00:00:00.75Z") == 1609459200);
    CHECK(parse_timestamp("2021-01-01T02:00:00+02:00") == 1609459200);
    CHECK(parse_timestamp("2021-01-01 00:00:00") == 1609459200);
    CHECK(!parse_timestamp("2021-13-01T00:00:00Z"));
    CHECK(!parse_timestamp("yesterday"));
}
