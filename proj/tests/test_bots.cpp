#include "helpers.hpp"

#include "syncnet/bots.hpp"
#include "syncnet/error.hpp"
#include "syncnet/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace syncnet;
using namespace syncnet::bots;

namespace {

BotScoreTable table(std::initializer_list<std::pair<const char*, double>> rows) {
    BotScoreTable t;
    for (const auto& [u, s] : rows) t.set(u, s);
    return t;
}

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("classify_user threshold is strict") {
    CHECK(classify_user(0.71) == UserClass::bot);
    CHECK(classify_user(0.70) == UserClass::human);
    CHECK(classify_user(0.0) == UserClass::human);
    CHECK(classify_user(1.0) == UserClass::bot);
    CHECK_THROWS_AS(classify_user(1.01), InvalidRecord);
    CHECK_THROWS_AS(classify_user(-0.1), InvalidRecord);
    CHECK_THROWS_AS(classify_user(std::nan("")), InvalidRecord);
}

TEST_CASE("table lookups and unknown users") {
    auto t = table({{"a", 0.9}, {"b", 0.2}});
    CHECK(t.classify("a") == UserClass::bot);
    CHECK(t.classify("b") == UserClass::human);
    CHECK(t.classify("zz") == UserClass::unknown);
    CHECK(!t.score("zz"));
    CHECK_THROWS_AS(t.set("c", 2.0), InvalidRecord);
}

TEST_CASE("threshold boundaries reclassify everyone") {
    auto t = table({{"a", 0.9}, {"b", 0.2}, {"c", 0.5}});
    for (const auto& [u, c] : t.with_threshold(1.0).classes()) CHECK(c == UserClass::human);
    for (const auto& [u, c] : t.with_threshold(0.1).classes()) CHECK(c == UserClass::bot);
}

TEST_CASE("bot score csv") {
    std::istringstream in("user_id,score\na,0.9\nb,0.70\nc,nope\nd,1.5\ne,0.71\n");
    BotScoreTable::ReadStats st;
    auto t = BotScoreTable::read_csv(in, kDefaultThreshold, &st);
    CHECK(st.rows == 5);
    CHECK(st.rejected == 2);
    CHECK(t.size() == 3);
    CHECK(t.classify("b") == UserClass::human);
    CHECK(t.classify("e") == UserClass::bot);
    std::ostringstream out;
    t.write_csv(out);
    std::istringstream back(out.str());
    auto t2 = BotScoreTable::read_csv(back);
    CHECK(t2.classes() == t.classes());
    CHECK(t2.score("a") == t.score("a"));

    std::istringstream nohead("a,0.9\n");
    CHECK_THROWS_AS(BotScoreTable::read_csv(nohead), ParseError);
}

TEST_CASE("pair classes") {
    auto t = table({{"b1", 0.9}, {"b2", 0.8}, {"h1", 0.1}, {"h2", 0.3}});
    CHECK(classify_pair(t, UserPair::of("b1", "b2")) == PairClass::bot_bot);
    CHECK(classify_pair(t, UserPair::of("h1", "b2")) == PairClass::bot_human);
    CHECK(classify_pair(t, UserPair::of("b2", "h1")) == PairClass::bot_human);
    CHECK(classify_pair(t, UserPair::of("h1", "h2")) == PairClass::human_human);
    CHECK(classify_pair(t, UserPair::of("h1", "x")) == PairClass::unknown_involved);
    CHECK(to_string(PairClass::bot_human) == "bot-human");
}

TEST_CASE("average_csi_by_pair_class") {
    auto t = table({{"b1", 0.9}, {"b2", 0.8}, {"h1", 0.1}, {"h2", 0.3}});
    csi::PairScores ps{{UserPair::of("b1", "b2"), 2.0}, {UserPair::of("b1", "h1"), 4.0},
                       {UserPair::of("h1", "h2"), 3.0}};
    auto r = average_csi_by_pair_class(ps, t);
    CHECK(r.by_class.at(PairClass::bot_bot).mean == 2.0);
    CHECK(r.by_class.at(PairClass::bot_human).mean == 4.0);
    CHECK(r.by_class.at(PairClass::human_human).mean == 3.0);
    CHECK(!r.by_class.contains(PairClass::unknown_involved));

    auto single = average_csi_by_pair_class({{UserPair::of("h1", "h2"), 1.0}}, t);
    CHECK(single.by_class.size() == 1);
}

TEST_CASE("pair classes partition the pairs") {
    testutil::Gen g(17);
    BotScoreTable t;
    for (int i = 0; i < 12; ++i)
        if (g.chance(0.8)) t.set(testutil::user_name(i), g.unit());
    csi::PairScores ps;
    for (int i = 0; i < 40; ++i) {
        auto a = testutil::user_name(g.range(0, 11)), b = testutil::user_name(g.range(0, 11));
        if (a != b) ps[UserPair::of(a, b)] = 1.0 + g.unit();
    }
    auto r = average_csi_by_pair_class(ps, t);
    std::size_t sum = 0;
    for (const auto& [c, m] : r.by_class) sum += m.count;
    CHECK(sum == ps.size());
    CHECK(r.total_pairs == ps.size());
}

TEST_CASE("average_csi_by_user_class") {
    auto t = table({{"b1", 0.9}, {"b2", 0.8}, {"h1", 0.1}});
    auto r = average_csi_by_user_class({{"b1", 2.0}, {"b2", 4.0}, {"h1", 3.0}, {"x", 100.0}}, t);
    CHECK(near(r.by_class.at(UserClass::bot).mean, 3.0));
    CHECK(near(r.by_class.at(UserClass::bot).sd, 1.0));
    CHECK(near(r.by_class.at(UserClass::human).mean, 3.0));
    CHECK(near(r.by_class.at(UserClass::human).sd, 0.0));
    CHECK(r.unknown == 1);

    auto one = average_csi_by_user_class({{"h1", 7.5}}, t);
    CHECK(one.by_class.size() == 1);
    CHECK(one.by_class.at(UserClass::human).mean == 7.5);
    CHECK(one.by_class.at(UserClass::human).sd == 0.0);
}

TEST_CASE("centrality_by_class on a four-user fixture") {
    // star b1 - {h1, h2, b2}; n = 4
    graph::GraphBuilder gb;
    gb.add_edge("b1", "h1", 1);
    gb.add_edge("b1", "h2", 1);
    gb.add_edge("b1", "b2", 1);
    auto g = gb.build();
    auto t = table({{"b1", 0.9}, {"b2", 0.95}, {"h1", 0.1}, {"h2", 0.2}});
    auto r = centrality_by_class(g, t, {"b1", "b2", "h1", "h2"});
    // degrees/(n-1): b1 1, others 1/3. betweenness: b1 1, others 0.
    // eigenvector of a 3-leaf star: center 1, leaves 1/sqrt3.
    CHECK(r.at(UserClass::bot).users == 2);
    CHECK(near(r.at(UserClass::bot).total_degree, (1.0 + 1.0 / 3) / 2));
    CHECK(near(r.at(UserClass::bot).betweenness, 0.5));
    CHECK(near(r.at(UserClass::bot).eigenvector, (1.0 + 1.0 / std::sqrt(3.0)) / 2, 1e-7));
    CHECK(near(r.at(UserClass::human).total_degree, 1.0 / 3));
    CHECK(near(r.at(UserClass::human).betweenness, 0.0));
    CHECK(near(r.at(UserClass::human).eigenvector, 1.0 / std::sqrt(3.0), 1e-7));

    // only synchronizing users count
    auto only_h = centrality_by_class(g, t, {"h1"});
    CHECK(!only_h.contains(UserClass::bot));
    CHECK(only_h.at(UserClass::human).users == 1);
}

TEST_CASE("clustering_by_class") {
    graph::GraphBuilder gb;
    gb.add_edge("b1", "b2", 1);
    gb.add_edge("b2", "b3", 1);
    gb.add_edge("b1", "b3", 1);
    gb.add_edge("h1", "h2", 1);
    gb.add_edge("h2", "h3", 1);
    gb.add_edge("b1", "h1", 1);
    auto g = gb.build();
    auto t = table({{"b1", 0.9}, {"b2", 0.9}, {"b3", 0.9}, {"h1", 0.1}, {"h2", 0.1}, {"h3", 0.1}});
    auto r = clustering_by_class(g, t);
    CHECK(r.at(UserClass::bot) == 1.0);
    CHECK(r.at(UserClass::human) == 0.0);
    CHECK(r.at(UserClass::bot) == metrics::transitivity(graph::induced_subgraph(g.with_classes(t.classes()), UserClass::bot)));

    auto humans_only = table({{"b1", 0.1}, {"b2", 0.1}, {"b3", 0.1}, {"h1", 0.1}, {"h2", 0.1}, {"h3", 0.1}});
    CHECK(!clustering_by_class(g, humans_only).contains(UserClass::bot));
}
