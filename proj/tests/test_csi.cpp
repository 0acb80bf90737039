#include "helpers.hpp"

#include "syncnet/csi.hpp"
#include "syncnet/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace syncnet;
using namespace syncnet::csi;

namespace {

const auto H = ActionType::hashtag;
const auto U = ActionType::url;
const auto M = ActionType::mention;

double pair_of(std::initializer_list<double> v, PairFormula f = PairFormula::anchored) {
    std::vector<double> x(v);
    return pair_score(x, f);
}

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("pair score examples under the default formula") {
    CHECK(near(pair_of({1, 0, 0}), 1.0));
    CHECK(near(pair_of({2, 3, 0}), 8.0));
    CHECK(near(pair_of({1, 1, 1}), 3.0));
}

TEST_CASE("prose and literal closed forms") {
    // prose: k(sum - k); literal: sum - k^2
    CHECK(near(pair_of({1, 0, 0}, PairFormula::prose), 0.0));
    CHECK(near(pair_of({2, 3, 0}, PairFormula::prose), 2.0 * (5 - 2)));
    CHECK(near(pair_of({1, 1, 1}, PairFormula::prose), 0.0));
    CHECK(near(pair_of({4, 0, 0}, PairFormula::prose), 3.0));
    CHECK(near(pair_of({1, 0, 0}, PairFormula::literal), 0.0));
    CHECK(near(pair_of({2, 3, 0}, PairFormula::literal), 5.0 - 4.0));
    CHECK(near(pair_of({1, 1, 1}, PairFormula::literal), 3.0 - 9.0));
    CHECK(near(pair_of({5, 2, 7}, PairFormula::literal), 14.0 - 9.0));
    CHECK(near(pair_of({5, 2, 7}, PairFormula::anchored), 3.0 * (14 - 2)));
}

TEST_CASE("csi_userpair via normalized counts") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("u", "v"), H, 2);
    c.add(UserPair::of("u", "v"), U, 3);
    auto n = normalize_counts(c, Normalization::none);
    CHECK(near(csi_userpair(n, UserPair::of("v", "u"), PairFormula::anchored), 8.0));
    CHECK_THROWS_AS(csi_userpair(n, UserPair::of("u", "w"), PairFormula::anchored), std::out_of_range);
}

TEST_CASE("normalize_counts") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("a", "b"), H, 2);
    c.add(UserPair::of("a", "c"), H, 4);
    c.add(UserPair::of("a", "c"), M, 7);
    auto none = normalize_counts(c, Normalization::none);
    CHECK(none.at(UserPair::of("a", "c"))[index_of(H)] == 4.0);
    auto mx = normalize_counts(c, Normalization::per_action_max);
    CHECK(mx.at(UserPair::of("a", "b"))[index_of(H)] == 0.5);
    CHECK(mx.at(UserPair::of("a", "c"))[index_of(H)] == 1.0);
    CHECK(mx.at(UserPair::of("a", "c"))[index_of(M)] == 1.0);
    CHECK(mx.at(UserPair::of("a", "c"))[index_of(U)] == 0.0);
}

TEST_CASE("csi_user and csi_network hand examples") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("u", "v"), H, 2); // S_total 2
    c.add(UserPair::of("u", "w"), H, 1); // S_total 1
    PairScores ps{{UserPair::of("u", "v"), 2.0}, {UserPair::of("u", "w"), 1.0}};
    auto us = csi_user(ps, c);
    CHECK(near(us.at("u"), 5.0));
    CHECK(near(us.at("v"), 4.0));
    CHECK(near(us.at("w"), 1.0));
    CHECK(near(csi_network(us), 10.0 / 3.0));
    CHECK(near(csi_network({{"x", 7.0}}), 7.0));
    CHECK(near(csi_network({{"x", 2.5}, {"y", 2.5}, {"z", 2.5}}), 2.5));
    CHECK_THROWS_AS(csi_network({}), UndefinedNetwork);
}

TEST_CASE("csi_single_action") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("a", "b"), H, 1);
    c.add(UserPair::of("c", "d"), H, 3);
    CHECK(near(csi_single_action(c, H), 5.0));
    CHECK(near(csi_single_action(c, H), *compute_csi(c).network_score));
    CHECK_THROWS_AS(csi_single_action(c, U), UndefinedNetwork);
    auto t = compute_csi(c);
    CHECK(t.per_action_network[index_of(H)].has_value());
    CHECK(!t.per_action_network[index_of(U)].has_value());
}

TEST_CASE("compute_csi on empty counts") {
    auto t = compute_csi({});
    CHECK(!t.network_score);
    CHECK(t.pair_scores.empty());
    CHECK(t.user_scores.empty());
}

TEST_CASE("default formula invariants on random tables") {
    testutil::Gen g(31);
    for (int round = 0; round < 200; ++round) {
        synchrony::PairSyncCounts c;
        const int pairs = static_cast<int>(g.range(1, 20));
        for (int i = 0; i < pairs; ++i) {
            const auto a = testutil::user_name(g.range(0, 9));
            auto b = testutil::user_name(g.range(0, 9));
            if (a == b) continue;
            c.add(UserPair::of(a, b), static_cast<ActionType>(g.range(0, 2)), static_cast<std::uint32_t>(g.range(1, 6)));
        }
        if (c.empty()) continue;
        auto t = compute_csi(c);
        double lo = 1e300, hi = -1e300;
        for (const auto& [u, s] : t.user_scores) {
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        CHECK(*t.network_score >= lo - 1e-9);
        CHECK(*t.network_score <= hi + 1e-9);
        CHECK(t.user_scores.size() == c.users().size());
        for (const auto& [pair, s] : t.pair_scores) CHECK(s >= synchrony::num_action_types(c.entries().at(pair)));
    }
}

TEST_CASE("formulas agree on ordering for equal breadth") {
    testutil::Gen g(4);
    for (int i = 0; i < 500; ++i) {
        const int k = static_cast<int>(g.range(1, 3));
        std::vector<double> x(3, 0.0), y(3, 0.0);
        for (int j = 0; j < k; ++j) {
            x[j] = static_cast<double>(g.range(1, 9));
            y[j] = static_cast<double>(g.range(1, 9));
        }
        const bool lt = pair_score(x, PairFormula::anchored) < pair_score(y, PairFormula::anchored);
        CHECK((pair_score(x, PairFormula::prose) < pair_score(y, PairFormula::prose)) == lt);
        CHECK((pair_score(x, PairFormula::literal) < pair_score(y, PairFormula::literal)) == lt);
    }
}

TEST_CASE("score csv round trips") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("a", "b"), H, 3);
    c.add(UserPair::of("a", "b"), M, 1);
    c.add(UserPair::of("b", "c"), U, 2);
    auto t = compute_csi(c, {PairFormula::anchored, Normalization::per_action_max});
    std::ostringstream ps, us;
    write_pair_scores_csv(t.pair_scores, c, ps);
    write_user_scores_csv(t.user_scores, us);
    CHECK(ps.str().rfind("user_u,user_v,num_action_types,s_total,csi_userpair\na,b,2,4,", 0) == 0);
    std::istringstream psi(ps.str()), usi(us.str());
    CHECK(read_pair_scores_csv(psi) == t.pair_scores);
    CHECK(read_user_scores_csv(usi) == t.user_scores);
}

TEST_CASE("network summary json") {
    synchrony::PairSyncCounts c;
    c.add(UserPair::of("a", "b"), H, 1);
    std::ostringstream out;
    write_network_summary_json(compute_csi(c), {}, out);
    const auto s = out.str();
    CHECK(s.find("\"csi_network\": 1") != std::string::npos);
    CHECK(s.find("\"formula\": \"anchored\"") != std::string::npos);
    CHECK(s.find("\"url\": null") != std::string::npos);
}

TEST_CASE("parse config names") {
    CHECK(parse_pair_formula("literal") == PairFormula::literal);
    CHECK(!parse_pair_formula("other"));
    CHECK(parse_normalization("per_action_max") == Normalization::per_action_max);
    CHECK(to_string(Normalization::none) == "none");
}
