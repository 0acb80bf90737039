#include "helpers.hpp"

#include "syncnet/error.hpp"
#include "syncnet/pipeline.hpp"
#include "syncnet/simulate.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace syncnet;
using namespace syncnet::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

simulate::SimOutput cohort_sim(UserClass cls, std::uint64_t seed = 1) {
    simulate::SimConfig c;
    c.seed = seed;
    c.background.users = 80;
    c.duration_seconds = 12 * 3600;
    simulate::CohortConfig co;
    co.user_class = cls;
    c.cohorts.push_back(co);
    return simulate::generate(c);
}

void write_report(const fs::path& p, const std::string& label, std::optional<double> csi) {
    nlohmann::ordered_json j;
    j["event_label"] = label;
    if (csi) j["csi_network_combined"] = *csi;
    std::ofstream(p) << j.dump(2);
}

} // namespace

TEST_CASE("dominant class follows the planted cohort") {
    for (auto cls : {UserClass::bot, UserClass::human}) {
        auto s = cohort_sim(cls);
        auto r = analyze(s.dataset, s.bot_scores, {});
        CHECK(r.report["dominant_sync_class"] == std::string(to_string(cls)));
        CHECK(r.report.contains("csi_network_combined"));
    }
}

TEST_CASE("no synchrony gives a reason instead of a network score") {
    ingest::EventDataset ds;
    ingest::PostEvent p;
    p.post_id = "1";
    p.user_id = "a";
    p.hashtags = {"#x"};
    ds.posts.push_back(p);
    p.post_id = "2";
    p.user_id = "b";
    p.timestamp = 1000;
    ds.posts.push_back(p);
    auto r = analyze(ds, std::nullopt, {});
    CHECK(!r.report.contains("csi_network_combined"));
    CHECK(r.report.contains("no_synchrony_reason"));
    CHECK(r.report["action_type_participation"].empty());
    CHECK(!r.report.contains("avg_csi_user_by_user_class"));
    const auto notices = r.report["notices"].dump();
    CHECK(notices.find("no bot scores supplied") != std::string::npos);
    CHECK_NOTHROW(dump_report(r.report));
}

TEST_CASE("report without bots omits class sections") {
    auto s = cohort_sim(UserClass::human);
    auto r = analyze(s.dataset, std::nullopt, {});
    for (const char* key : {"avg_csi_userpair_by_pair_class", "avg_csi_user_by_user_class", "centrality_by_class",
                            "dominant_sync_class"})
        CHECK(!r.report.contains(key));
    CHECK(!r.report["structure"].contains("clustering_by_class"));
}

TEST_CASE("fractions sum to one and numbers are finite") {
    auto s = cohort_sim(UserClass::bot, 4);
    auto r = analyze(s.dataset, s.bot_scores, {});
    double sum = 0.0;
    for (const auto& [k, v] : r.report["action_type_participation"].items()) sum += v["fraction"].get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    std::function<void(const nlohmann::ordered_json&)> finite = [&](const nlohmann::ordered_json& j) {
        if (j.is_number_float()) CHECK(std::isfinite(j.get<double>()));
        if (j.is_structured())
            for (const auto& el : j) finite(el);
    };
    finite(r.report);
}

TEST_CASE("report network score agrees with the user csv") {
    auto s = cohort_sim(UserClass::bot, 6);
    TempDir dir("syncnet_pipeline_consistency");
    auto r = analyze(s.dataset, s.bot_scores, {});
    write_outputs(r, dir.path);
    std::ifstream users(dir.path / "csi_users.csv");
    const auto scores = csi::read_user_scores_csv(users);
    double sum = 0.0;
    for (const auto& [u, v] : scores) sum += v;
    const double mean = sum / static_cast<double>(scores.size());
    const auto report = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(std::abs(report["csi_network_combined"].get<double>() - report_precision(mean)) <= 1e-9);
    for (const char* f : {"pair_counts.csv", "csi_pairs.csv", "csi_network.json", "sync_graph.graphml",
                          "sync_graph_pruned.graphml", "metrics.json", "allcomm_graph.graphml",
                          "allcomm_centrality.csv", "centrality_by_action_types.csv"})
        CHECK(fs::exists(dir.path / f));
}

TEST_CASE("run_pipeline is deterministic and thread independent") {
    auto s = cohort_sim(UserClass::human, 8);
    TempDir dir("syncnet_pipeline_det");
    {
        std::ofstream ev(dir.path / "events.jsonl");
        ingest::write_jsonl(s.dataset, ev);
        std::ofstream b(dir.path / "bots.csv");
        s.bot_scores.write_csv(b);
    }
    PipelineConfig one, many;
    many.workers = 4;
    const auto a = dump_report(run_pipeline(dir.path / "events.jsonl", dir.path / "bots.csv", one).report);
    const auto b = dump_report(run_pipeline(dir.path / "events.jsonl", dir.path / "bots.csv", one).report);
    const auto c = dump_report(run_pipeline(dir.path / "events.jsonl", dir.path / "bots.csv", many).report);
    CHECK(a == b);
    CHECK(a == c);
    CHECK_THROWS_AS(run_pipeline(dir.path / "missing.jsonl", std::nullopt, one), IoError);
    CHECK_THROWS_AS(run_pipeline(dir.path / "events.jsonl", dir.path / "missing.csv", one), IoError);
}

TEST_CASE("language filter applies before detection") {
    auto s = cohort_sim(UserClass::human, 2);
    PipelineConfig cfg;
    cfg.lang = "fr";
    auto r = analyze(s.dataset, s.bot_scores, cfg);
    CHECK(r.report["input"]["posts_analyzed"] == 0);
    CHECK(r.report.contains("no_synchrony_reason"));
}

TEST_CASE("report_precision keeps six significant digits") {
    CHECK(report_precision(10.0 / 3.0) == 3.33333);
    CHECK(report_precision(123456789.0) == 123457000.0);
    CHECK(report_precision(0.0) == 0.0);
    CHECK(dump_report({{"x", 1.0 / 3.0}}) == "{\n  \"x\": 0.333333\n}\n");
}

TEST_CASE("compare ranks ascending with label ties") {
    TempDir dir("syncnet_compare");
    write_report(dir.path / "a.json", "COVID", 2.57);
    write_report(dir.path / "b.json", "US", 33.73);
    write_report(dir.path / "c.json", "Capitol", 9.05);
    auto r = compare({dir.path / "a.json", dir.path / "b.json", dir.path / "c.json"});
    REQUIRE(r.size() == 3);
    CHECK(r[0].csi_network == 2.57);
    CHECK(r[1].csi_network == 9.05);
    CHECK(r[2].csi_network == 33.73);

    CHECK(compare({dir.path / "a.json"}).size() == 1);

    write_report(dir.path / "t1.json", "zeta", 5.0);
    write_report(dir.path / "t2.json", "alpha", 5.0);
    auto ties = compare({dir.path / "t1.json", dir.path / "t2.json"});
    CHECK(ties[0].label == "alpha");
    CHECK(ties[1].label == "zeta");
}

TEST_CASE("compare names the malformed report") {
    TempDir dir("syncnet_compare_bad");
    std::ofstream(dir.path / "broken.json") << "{ not json";
    write_report(dir.path / "empty.json", "none", std::nullopt);
    write_report(dir.path / "ok.json", "ok", 1.0);
    try {
        compare({dir.path / "ok.json", dir.path / "broken.json"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
    }
    CHECK_THROWS_AS(compare({dir.path / "ok.json", dir.path / "empty.json"}), ParseError);
}
