#include "dtvs/domain.hpp"
#include "dtvs/error.hpp"
#include "dtvs/rng.hpp"

#include <doctest.h>

#include <fstream>

using namespace dtvs;
using nlohmann::json;

namespace
{

ErrorCode
code_of(const json& raw)
{
    try
    {
        validate_scenario(raw);
    }
    catch (const Error& e)
    {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

} // namespace

TEST_CASE("defaults describe two BSs and sixty users")
{
    const ScenarioConfig c = validate_scenario(json::object());
    CHECK(c.n_users == 60);
    CHECK(c.n_bs == 2);
    CHECK(c.tx_power_dbm == 27.0);
    CHECK(c.noise_density_dbm_hz == -174.0);
    CHECK(c.speed_min_kmh == 2.0);
    CHECK(c.speed_max_kmh == 5.0);
    CHECK(c.catalog.count == 1000);
    CHECK(c.catalog.duration_s == 15.0);
    CHECK(c.catalog.ladder_bps.size() == 4);
    CHECK(c.catalog.ladder_bps.back() == 45e6);
    CHECK(c.slots_per_window() == 60);
}

TEST_CASE("scenario validation errors")
{
    CHECK(code_of({{"timing", {{"small_ts_s", 7.0}, {"large_ts_s", 60.0}}}}) == ErrorCode::InconsistentTimescales);
    CHECK(code_of({{"resources", {{"total_bandwidth_hz", 0.0}}}}) == ErrorCode::OutOfRange);
    CHECK(code_of({{"resources", {{"total_compute_ops", -1.0}}}}) == ErrorCode::OutOfRange);
    CHECK(code_of({{"network", {{"n_users", nullptr}}}}) == ErrorCode::MissingField);
    CHECK(code_of({{"network", {{"speed_kmh", {2.0}}}}}) == ErrorCode::MissingField);
    CHECK(code_of({{"network", {{"speed_kmh", {5.0, 2.0}}}}}) == ErrorCode::OutOfRange);
    CHECK(code_of({{"network", {{"bogus", 1}}}}) == ErrorCode::UnknownKey);
    CHECK(code_of({{"bogus", 1}}) == ErrorCode::UnknownKey);
    CHECK(code_of({{"timing", {{"tick_s", 0.3}}}}) == ErrorCode::InconsistentTimescales);
    CHECK(code_of({{"abstraction_level", 4}}) == ErrorCode::OutOfRange);
    CHECK(code_of({{"algorithm", "greedy"}}) == ErrorCode::OutOfRange);
    CHECK(code_of({{"network", {{"n_users", "many"}}}}) == ErrorCode::OutOfRange);
}

TEST_CASE("scenario round trip through its JSON form")
{
    ScenarioConfig c = validate_scenario({{"seed", 11}, {"network", {{"n_users", 12}}}, {"algorithm", "heuristic"}});
    const json j = scenario_to_json(c);
    const ScenarioConfig back = validate_scenario(j);
    CHECK(back.seed == 11);
    CHECK(back.n_users == 12);
    CHECK(back.algorithm == SchemeId::Heuristic);
    CHECK(scenario_to_json(back) == j);
}

TEST_CASE("scenario file loading")
{
    const std::string path = "dtvs_test_scenario.json";
    {
        std::ofstream f(path);
        f << R"({"network": {"n_users": 9}, "timing": {"sim_windows": 2}})";
    }
    const ScenarioConfig c = load_scenario_file(path);
    CHECK(c.n_users == 9);
    CHECK(c.sim_windows == 2);
    CHECK_THROWS_AS(load_scenario_file("does/not/exist.json"), Error);
    std::remove(path.c_str());
}

TEST_CASE("catalog is round robin over eight types")
{
    Rng rng(3);
    const VideoCatalog cat = build_catalog(CatalogParams{}, rng);
    REQUIRE(cat.videos.size() == 1000);
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        CHECK(cat.by_type[t].size() == 125);
    }
    for (const Video& v : cat.videos)
    {
        CHECK(v.versions.size() == 4);
        CHECK(v.duration_s == 15.0);
        CHECK(v.n_segments() == 15);
        for (std::size_t i = 1; i < v.versions.size(); ++i)
        {
            CHECK(v.versions[i] > v.versions[i - 1]);
        }
        CHECK(v.compute_cost[3] == doctest::Approx(20.0 * 45e6 * 1.0));
    }
    CHECK(cat.type_names[0] == "Entertainment");
    CHECK(cat.type_names[7] == "News");

    CatalogParams eight;
    eight.count = 8;
    Rng r2(1);
    const VideoCatalog small = build_catalog(eight, r2);
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        CHECK(small.by_type[t].size() == 1);
    }
}

TEST_CASE("catalog rejects a bad ladder and is seed deterministic")
{
    CatalogParams p;
    p.ladder_bps = {45e6, 15e6, 4.5e6, 1.5e6};
    Rng rng(0);
    CHECK_THROWS_AS(build_catalog(p, rng), Error);
    p.ladder_bps = {};
    CHECK_THROWS_AS(build_catalog(p, rng), Error);

    Rng a(42);
    Rng b(42);
    const VideoCatalog ca = build_catalog(CatalogParams{}, a);
    const VideoCatalog cb = build_catalog(CatalogParams{}, b);
    for (std::size_t i = 0; i < ca.videos.size(); ++i)
    {
        CHECK(ca.videos[i].popularity == cb.videos[i].popularity);
        CHECK(ca.videos[i].type_index == cb.videos[i].type_index);
    }
    CHECK(ca.by_type == cb.by_type);
}

TEST_CASE("short video service profile")
{
    const ServiceProfile p = service_profile(ServiceKind::ShortVideo);
    CHECK(p.required_rate_bps == 45e6);
    CHECK(p.latency_budget_s >= 1.0);
    CHECK(p.has(ServiceComponent::Segments));
    for (ServiceKind k : {ServiceKind::ShortVideo, ServiceKind::ImmersiveVR, ServiceKind::Holographic})
    {
        CHECK(service_profile(k).required_rate_bps > 0.0);
        CHECK(service_profile(k).latency_budget_s > 0.0);
    }
}

TEST_CASE("abstraction level and scheme names")
{
    CHECK_THROWS_AS(AbstractionLevel(-1), Error);
    CHECK(AbstractionLevel(3).value() == 3);
    CHECK(parse_scheme("proposed") == SchemeId::Proposed);
    CHECK(parse_scheme("optimization") == SchemeId::Optimization);
    CHECK(parse_scheme("heuristic") == SchemeId::Heuristic);
    CHECK(to_string(SchemeId::Optimization) == "optimization");
}

TEST_CASE("resource schedule reset")
{
    ResourceSchedule s;
    s.reset(3, 60);
    CHECK(s.bandwidth.size() == 3);
    CHECK(s.compute.front().size() == 60);
    CHECK(s.caching.cached(0, 0, s.caching.edge_node));
}

TEST_CASE("rng substreams are independent and reproducible")
{
    Rng a = Rng::derive(5, "swipe", 1);
    Rng b = Rng::derive(5, "swipe", 1);
    Rng c = Rng::derive(5, "swipe", 2);
    Rng d = Rng::derive(5, "mobility", 1);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(x != d.next_u64());
    Rng u(9);
    for (int i = 0; i < 1000; ++i)
    {
        const double v = u.uniform01();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(u.below(7) < 7);
    }
}
