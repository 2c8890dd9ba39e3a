#include "dtvs/error.hpp"
#include "dtvs/harness.hpp"

#include <doctest.h>

#include <sstream>

using namespace dtvs;

namespace
{

ScenarioConfig
small_config(std::size_t users, std::size_t windows)
{
    ScenarioConfig c = validate_scenario({{"network", {{"n_users", users}}},
                                          {"timing", {{"sim_windows", windows}, {"large_ts_s", 20.0}}},
                                          {"sdt", {{"rl_episodes", 2}}}});
    return c;
}

std::string
metrics_csv(const RunMetrics& m)
{
    std::ostringstream out;
    write_metrics_csv(out, m);
    return out.str();
}

std::size_t
line_count(const std::string& s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("one window yields one row per user")
{
    const ScenarioConfig c = small_config(12, 1);
    const RunMetrics m = run_experiment(c, {SchemeId::Heuristic}, {0});
    REQUIRE(m.windows.size() == 1);
    CHECK(m.windows[0].satisfaction.size() == 12);
    CHECK(line_count(metrics_csv(m)) == 2 + 12);
    CHECK(metrics_csv(m).rfind("# dtvs metrics schema 1\nscheme,seed,window,user,satisfaction,groups,bw_frac,"
                               "compute_frac,freshness,Q,R,V,error\n",
                               0) == 0);
}

TEST_CASE("every scheme and seed fills every window within capacity")
{
    const ScenarioConfig c = small_config(16, 3);
    const std::vector<SchemeId> schemes{SchemeId::Proposed, SchemeId::Optimization, SchemeId::Heuristic};
    const RunMetrics m = run_experiment(c, schemes, {1, 2});
    CHECK(m.errors.empty());
    CHECK(m.windows.size() == 3 * 2 * 3);
    for (const auto& w : m.windows)
    {
        CHECK(w.satisfaction.size() == 16);
        for (double s : w.satisfaction)
        {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0);
        }
        CHECK(w.groups >= 1);
        CHECK(w.groups <= 16);
        CHECK(w.reserved_bw_hz <= c.total_bandwidth_hz * (1.0 + 1e-9));
        CHECK(w.reserved_compute_ops <= c.total_compute_ops * (1.0 + 1e-9));
        CHECK(w.peak_slot_bw_hz <= c.total_bandwidth_hz * (1.0 + 1e-9));
        CHECK(w.peak_slot_compute_ops <= c.total_compute_ops * (1.0 + 1e-9));
        CHECK(w.worst_delivery_excess_bits <= 0.0);
        CHECK(w.freshness >= 0.0);
        CHECK(w.freshness <= 1.0);
        CHECK(w.cost == doctest::Approx(0.2));
        CHECK(w.value == doctest::Approx(w.freshness + w.utility - w.cost));
    }
    for (std::size_t i = 1; i < m.windows.size(); ++i)
    {
        const auto& a = m.windows[i - 1];
        const auto& b = m.windows[i];
        CHECK(std::make_tuple(static_cast<int>(a.scheme), a.seed, a.window) <
              std::make_tuple(static_cast<int>(b.scheme), b.seed, b.window));
    }
}

TEST_CASE("identical runs give identical CSV")
{
    const ScenarioConfig c = small_config(10, 2);
    const std::vector<SchemeId> schemes{SchemeId::Proposed, SchemeId::Heuristic};
    const RunMetrics a = run_experiment(c, schemes, {4});
    const RunMetrics b = run_experiment(c, schemes, {4});
    CHECK(metrics_csv(a) == metrics_csv(b));

    const RunMetrics alone = run_experiment(c, {SchemeId::Heuristic}, {4});
    std::ostringstream sa;
    std::ostringstream sb;
    for (const auto& w : a.windows)
    {
        if (w.scheme == SchemeId::Heuristic)
        {
            sa << w.utility << ',' << w.bw_frac << ';';
        }
    }
    for (const auto& w : alone.windows)
    {
        sb << w.utility << ',' << w.bw_frac << ';';
    }
    CHECK(sa.str() == sb.str());
}

TEST_CASE("a failing cell is recorded without stopping the others")
{
    ScenarioConfig c = small_config(8, 1);
    c.sdt.bnb_grid = 20000;
    const RunMetrics m = run_experiment(c, {SchemeId::Optimization, SchemeId::Heuristic}, {0});
    REQUIRE(m.errors.size() == 1);
    CHECK(m.errors[0].scheme == SchemeId::Optimization);
    CHECK(m.windows.size() == 1);
    const std::string csv = metrics_csv(m);
    CHECK(csv.find("optimization,0,,,,,,,,,,,GridTooFine") != std::string::npos);

    CHECK_THROWS_AS(run_experiment(c, {}, {0}), Error);
    CHECK_THROWS_AS(run_experiment(c, {SchemeId::Heuristic}, {}), Error);
}

TEST_CASE("trace rows and twin snapshots")
{
    const ScenarioConfig c = small_config(6, 2);
    RunOptions o;
    o.trace = true;
    const RunMetrics m = run_experiment(c, {SchemeId::Heuristic}, {3}, o);
    CHECK(m.trace.size() == 12);
    CHECK(m.udt_snapshots.size() == 1);
    std::ostringstream t;
    write_trace_csv(t, m);
    CHECK(line_count(t.str()) == 13);
    for (const auto& r : m.trace)
    {
        CHECK(r.stall_s >= 0.0);
    }
}

TEST_CASE("box statistics")
{
    const BoxStats s = summarize({5.0, 1.0, 3.0, 2.0, 4.0});
    CHECK(s.median == 3.0);
    CHECK(s.q1 == 2.0);
    CHECK(s.q3 == 4.0);
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);
    CHECK(s.mean == 3.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0)));

    const BoxStats flat = summarize({0.4, 0.4, 0.4});
    CHECK(flat.min == flat.q1);
    CHECK(flat.q1 == flat.median);
    CHECK(flat.median == flat.q3);
    CHECK(flat.q3 == flat.max);

    const std::vector<double> four{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(four, 0.25) == doctest::Approx(1.75));
    CHECK(quantile_sorted(four, 0.5) == doctest::Approx(2.5));

    Rng rng(1);
    std::vector<double> u(1000);
    for (double& x : u)
    {
        x = rng.uniform01();
    }
    CHECK(std::abs(summarize(u).median - 0.5) <= 0.03);

    CHECK_THROWS_AS(summarize({}), Error);
}

TEST_CASE("summary table covers every scheme")
{
    const ScenarioConfig c = small_config(6, 2);
    const RunMetrics m = run_experiment(c, {SchemeId::Optimization, SchemeId::Heuristic}, {0});
    std::ostringstream out;
    write_summary_csv(out, m);
    const std::string csv = out.str();
    CHECK(csv.find("optimization,satisfaction,12,") != std::string::npos);
    CHECK(csv.find("heuristic,consumption,2,") != std::string::npos);
    CHECK(csv.find("proposed") == std::string::npos);
}

TEST_CASE("world construction")
{
    const ScenarioConfig c = small_config(20, 1);
    const World a = build_world(c, 9);
    const World b = build_world(c, 9);
    REQUIRE(a.stations.size() == 2);
    CHECK(a.stations[0].position.x == doctest::Approx(1000.0 / 3.0));
    CHECK(a.stations[1].position.x == doctest::Approx(2000.0 / 3.0));
    CHECK(a.users.size() == 20);
    for (std::size_t u = 0; u < a.users.size(); ++u)
    {
        const auto& x = a.users[u];
        double sum = 0.0;
        for (double p : x.true_preference)
        {
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(x.speed_mps >= 2.0 / 3.6);
        CHECK(x.speed_mps <= 5.0 / 3.6);
        CHECK(x.position.x >= 0.0);
        CHECK(x.position.x <= 1000.0);
        CHECK(x.position.y >= 0.0);
        CHECK(x.position.y <= 1000.0);
        CHECK(x.position.x == b.users[u].position.x);
        CHECK(x.true_swipe[3].p == b.users[u].true_swipe[3].p);
    }
}
