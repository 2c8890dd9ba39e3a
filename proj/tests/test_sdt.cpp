#include "dtvs/error.hpp"
#include "dtvs/sdt.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <set>

using namespace dtvs;

namespace
{

std::vector<BaseStation>
stations()
{
    return {{0, {333.0, 500.0}, 0}, {1, {667.0, 500.0}, 0}};
}

UserFeature
feature(UserId id, BsId bs, std::vector<double> values)
{
    return {id, bs, std::move(values)};
}

std::vector<UserFeature>
random_features(std::size_t n, Rng& rng)
{
    std::vector<UserFeature> out;
    for (UserId u = 0; u < n; ++u)
    {
        std::vector<double> v(kFeatureDims);
        for (double& x : v)
        {
            x = rng.uniform01();
        }
        out.push_back(feature(u, rng.below(2), v));
    }
    return out;
}

void
check_partition(const Grouping& g, std::span<const UserFeature> features)
{
    CHECK_NOTHROW(validate_grouping(g, features));
    const auto members = g.members();
    std::size_t total = 0;
    for (const auto& m : members)
    {
        CHECK_FALSE(m.empty());
        total += m.size();
    }
    CHECK(total == features.size());
}

std::vector<double>
as_vector(std::span<const double> s)
{
    return {s.begin(), s.end()};
}

} // namespace

TEST_CASE("features lie in the unit cube")
{
    Rng rng(1);
    for (int i = 0; i < 100; ++i)
    {
        UdtAbstraction a;
        a.user = 0;
        a.position = {rng.uniform(-50.0, 1100.0), rng.uniform(0.0, 1000.0)};
        a.path_loss_db = rng.uniform(60.0, 160.0);
        a.swipe.pmf.assign(kVideoTypes, std::vector<double>(16, 1.0 / 16.0));
        a.preference.fill(1.0 / kVideoTypes);
        const UserFeature f = make_feature(a, stations(), FeatureScales{});
        CHECK(f.values.size() == kFeatureDims);
        for (double v : f.values)
        {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(f.bs == nearest_bs(a.position, stations()));
    }
}

TEST_CASE("grouping validation")
{
    const std::vector<UserFeature> f{feature(0, 0, {}), feature(1, 0, {}), feature(2, 1, {})};
    Grouping ok{{0, 0, 1}, {0, 1}, {}};
    CHECK_NOTHROW(validate_grouping(ok, f));
    Grouping mixed{{0, 0, 0}, {0}, {}};
    CHECK_THROWS_AS(validate_grouping(mixed, f), Error);
    Grouping empty{{0, 0, 2}, {0, 0, 1}, {}};
    CHECK_THROWS_AS(validate_grouping(empty, f), Error);
    Grouping partial{{0, 0}, {0}, {}};
    CHECK_THROWS_AS(validate_grouping(partial, f), Error);

    const std::vector<std::pair<BsId, std::size_t>> keys{{1, 4}, {0, 9}, {1, 4}, {0, 2}};
    const Grouping g = grouping_from_keys(keys);
    CHECK(g.n_groups() == 3);
    CHECK(g.assignment == std::vector<GroupId>{2, 1, 2, 0});
    CHECK(g.group_bs == std::vector<BsId>{0, 0, 1});
    CHECK(g.group_label == std::vector<std::size_t>{2, 9, 4});
}

TEST_CASE("q table update and greedy ties")
{
    QTable t;
    CHECK(t.greedy(7, 4) == 0);
    t.update(7, 2, 1.0, 0.5);
    CHECK(t.value(7, 2) == 0.5);
    t.update(7, 2, 1.0, 0.5);
    CHECK(t.value(7, 2) == 0.75);
    CHECK(t.visits(7, 2) == 2);
    CHECK(t.greedy(7, 4) == 2);
    t.update(7, 1, 1.5, 0.5);
    CHECK(t.greedy(7, 4) == 1);
    t.update(7, 3, 1.5, 0.5);
    CHECK(t.greedy(7, 4) == 1);
    CHECK(t.greedy(8, 4) == 0);
}

TEST_CASE("two-arm bandit learns the better slot")
{
    const std::vector<UserFeature> f{feature(0, 0, std::vector<double>(kFeatureDims, 0.5))};
    RlParams p;
    p.g_max = 2;
    p.episodes = 200;
    p.learning_rate = 0.5;
    const UtilityFn reward = [](const Grouping& g) { return g.group_label[g.assignment[0]] == 0 ? 1.0 : 0.0; };
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        QTable table;
        Rng rng(seed);
        const Grouping g = cluster_rl(f, p, table, reward, rng);
        const std::uint64_t b = feature_bucket(f[0], p.bucket_bins);
        wins += g.group_label[0] == 0 && table.value(b, 0) > table.value(b, 1) ? 1 : 0;
    }
    CHECK(wins == 100);

    const UtilityFn mirrored = [](const Grouping& g) { return g.group_label[g.assignment[0]] == 1 ? 1.0 : 0.0; };
    int mirrored_wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
    {
        QTable table;
        Rng rng(seed);
        mirrored_wins += cluster_rl(f, p, table, mirrored, rng).group_label[0] == 1 ? 1 : 0;
    }
    CHECK(mirrored_wins == 100);
}

TEST_CASE("rl clustering edge cases")
{
    Rng rng(3);
    const auto f = random_features(10, rng);
    QTable table;
    RlParams p;
    const UtilityFn flat = [](const Grouping&) { return 0.0; };
    CHECK_THROWS_AS(cluster_rl(std::span<const UserFeature>{}, p, table, flat, rng), Error);

    p.g_max = 1;
    const Grouping single = cluster_rl(f, p, table, flat, rng);
    check_partition(single, f);
    std::set<BsId> bss;
    for (const auto& x : f)
    {
        bss.insert(x.bs);
    }
    CHECK(single.n_groups() == bss.size());

    p.g_max = 4;
    QTable fresh;
    const Grouping tied = cluster_rl(f, p, fresh, flat, rng);
    check_partition(tied, f);
    for (std::size_t g = 0; g < tied.n_groups(); ++g)
    {
        CHECK(tied.group_label[g] == 0);
    }
}

TEST_CASE("rl clustering is deterministic and valid")
{
    Rng data(9);
    const auto f = random_features(30, data);
    RlParams p;
    p.episodes = 4;
    const UtilityFn score = [](const Grouping& g) {
        return -std::abs(static_cast<double>(g.n_groups()) - 5.0);
    };
    QTable ta;
    QTable tb;
    Rng ra(11);
    Rng rb(11);
    const Grouping a = cluster_rl(f, p, ta, score, ra);
    const Grouping b = cluster_rl(f, p, tb, score, rb);
    check_partition(a, f);
    CHECK(a.assignment == b.assignment);
    CHECK(a.group_bs == b.group_bs);
    const Grouping ga = greedy_grouping(f, p, ta);
    CHECK(greedy_grouping(f, p, ta).assignment == ga.assignment);
    CHECK(ga.assignment == a.assignment);
}

TEST_CASE("dbscan basics")
{
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 5; ++i)
    {
        pts.push_back({0.01 * i, 0.0});
        pts.push_back({10.0 + 0.01 * i, 10.0});
    }
    const auto labels = dbscan_labels(pts, 0.1, 3);
    std::set<int> distinct(labels.begin(), labels.end());
    CHECK(distinct == std::set<int>{0, 1});

    std::vector<UserFeature> f;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        f.push_back(feature(i, 0, pts[i]));
    }
    CHECK(cluster_dbscan(f, 0.1, 3).n_groups() == 2);

    const std::vector<UserFeature> lone{feature(0, 0, {0.5, 0.5})};
    const Grouping g = cluster_dbscan(lone, 0.1, 2);
    CHECK(g.n_groups() == 1);
    CHECK(dbscan_labels(std::vector<std::vector<double>>{{0.5, 0.5}}, 0.1, 2)[0] == -1);

    CHECK(dbscan_labels(std::vector<std::vector<double>>{{0.0}, {1.0}}, 1.0, 2) == std::vector<int>{0, 0});
    CHECK_THROWS_AS(dbscan_labels(pts, 0.0, 2), Error);
}

TEST_CASE("dbscan matches the textbook labeling")
{
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<std::vector<double>> pts;
        for (int i = 0; i < 20; ++i)
        {
            pts.push_back({rng.uniform01(), rng.uniform01(), rng.uniform01()});
        }
        const double eps = rng.uniform(0.15, 0.4);
        const std::size_t min_pts = 2 + rng.below(3);
        CHECK(dbscan_labels(pts, eps, min_pts) == oracle::dbscan(pts, eps, min_pts));
    }
}

TEST_CASE("key heuristic groups by BS and top type")
{
    std::vector<UserFeature> same;
    for (UserId u = 0; u < 5; ++u)
    {
        std::vector<double> v(kFeatureDims, 0.0);
        v[2 + 4] = 0.6;
        same.push_back(feature(u, 1, v));
    }
    CHECK(cluster_heuristic(same).n_groups() == 1);

    std::vector<UserFeature> all;
    for (UserId u = 0; u < 32; ++u)
    {
        std::vector<double> v(kFeatureDims, 0.05);
        v[2 + (u % 8)] = 0.9;
        all.push_back(feature(u, (u / 8) % 2, v));
    }
    CHECK(cluster_heuristic(all).n_groups() == 16);

    std::vector<double> tie(kFeatureDims, 0.0);
    tie[2 + 3] = 0.4;
    tie[2 + 6] = 0.4;
    const std::vector<UserFeature> t{feature(0, 0, tie)};
    CHECK(cluster_heuristic(t).group_label[0] == 3);
}

TEST_CASE("every clusterer returns a valid partition")
{
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto f = random_features(1 + rng.below(40), rng);
        check_partition(cluster_heuristic(f), f);
        check_partition(cluster_dbscan(f, rng.uniform(0.2, 1.5), 1 + rng.below(4)), f);
        QTable table;
        RlParams p;
        p.episodes = 2;
        const UtilityFn u = [](const Grouping& g) { return static_cast<double>(g.n_groups() % 3); };
        check_partition(cluster_rl(f, p, table, u, rng), f);
    }
}

TEST_CASE("water-filling hand cases")
{
    const std::vector<SliceDemand> sym{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
    const SliceReservation a = reserve_convex(sym, 2.0, 2.0);
    CHECK(a.bandwidth_hz[0] == doctest::Approx(1.0));
    CHECK(a.bandwidth_hz[1] == doctest::Approx(1.0));

    const std::vector<SliceDemand> kkt{{1.0, 1.0, 2.0}, {1.0, 1.0, 1.0}};
    const SliceReservation b = reserve_convex(kkt, 2.0, 2.0);
    CHECK(std::abs(b.bandwidth_hz[0] - 5.0 / 3.0) <= 1e-6);
    CHECK(std::abs(b.bandwidth_hz[1] - 1.0 / 3.0) <= 1e-6);
    CHECK(std::abs(b.compute_ops[0] - 5.0 / 3.0) <= 1e-6);
    const std::vector<double> d{1.0, 1.0}, w{2.0, 1.0}, cap{2.0, 2.0};
    const double grid = oracle::grid_optimum(d, w, cap, 2.0, 2000);
    CHECK(reservation_objective(b.bandwidth_hz, d, w) >= grid - 1e-9);
    CHECK(reservation_objective(b.bandwidth_hz, d, w) - grid <= 1e-5);

    const SliceReservation zero = reserve_convex(kkt, 0.0, 0.0);
    CHECK(zero.bandwidth_hz == std::vector<double>{0.0, 0.0});

    const SliceReservation rich = reserve_convex(kkt, 100.0, 100.0, 2.0);
    CHECK(rich.bandwidth_hz == std::vector<double>{2.0, 2.0});

    CHECK_THROWS_AS(reserve_convex(std::vector<SliceDemand>{}, 1.0, 1.0), Error);
}

TEST_CASE("convex reservation against the grid oracle")
{
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial)
    {
        const std::size_t g = 1 + rng.below(5);
        std::vector<double> d(g), w(g), cap(g);
        std::vector<SliceDemand> demands;
        for (std::size_t i = 0; i < g; ++i)
        {
            d[i] = rng.uniform(0.2, 3.0);
            w[i] = static_cast<double>(1 + rng.below(10));
            cap[i] = 2.0 * d[i];
            demands.push_back({d[i], d[i], w[i]});
        }
        const double budget = rng.uniform(0.5, 8.0);
        const SliceReservation r = reserve_convex(demands, budget, budget);
        const double sum = std::accumulate(r.bandwidth_hz.begin(), r.bandwidth_hz.end(), 0.0);
        CHECK(sum <= budget * (1.0 + 1e-9));
        const double obj = reservation_objective(r.bandwidth_hz, d, w);
        const double grid = oracle::grid_optimum(d, w, cap, budget, 1000);
        CHECK(obj >= grid - 1e-6 * std::abs(grid));

        std::vector<SliceDemand> scaled = demands;
        for (auto& s : scaled)
        {
            s.weight *= 3.7;
        }
        const SliceReservation r2 = reserve_convex(scaled, budget, budget);
        for (std::size_t i = 0; i < g; ++i)
        {
            CHECK(r2.bandwidth_hz[i] == doctest::Approx(r.bandwidth_hz[i]).epsilon(1e-6));
            CHECK(r.bandwidth_hz[i] >= 0.0);
            CHECK(r.bandwidth_hz[i] <= cap[i] * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("branch and bound against exhaustive enumeration")
{
    const std::vector<SliceDemand> one{{0.6, 0.6, 1.0}};
    const SliceReservation whole = reserve_bnb(one, 1.0, 1.0, 2.0, 1.0, 1.0);
    CHECK(whole.bandwidth_hz[0] == 1.0);

    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial)
    {
        const std::size_t g = 1 + rng.below(3);
        const std::size_t points = 2 + rng.below(10);
        const double step = rng.uniform(0.1, 2.0);
        const double budget = step * static_cast<double>(points - 1);
        std::vector<double> d(g), w(g), cap(g);
        for (std::size_t i = 0; i < g; ++i)
        {
            d[i] = rng.uniform(0.1, 3.0) * step;
            w[i] = static_cast<double>(1 + rng.below(4));
            cap[i] = rng.uniform01() < 0.5 ? 2.0 * d[i] : budget;
        }
        const auto got = branch_and_bound(d, w, cap, budget, step);
        std::vector<double> arg;
        const double best = oracle::exhaustive_grid(d, w, cap, budget, step, arg);
        const double obj = reservation_objective(got, d, w);
        if (got == arg)
        {
            CHECK(obj == best);
        }
        else
        {
            CHECK(obj == doctest::Approx(best).epsilon(1e-12));
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < g; ++i)
        {
            const double units = got[i] / step;
            CHECK(std::abs(units - std::round(units)) <= 1e-9);
            sum += got[i];
        }
        CHECK(sum <= budget * (1.0 + 1e-12));
    }

    const std::vector<double> d{1.0, 1.0, 1.0}, w{1.0, 1.0, 1.0}, cap{10.0, 10.0, 10.0};
    const auto sym = branch_and_bound(d, w, cap, 10.0, 1.0);
    std::vector<double> arg;
    const double best = oracle::exhaustive_grid(d, w, cap, 10.0, 1.0, arg);
    CHECK(reservation_objective(sym, d, w) == doctest::Approx(best).epsilon(1e-12));

    CHECK_THROWS_AS(branch_and_bound(d, w, cap, 10.0, 1e-4), Error);
}

TEST_CASE("historical reservation")
{
    const std::vector<std::vector<double>> equal{{2.0, 4.0}, {3.0, 3.0}};
    const SliceReservation e = reserve_historical(equal, equal, 10.0, 20.0);
    CHECK(e.bandwidth_hz[0] == doctest::Approx(5.0));
    CHECK(e.compute_ops[1] == doctest::Approx(10.0));

    const std::vector<std::vector<double>> skew{{3.0}, {1.0}};
    const SliceReservation s = reserve_historical(skew, skew, 8.0, 8.0);
    CHECK(s.bandwidth_hz[0] == doctest::Approx(6.0));
    CHECK(s.bandwidth_hz[1] == doctest::Approx(2.0));

    const std::vector<std::vector<double>> none{{}, {}, {}, {}};
    const SliceReservation u = reserve_historical(none, none, 8.0, 4.0);
    for (std::size_t g = 0; g < 4; ++g)
    {
        CHECK(u.bandwidth_hz[g] == doctest::Approx(2.0));
        CHECK(u.compute_ops[g] == doctest::Approx(1.0));
    }

    const std::vector<std::vector<double>> partial{{4.0}, {}};
    const SliceReservation p = reserve_historical(partial, partial, 8.0, 8.0);
    CHECK(p.bandwidth_hz[0] == doctest::Approx(4.0));
    CHECK(as_vector(p.bandwidth_hz).size() == 2);
}
