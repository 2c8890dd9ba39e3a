#include "dtvs/harness.hpp"

#include "dtvs/error.hpp"
#include "dtvs/idt.hpp"
#include "dtvs/kpi.hpp"
#include "dtvs/rng.hpp"
#include "dtvs/sdt.hpp"
#include "dtvs/udt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace dtvs
{

namespace
{

constexpr std::size_t kHistoryWindows = 5;

Point
clamp_to_area(Point p, double area)
{
    return {std::clamp(p.x, 0.0, area), std::clamp(p.y, 0.0, area)};
}

Point
point_in_disk(Point centre, double radius, Rng& rng)
{
    const double r = radius * std::sqrt(rng.uniform01());
    const double a = 2.0 * std::numbers::pi * rng.uniform01();
    return {centre.x + r * std::cos(a), centre.y + r * std::sin(a)};
}

struct Cohort
{
    Preference preference{};
    std::array<SwipeParams, kVideoTypes> swipe{};
};

Cohort
make_cohort(Rng& rng)
{
    Cohort c;
    const std::size_t first = rng.below(kVideoTypes);
    std::size_t second = rng.below(kVideoTypes - 1);
    if (second >= first)
    {
        ++second;
    }
    double total = 0.0;
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        c.preference[t] = 0.04 + 0.1 * rng.uniform01();
        if (t == first)
        {
            c.preference[t] += 0.6;
        }
        else if (t == second)
        {
            c.preference[t] += 0.25;
        }
        total += c.preference[t];
    }
    for (double& p : c.preference)
    {
        p /= total;
    }
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        c.swipe[t].p = rng.uniform(0.08, 0.5);
        c.swipe[t].q = rng.uniform(0.05, 0.4);
    }
    return c;
}

} // namespace

World
build_world(const ScenarioConfig& config, std::uint64_t seed)
{
    World world;
    Rng catalog_rng = Rng::derive(seed, "catalog");
    world.catalog = build_catalog(config.catalog, catalog_rng);

    for (std::size_t b = 0; b < config.n_bs; ++b)
    {
        const double x = config.area_m * static_cast<double>(b + 1) / static_cast<double>(config.n_bs + 1);
        world.stations.push_back({b, {x, config.area_m / 2.0}, b});
    }

    Rng rng = Rng::derive(seed, "world");
    std::vector<Cohort> cohorts;
    for (std::size_t c = 0; c < config.n_cohorts; ++c)
    {
        cohorts.push_back(make_cohort(rng));
    }
    for (UserId u = 0; u < config.n_users; ++u)
    {
        UserState user;
        user.id = u;
        const BaseStation& home = world.stations[u % config.n_bs];
        for (std::size_t w = 0; w < std::max<std::size_t>(1, config.waypoints); ++w)
        {
            user.path.push_back(clamp_to_area(point_in_disk(home.position, config.user_radius_m, rng), config.area_m));
        }
        user.position = user.path.front();
        user.next_waypoint = user.path.size() > 1 ? 1 : 0;
        user.speed_mps = rng.uniform(config.speed_min_kmh, config.speed_max_kmh) / 3.6;
        user.cohort = rng.below(config.n_cohorts);
        const Cohort& c = cohorts[user.cohort];
        double total = 0.0;
        for (std::size_t t = 0; t < kVideoTypes; ++t)
        {
            user.true_preference[t] = c.preference[t] * std::exp(0.2 * rng.normal());
            total += user.true_preference[t];
        }
        for (double& p : user.true_preference)
        {
            p /= total;
        }
        for (std::size_t t = 0; t < kVideoTypes; ++t)
        {
            user.true_swipe[t].p = std::clamp(c.swipe[t].p + 0.03 * rng.normal(), 0.02, 0.95);
            user.true_swipe[t].q = std::clamp(c.swipe[t].q + 0.03 * rng.normal(), 0.0, 0.9);
        }
        user.shadowing_db = config.shadowing_sigma_db * rng.normal();
        user.serving_bs = nearest_bs(user.position, world.stations);
        world.users.push_back(std::move(user));
    }
    return world;
}

namespace
{

double
user_path_loss(const UserState& user, const BaseStation& bs)
{
    return path_loss(distance(user.position, bs.position)) + user.shadowing_db;
}

void
sync_periodic(UdtPool& pool, const UserState& user, std::span<const BaseStation> stations, double now)
{
    if (pool.due(Attribute::Position, now))
    {
        pool.ingest(Attribute::Position, now, user.position);
    }
    if (pool.due(Attribute::ChannelQuality, now))
    {
        pool.ingest(Attribute::ChannelQuality, now, user_path_loss(user, stations[user.serving_bs]));
    }
}

/// Event timestamps must increase per attribute; a view finishing at the
/// same instant as the previous one is nudged forward.
double
event_time(const UdtPool& pool, Attribute attribute, double t)
{
    if (pool.has_sync(attribute) && t <= pool.last_sync(attribute))
    {
        return std::nextafter(pool.last_sync(attribute), std::numeric_limits<double>::infinity());
    }
    return t;
}

void
ingest_view(UdtPool& pool, double time, std::size_t type, std::size_t outcome, double watch_s)
{
    pool.ingest(Attribute::SwipeEvents, event_time(pool, Attribute::SwipeEvents, time), SwipeObservation{type, outcome});
    pool.ingest(Attribute::PreferenceSignals, event_time(pool, Attribute::PreferenceSignals, time),
                WatchSignal{type, watch_s});
}

/// Past viewing sampled from the ground truth, stamped before t = 0.
void
warm_up(UdtPool& pool, const UserState& user, const VideoCatalog& catalog, std::size_t events, Rng& rng)
{
    const std::size_t s = catalog.n_segments();
    const double seg = catalog.videos.front().segment_len_s;
    for (std::size_t i = 0; i < events; ++i)
    {
        const double t = -static_cast<double>(events - i) * 10.0;
        const std::size_t type = rng.categorical(user.true_preference);
        const std::size_t outcome = generate_swipe(user.true_swipe[type], s, rng);
        const std::size_t watched = std::min(outcome, s);
        ingest_view(pool, t, type, outcome, static_cast<double>(watched) * seg);
    }
}

std::vector<double>
series_between(const TimeSeries<double>& series, double from, double to)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < series.size(); ++i)
    {
        if (series[i].time >= from && series[i].time < to)
        {
            out.push_back(series[i].value);
        }
    }
    return out;
}

std::vector<double>
coordinate_between(const TimeSeries<Point>& series, double from, double to, bool x)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < series.size(); ++i)
    {
        if (series[i].time >= from && series[i].time < to)
        {
            out.push_back(x ? series[i].value.x : series[i].value.y);
        }
    }
    return out;
}

double
drift_or_zero(const std::vector<double>& previous, const std::vector<double>& recent)
{
    if (previous.empty() || recent.empty())
    {
        return 0.0;
    }
    return distribution_drift(previous, recent);
}

/// Importance of the periodic attributes from the population's latest
/// position and channel, then a per-user period from importance and drift.
void
adapt_periods(std::vector<UdtPool>& pools, const UdtParams& params, double window_start, double window_end)
{
    const std::size_t n = pools.size();
    if (n < 2)
    {
        return;
    }
    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), 3);
    for (std::size_t u = 0; u < n; ++u)
    {
        const auto i = static_cast<Eigen::Index>(u);
        data(i, 0) = pools[u].positions().back().value.x;
        data(i, 1) = pools[u].positions().back().value.y;
        data(i, 2) = pools[u].channel().back().value;
    }
    const std::vector<double> imp = feature_importance_pca(data, params.pca_variance);
    double pos_imp = std::max(imp[0], imp[1]);
    double ch_imp = imp[2];
    const double top = std::max(pos_imp, ch_imp);
    if (top > 0.0)
    {
        pos_imp /= top;
        ch_imp /= top;
    }
    const double len = window_end - window_start;
    for (auto& pool : pools)
    {
        const double from = window_start - len;
        const double dx = drift_or_zero(coordinate_between(pool.positions(), from, window_start, true),
                                        coordinate_between(pool.positions(), window_start, window_end, true));
        const double dy = drift_or_zero(coordinate_between(pool.positions(), from, window_start, false),
                                        coordinate_between(pool.positions(), window_start, window_end, false));
        const double dc = drift_or_zero(series_between(pool.channel(), from, window_start),
                                        series_between(pool.channel(), window_start, window_end));
        pool.set_collection_period(Attribute::Position,
                                   adapt_collection_period(pos_imp, std::max(dx, dy), params.period_min_s,
                                                           params.period_max_s));
        pool.set_collection_period(Attribute::ChannelQuality,
                                   adapt_collection_period(ch_imp, dc, params.period_min_s, params.period_max_s));
    }
}

using HistoryKey = std::pair<BsId, std::size_t>;

struct TrafficHistory
{
    std::deque<double> bits_per_s;
    std::deque<double> ops_per_s;
};

} // namespace

RunMetrics
run_cell(const ScenarioConfig& config, SchemeId scheme, std::uint64_t seed, const RunOptions& options)
{
    RunMetrics out;
    World world = build_world(config, seed);
    const VideoCatalog& catalog = world.catalog;
    const std::size_t n = world.users.size();
    const std::size_t segments = catalog.n_segments();
    const double window_s = config.large_ts_s;
    const double max_segment_bits = catalog.videos.front().segment_bits(catalog.ladder().size() - 1);

    std::vector<WatchSampler> truth;
    truth.reserve(n);
    for (const auto& u : world.users)
    {
        truth.push_back(WatchSampler::from_params(u.true_swipe, segments));
    }

    std::vector<UdtPool> pools;
    pools.reserve(n);
    {
        Rng history = Rng::derive(seed, "history");
        for (const auto& u : world.users)
        {
            pools.emplace_back(config.udt.capacity, config.small_ts_s);
            warm_up(pools.back(), u, catalog, config.udt.history_events, history);
            sync_periodic(pools.back(), u, world.stations, -config.small_ts_s);
        }
    }

    QTable qtable;
    RlParams rl;
    rl.g_max = config.sdt.g_max;
    rl.episodes = config.sdt.rl_episodes;
    rl.learning_rate = config.sdt.learning_rate;
    rl.epsilon_start = config.sdt.epsilon_start;
    rl.epsilon_end = config.sdt.epsilon_end;
    rl.bucket_bins = config.sdt.bucket_bins;

    FeatureScales scales{config.area_m, config.tx_power_dbm, config.noise_density_dbm_hz, 1e6};

    EmulationSettings emu;
    emu.catalog = &catalog;
    emu.total_bandwidth_hz = config.total_bandwidth_hz;
    emu.total_compute_ops = config.total_compute_ops;
    emu.horizon_s = config.emulation_horizon_s();
    emu.slot_s = config.small_ts_s;
    emu.tick_s = config.emulation.tick_s;
    emu.buffer_segments = config.buffer_segments;
    emu.tx_dbm = config.tx_power_dbm;
    emu.noise_dbm_hz = config.noise_density_dbm_hz;
    emu.ops_per_bit = config.catalog.ops_per_bit;
    emu.headroom = config.sdt.headroom;
    emu.stall_penalty = config.kpi.stall_penalty;
    emu.consumption_weight = config.kpi.consumption_weight;
    emu.seed = config.emulation.seed;

    std::map<HistoryKey, TrafficHistory> traffic;

    for (std::size_t w = 0; w < config.sim_windows; ++w)
    {
        const double t0 = static_cast<double>(w) * window_s;

        // user twins -> abstractions -> slice twin features
        std::vector<UdtAbstraction> twins;
        std::vector<UserFeature> features;
        twins.reserve(n);
        features.reserve(n);
        for (UserId u = 0; u < n; ++u)
        {
            twins.push_back(abstract_user(u, pools[u], segments, config.udt.smoothing));
            features.push_back(make_feature(twins.back(), world.stations, scales));
        }

        Grouping grouping;
        switch (scheme)
        {
        case SchemeId::Proposed: {
            TwinEmulator emulator(twins, emu);
            Rng rl_rng = Rng::derive(seed, "rl", w);
            grouping = cluster_rl(features, rl, qtable,
                                  [&emulator](const Grouping& g) { return emulator.utility(g); }, rl_rng);
            break;
        }
        case SchemeId::Optimization:
            grouping = cluster_dbscan(features, config.sdt.dbscan_eps, config.sdt.dbscan_min_pts);
            break;
        case SchemeId::Heuristic:
            grouping = cluster_heuristic(features);
            break;
        }
        validate_grouping(grouping, features);
        const auto members = grouping.members();
        const std::size_t n_groups = grouping.n_groups();

        DemandParams dp;
        dp.reference_bandwidth_hz = config.total_bandwidth_hz / static_cast<double>(n_groups);
        dp.tx_dbm = config.tx_power_dbm;
        dp.noise_dbm_hz = config.noise_density_dbm_hz;
        dp.ops_per_bit = config.catalog.ops_per_bit;
        dp.max_bandwidth_hz = config.total_bandwidth_hz;
        dp.recommend_k = config.sdt.recommend_k;
        std::vector<GroupDemand> demands;
        std::vector<SliceDemand> slices;
        for (GroupId g = 0; g < n_groups; ++g)
        {
            demands.push_back(aggregate_group_demand(g, twins, members[g], catalog, dp));
            slices.push_back(demands.back().slice_demand());
        }

        std::vector<HistoryKey> keys(n_groups);
        for (GroupId g = 0; g < n_groups; ++g)
        {
            keys[g] = {grouping.group_bs[g], grouping.group_label[g]};
        }

        SliceReservation reservation;
        switch (scheme)
        {
        case SchemeId::Proposed:
            reservation = reserve_convex(slices, config.total_bandwidth_hz, config.total_compute_ops,
                                         config.sdt.headroom);
            break;
        case SchemeId::Optimization: {
            const double grid = static_cast<double>(config.sdt.bnb_grid);
            reservation = reserve_bnb(slices, config.total_bandwidth_hz, config.total_compute_ops,
                                      config.sdt.headroom, config.total_bandwidth_hz / grid,
                                      config.total_compute_ops / grid);
            break;
        }
        case SchemeId::Heuristic: {
            std::vector<std::vector<double>> bits(n_groups);
            std::vector<std::vector<double>> ops(n_groups);
            for (GroupId g = 0; g < n_groups; ++g)
            {
                auto it = traffic.find(keys[g]);
                if (it != traffic.end())
                {
                    bits[g].assign(it->second.bits_per_s.begin(), it->second.bits_per_s.end());
                    ops[g].assign(it->second.ops_per_s.begin(), it->second.ops_per_s.end());
                }
            }
            reservation = reserve_historical(bits, ops, config.total_bandwidth_hz, config.total_compute_ops);
            break;
        }
        }
        BacklogAllocator allocator = allocate_small_timescale(reservation, demands);

        // physical network
        std::vector<GroupSession> sessions;
        for (GroupId g = 0; g < n_groups; ++g)
        {
            sessions.push_back({g, grouping.group_bs[g], members[g], demands[g].feed_weights});
        }
        std::vector<Viewer> viewers(n);
        for (UserId u = 0; u < n; ++u)
        {
            const BsId bs = grouping.group_bs[grouping.assignment[u]];
            viewers[u] = {u, user_path_loss(world.users[u], world.stations[bs]), &truth[u]};
        }
        PlaybackSettings ps;
        ps.catalog = &catalog;
        ps.window_s = window_s;
        ps.slot_s = config.small_ts_s;
        ps.tick_s = config.tick_s;
        ps.buffer_segments = config.buffer_segments;
        ps.start_time_s = t0;
        ps.tx_dbm = config.tx_power_dbm;
        ps.noise_dbm_hz = config.noise_density_dbm_hz;
        ps.ops_per_bit = config.catalog.ops_per_bit;

        SlotHook hook = [&](double t, std::span<Viewer> vs) {
            for (UserId u = 0; u < n; ++u)
            {
                if (t > 0.0)
                {
                    world.users[u] = step_mobility(world.users[u], config.small_ts_s, world.stations);
                }
                const BsId bs = grouping.group_bs[grouping.assignment[u]];
                vs[u].path_loss_db = user_path_loss(world.users[u], world.stations[bs]);
                sync_periodic(pools[u], world.users[u], world.stations, t0 + t);
            }
        };
        ResourceSchedule schedule;
        schedule.level = config.abstraction;
        Rng play_rng = Rng::derive(seed, "playback", w);
        PlaybackReport report = simulate_window(viewers, sessions, allocator, ps, play_rng, &schedule, hook);
        for (auto& u : world.users)
        {
            u = step_mobility(u, config.small_ts_s, world.stations);
        }

        // user twins learn from the window's views
        for (const UserPlayback& up : report.users)
        {
            for (const ViewEvent& v : up.views)
            {
                ingest_view(pools[up.user], v.time_s, v.type, v.outcome(segments),
                            static_cast<double>(v.watched) * catalog.videos[v.video].segment_len_s);
            }
        }

        // KPIs
        WindowMetrics m;
        m.scheme = scheme;
        m.seed = seed;
        m.window = w;
        m.groups = n_groups;
        m.satisfaction.reserve(n);
        for (UserId u = 0; u < n; ++u)
        {
            m.satisfaction.push_back(user_satisfaction(report, u, catalog.ladder(), config.kpi.stall_penalty));
        }
        const ResourceUsage usage = measure_usage(report, config.total_bandwidth_hz, config.total_compute_ops);
        m.bw_frac = usage.bandwidth_fraction;
        m.compute_frac = usage.compute_fraction;
        const double t_end = t0 + window_s;
        double fresh = 0.0;
        for (const auto& pool : pools)
        {
            fresh += freshness_ratio(freshness_state(pool, t_end, window_s, config.udt.required_sync_hz));
        }
        m.freshness = fresh / static_cast<double>(n);
        m.utility = system_utility(m.satisfaction, usage.bandwidth_fraction * config.total_bandwidth_hz,
                                   config.total_bandwidth_hz, usage.compute_fraction * config.total_compute_ops,
                                   config.total_compute_ops, config.kpi.consumption_weight);
        m.cost = operation_cost(config.abstraction, config.kpi.op_cost);
        m.value = holistic_dt_value(config.kpi.weights, m.freshness, m.utility, m.cost);

        for (GroupId g = 0; g < n_groups; ++g)
        {
            m.reserved_bw_hz += reservation.bandwidth_hz[g];
            m.reserved_compute_ops += reservation.compute_ops[g];
            const GroupPlayback& gp = report.groups[g];
            m.worst_delivery_excess_bits = std::max(m.worst_delivery_excess_bits,
                                                    gp.bits_sent - gp.link_capacity_bits - max_segment_bits);
        }
        const std::size_t slots = schedule.bandwidth.empty() ? 0 : schedule.bandwidth.front().size();
        for (std::size_t s = 0; s < slots; ++s)
        {
            double bw = 0.0;
            double cpu = 0.0;
            for (GroupId g = 0; g < n_groups; ++g)
            {
                bw += schedule.bandwidth[g][s];
                cpu += schedule.compute[g][s];
            }
            m.peak_slot_bw_hz = std::max(m.peak_slot_bw_hz, bw);
            m.peak_slot_compute_ops = std::max(m.peak_slot_compute_ops, cpu);
        }
        out.windows.push_back(std::move(m));

        if (options.trace)
        {
            for (const UserPlayback& up : report.users)
            {
                TraceRow row{scheme, seed, w, up.user, up.group, up.delivered(), up.stall_time_s, 0, 0};
                for (const ViewEvent& v : up.views)
                {
                    (v.completed ? row.completions : row.swipes) += 1;
                }
                out.trace.push_back(row);
            }
        }

        // historical traffic for the key-based reservation
        for (GroupId g = 0; g < n_groups; ++g)
        {
            TrafficHistory& h = traffic[keys[g]];
            h.bits_per_s.push_back(report.groups[g].bits_sent / window_s);
            h.ops_per_s.push_back(report.groups[g].ops_used / window_s);
            while (h.bits_per_s.size() > kHistoryWindows)
            {
                h.bits_per_s.pop_front();
                h.ops_per_s.pop_front();
            }
        }

        adapt_periods(pools, config.udt, t0, t_end);
    }

    if (options.trace)
    {
        std::ostringstream snap;
        write_udt_snapshot(snap, pools, static_cast<double>(config.sim_windows) * window_s, window_s);
        out.udt_snapshots.push_back(snap.str());
    }
    return out;
}

RunMetrics
run_experiment(const ScenarioConfig& config,
               const std::vector<SchemeId>& schemes,
               const std::vector<std::uint64_t>& seeds,
               const RunOptions& options)
{
    if (schemes.empty() || seeds.empty())
    {
        throw Error(ErrorCode::OutOfRange, "need at least one scheme and one seed");
    }
    RunMetrics all;
    for (SchemeId scheme : schemes)
    {
        for (std::uint64_t seed : seeds)
        {
            try
            {
                RunMetrics cell = run_cell(config, scheme, seed, options);
                all.windows.insert(all.windows.end(), cell.windows.begin(), cell.windows.end());
                all.trace.insert(all.trace.end(), cell.trace.begin(), cell.trace.end());
                all.udt_snapshots.insert(all.udt_snapshots.end(), cell.udt_snapshots.begin(),
                                         cell.udt_snapshots.end());
            }
            catch (const std::exception& e)
            {
                all.errors.push_back({scheme, seed, 0, e.what()});
            }
        }
    }
    auto key = [](const auto& r) { return std::make_tuple(static_cast<int>(r.scheme), r.seed, r.window); };
    std::stable_sort(all.windows.begin(), all.windows.end(),
                     [&](const WindowMetrics& a, const WindowMetrics& b) { return key(a) < key(b); });
    std::stable_sort(all.trace.begin(), all.trace.end(), [&](const TraceRow& a, const TraceRow& b) {
        return std::make_tuple(static_cast<int>(a.scheme), a.seed, a.window, a.user) <
               std::make_tuple(static_cast<int>(b.scheme), b.seed, b.window, b.user);
    });
    return all;
}

// ---------------------------------------------------------------------------
// Statistics

double
quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty())
    {
        throw Error(ErrorCode::EmptyMetrics, "quantile of nothing");
    }
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

BoxStats
summarize(std::vector<double> values)
{
    if (values.empty())
    {
        throw Error(ErrorCode::EmptyMetrics, "no values to summarize");
    }
    std::sort(values.begin(), values.end());
    BoxStats s;
    s.count = values.size();
    s.min = values.front();
    s.max = values.back();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    double sum = 0.0;
    for (double v : values)
    {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values)
    {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

std::vector<double>
satisfaction_values(const RunMetrics& metrics, SchemeId scheme)
{
    std::vector<double> v;
    for (const auto& w : metrics.windows)
    {
        if (w.scheme == scheme)
        {
            v.insert(v.end(), w.satisfaction.begin(), w.satisfaction.end());
        }
    }
    return v;
}

std::vector<double>
consumption_values(const RunMetrics& metrics, SchemeId scheme)
{
    std::vector<double> v;
    for (const auto& w : metrics.windows)
    {
        if (w.scheme == scheme)
        {
            v.push_back(w.consumption());
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// CSV

namespace
{

std::string
num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string
csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
    {
        return s;
    }
    std::string q = "\"";
    for (char c : s)
    {
        if (c == '"')
        {
            q += '"';
        }
        q += c == '\n' ? ' ' : c;
    }
    return q + "\"";
}

std::vector<SchemeId>
schemes_present(const RunMetrics& metrics)
{
    std::vector<SchemeId> out;
    for (SchemeId s : {SchemeId::Proposed, SchemeId::Optimization, SchemeId::Heuristic})
    {
        bool found = std::any_of(metrics.windows.begin(), metrics.windows.end(),
                                 [s](const WindowMetrics& w) { return w.scheme == s; });
        if (found)
        {
            out.push_back(s);
        }
    }
    return out;
}

} // namespace

void
write_metrics_csv(std::ostream& out, const RunMetrics& metrics)
{
    out << "# dtvs metrics schema " << kMetricsSchemaVersion << "\n";
    out << "scheme,seed,window,user,satisfaction,groups,bw_frac,compute_frac,freshness,Q,R,V,error\n";
    for (const auto& w : metrics.windows)
    {
        const std::string tail = "," + std::to_string(w.groups) + "," + num(w.bw_frac) + "," + num(w.compute_frac) +
                                 "," + num(w.freshness) + "," + num(w.utility) + "," + num(w.cost) + "," +
                                 num(w.value) + ",";
        for (std::size_t u = 0; u < w.satisfaction.size(); ++u)
        {
            out << to_string(w.scheme) << ',' << w.seed << ',' << w.window << ',' << u << ','
                << num(w.satisfaction[u]) << tail << '\n';
        }
    }
    std::vector<CellError> errors = metrics.errors;
    std::sort(errors.begin(), errors.end(), [](const CellError& a, const CellError& b) {
        return std::make_tuple(static_cast<int>(a.scheme), a.seed) < std::make_tuple(static_cast<int>(b.scheme), b.seed);
    });
    for (const auto& e : errors)
    {
        out << to_string(e.scheme) << ',' << e.seed << ",,,,,,,,,,," << csv_field(e.message) << '\n';
    }
}

void
write_summary_csv(std::ostream& out, const RunMetrics& metrics)
{
    out << "# dtvs summary schema " << kMetricsSchemaVersion << "\n";
    out << "scheme,metric,count,min,q1,median,q3,max,mean,std\n";
    for (SchemeId scheme : schemes_present(metrics))
    {
        std::vector<std::pair<const char*, std::vector<double>>> series;
        series.emplace_back("satisfaction", satisfaction_values(metrics, scheme));
        series.emplace_back("consumption", consumption_values(metrics, scheme));
        std::vector<double> bw, cpu, q, v, fresh;
        for (const auto& w : metrics.windows)
        {
            if (w.scheme != scheme)
            {
                continue;
            }
            bw.push_back(w.bw_frac);
            cpu.push_back(w.compute_frac);
            q.push_back(w.utility);
            v.push_back(w.value);
            fresh.push_back(w.freshness);
        }
        series.emplace_back("bw_frac", bw);
        series.emplace_back("compute_frac", cpu);
        series.emplace_back("freshness", fresh);
        series.emplace_back("Q", q);
        series.emplace_back("V", v);
        for (const auto& [name, values] : series)
        {
            const BoxStats s = summarize(values);
            out << to_string(scheme) << ',' << name << ',' << s.count << ',' << num(s.min) << ',' << num(s.q1) << ','
                << num(s.median) << ',' << num(s.q3) << ',' << num(s.max) << ',' << num(s.mean) << ','
                << num(s.std) << '\n';
        }
    }
}

void
write_trace_csv(std::ostream& out, const RunMetrics& metrics)
{
    out << "scheme,seed,window,user,group,delivered,stall_s,swipes,completions\n";
    for (const auto& r : metrics.trace)
    {
        out << to_string(r.scheme) << ',' << r.seed << ',' << r.window << ',' << r.user << ',' << r.group << ','
            << r.delivered << ',' << num(r.stall_s) << ',' << r.swipes << ',' << r.completions << '\n';
    }
}

} // namespace dtvs
