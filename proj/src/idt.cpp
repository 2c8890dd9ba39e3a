#include "dtvs/idt.hpp"

#include "dtvs/error.hpp"
#include "dtvs/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dtvs
{

GroupDemand
aggregate_group_demand(GroupId group,
                       std::span<const UdtAbstraction> twins,
                       std::span<const UserId> members,
                       const VideoCatalog& catalog,
                       const DemandParams& params)
{
    if (members.empty())
    {
        throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(group) + " has no members");
    }
    GroupDemand d;
    d.group = group;
    d.n_members = members.size();
    const double n = static_cast<double>(members.size());
    const double segments = static_cast<double>(catalog.n_segments());

    double worst_rate = std::numeric_limits<double>::infinity();
    d.worst_path_loss_db = -std::numeric_limits<double>::infinity();
    for (UserId u : members)
    {
        if (u >= twins.size())
        {
            throw Error(ErrorCode::UnknownUser, "member " + std::to_string(u) + " has no twin");
        }
        const UdtAbstraction& twin = twins[u];
        for (std::size_t t = 0; t < kVideoTypes; ++t)
        {
            d.feed_weights[t] += twin.preference[t] / n;
            d.expected_watch_fraction[t] += twin.swipe.expected_watch_segments(t) / segments / n;
        }
        d.worst_path_loss_db = std::max(d.worst_path_loss_db, twin.path_loss_db);
        worst_rate = std::min(worst_rate,
                              link_rate(params.tx_dbm, twin.path_loss_db, params.noise_dbm_hz,
                                        params.reference_bandwidth_hz));
    }

    const auto& ladder = catalog.ladder();
    d.version = 0;
    for (std::size_t v = 0; v < ladder.size(); ++v)
    {
        if (ladder[v] <= worst_rate)
        {
            d.version = v;
        }
    }

    double streaming = 0.0;
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        streaming += d.feed_weights[t] * d.expected_watch_fraction[t];
    }
    d.expected_bandwidth_bps = ladder[d.version] * streaming;
    d.expected_compute_ops = d.expected_bandwidth_bps * params.ops_per_bit;

    double hz = bandwidth_for_rate(d.expected_bandwidth_bps, params.tx_dbm, d.worst_path_loss_db,
                                   params.noise_dbm_hz);
    if (!std::isfinite(hz) || hz > params.max_bandwidth_hz)
    {
        hz = params.max_bandwidth_hz;
    }
    d.bandwidth_demand_hz = std::max(hz, 1.0);

    if (params.recommend_k > 0)
    {
        std::vector<VideoId> ids(catalog.videos.size());
        std::iota(ids.begin(), ids.end(), VideoId{0});
        const std::size_t k = std::min(params.recommend_k, ids.size());
        std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                          [&](VideoId a, VideoId b) {
                              double sa = d.feed_weights[catalog.videos[a].type_index];
                              double sb = d.feed_weights[catalog.videos[b].type_index];
                              if (sa != sb)
                              {
                                  return sa > sb;
                              }
                              return a < b;
                          });
        d.recommended.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return d;
}

std::vector<double>
backlog_shares(std::span<const double> backlog)
{
    std::vector<double> share(backlog.size(), 0.0);
    double total = 0.0;
    for (double b : backlog)
    {
        if (b > 0.0)
        {
            total += b;
        }
    }
    if (total <= 0.0)
    {
        return share;
    }
    for (std::size_t g = 0; g < backlog.size(); ++g)
    {
        if (backlog[g] > 0.0)
        {
            share[g] = backlog[g] / total;
        }
    }
    return share;
}

BacklogAllocator::BacklogAllocator(SliceReservation reservation)
    : m_reservation(std::move(reservation)),
      m_bw_debt(m_reservation.bandwidth_hz.size(), 0.0),
      m_cpu_debt(m_reservation.compute_ops.size(), 0.0)
{
    if (m_reservation.bandwidth_hz.size() != m_reservation.compute_ops.size())
    {
        throw Error(ErrorCode::UnknownGroup, "bandwidth and compute reservations cover different groups");
    }
}

namespace
{

void
lend(std::span<const double> reserved,
     std::span<const double> backlog,
     std::vector<double>& debt,
     std::span<double> out)
{
    const std::size_t n = reserved.size();
    double pool = 0.0;
    std::vector<double> eligible(n, 0.0);
    for (std::size_t g = 0; g < n; ++g)
    {
        double repay = std::min(debt[g], reserved[g]);
        debt[g] -= repay;
        if (debt[g] < 1e-12 * std::max(1.0, reserved[g]))
        {
            debt[g] = 0.0;
        }
        double own = reserved[g] - repay;
        if (backlog[g] > 0.0)
        {
            out[g] = own;
            if (debt[g] == 0.0)
            {
                eligible[g] = backlog[g];
            }
        }
        else
        {
            out[g] = 0.0;
            pool += own;
        }
    }
    if (pool <= 0.0)
    {
        return;
    }
    std::vector<double> share = backlog_shares(eligible);
    for (std::size_t g = 0; g < n; ++g)
    {
        if (share[g] > 0.0)
        {
            out[g] += share[g] * pool;
            debt[g] += share[g] * pool;
        }
    }
}

} // namespace

void
BacklogAllocator::allocate(std::size_t /*slot*/,
                           std::span<const double> backlog_bits,
                           std::span<double> bandwidth_hz,
                           std::span<double> compute_ops)
{
    if (backlog_bits.size() != m_bw_debt.size())
    {
        throw Error(ErrorCode::UnknownGroup, "backlog for " + std::to_string(backlog_bits.size()) +
                                                 " groups, reservation for " +
                                                 std::to_string(m_bw_debt.size()));
    }
    lend(m_reservation.bandwidth_hz, backlog_bits, m_bw_debt, bandwidth_hz);
    lend(m_reservation.compute_ops, backlog_bits, m_cpu_debt, compute_ops);
}

BacklogAllocator
allocate_small_timescale(const SliceReservation& reservation, std::span<const GroupDemand> demands)
{
    const std::size_t n = reservation.bandwidth_hz.size();
    std::vector<bool> seen(n, false);
    for (const GroupDemand& d : demands)
    {
        if (d.group >= n)
        {
            throw Error(ErrorCode::UnknownGroup, "demand for unreserved group " + std::to_string(d.group));
        }
        seen[d.group] = true;
    }
    for (std::size_t g = 0; g < n; ++g)
    {
        if (!seen[g])
        {
            throw Error(ErrorCode::UnknownGroup, "no demand for reserved group " + std::to_string(g));
        }
    }
    return BacklogAllocator(reservation);
}

// ---------------------------------------------------------------------------

TwinEmulator::TwinEmulator(std::vector<UdtAbstraction> twins, EmulationSettings settings)
    : m_twins(std::move(twins)),
      m_settings(settings)
{
    if (m_settings.catalog == nullptr)
    {
        throw Error(ErrorCode::MissingField, "emulation needs a catalog");
    }
    m_samplers.reserve(m_twins.size());
    for (std::size_t u = 0; u < m_twins.size(); ++u)
    {
        if (m_twins[u].user != u)
        {
            throw Error(ErrorCode::UnknownUser, "twins must be indexed by user id");
        }
        std::array<std::vector<double>, kVideoTypes> pmfs;
        for (std::size_t t = 0; t < kVideoTypes; ++t)
        {
            pmfs[t] = m_twins[u].swipe.pmf.at(t);
        }
        m_samplers.emplace_back(pmfs);
    }
}

double
TwinEmulator::utility(const Grouping& grouping) const
{
    const EmulationSettings& s = m_settings;
    if (grouping.assignment.size() != m_twins.size())
    {
        throw Error(ErrorCode::UnassignedUser, "grouping does not cover the twins");
    }
    const auto members = grouping.members();
    DemandParams dp;
    dp.reference_bandwidth_hz = s.total_bandwidth_hz / static_cast<double>(std::max<std::size_t>(1, members.size()));
    dp.tx_dbm = s.tx_dbm;
    dp.noise_dbm_hz = s.noise_dbm_hz;
    dp.ops_per_bit = s.ops_per_bit;
    dp.max_bandwidth_hz = s.total_bandwidth_hz;
    dp.recommend_k = 0;

    std::vector<GroupDemand> demands;
    std::vector<SliceDemand> slices;
    std::vector<GroupSession> sessions;
    demands.reserve(members.size());
    for (GroupId g = 0; g < members.size(); ++g)
    {
        demands.push_back(aggregate_group_demand(g, m_twins, members[g], *s.catalog, dp));
        slices.push_back(demands.back().slice_demand());
        sessions.push_back({g, grouping.group_bs[g], members[g], demands.back().feed_weights});
    }
    SliceReservation reservation =
        reserve_convex(slices, s.total_bandwidth_hz, s.total_compute_ops, s.headroom);
    BacklogAllocator allocator = allocate_small_timescale(reservation, demands);

    std::vector<Viewer> viewers(m_twins.size());
    for (std::size_t u = 0; u < m_twins.size(); ++u)
    {
        viewers[u] = {u, m_twins[u].path_loss_db, &m_samplers[u]};
    }
    PlaybackSettings ps;
    ps.catalog = s.catalog;
    ps.window_s = s.horizon_s;
    ps.slot_s = s.slot_s;
    ps.tick_s = s.tick_s;
    ps.buffer_segments = s.buffer_segments;
    ps.tx_dbm = s.tx_dbm;
    ps.noise_dbm_hz = s.noise_dbm_hz;
    ps.ops_per_bit = s.ops_per_bit;
    Rng rng(s.seed);
    PlaybackReport report = simulate_window(viewers, sessions, allocator, ps, rng);

    std::vector<double> sats;
    sats.reserve(m_twins.size());
    for (std::size_t u = 0; u < m_twins.size(); ++u)
    {
        sats.push_back(user_satisfaction(report, u, s.catalog->ladder(), s.stall_penalty));
    }
    ResourceUsage usage = measure_usage(report, s.total_bandwidth_hz, s.total_compute_ops);
    return system_utility(sats, usage.bandwidth_fraction * s.total_bandwidth_hz, s.total_bandwidth_hz,
                          usage.compute_fraction * s.total_compute_ops, s.total_compute_ops,
                          s.consumption_weight);
}

double
emulate_utility(const Grouping& grouping, std::span<const UdtAbstraction> twins, const EmulationSettings& settings)
{
    TwinEmulator emulator(std::vector<UdtAbstraction>(twins.begin(), twins.end()), settings);
    return emulator.utility(grouping);
}

} // namespace dtvs
