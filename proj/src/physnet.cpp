#include "dtvs/physnet.hpp"

#include "dtvs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dtvs
{

double
distance(Point a, Point b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

BsId
nearest_bs(Point p, std::span<const BaseStation> stations)
{
    BsId best = stations.empty() ? 0 : stations.front().id;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& bs : stations)
    {
        const double d = distance(p, bs.position);
        if (d < best_d || (d == best_d && bs.id < best))
        {
            best_d = d;
            best = bs.id;
        }
    }
    return best;
}

UserState
step_mobility(const UserState& user, double dt, std::span<const BaseStation> stations)
{
    UserState next = user;
    if (dt > 0.0 && !next.path.empty())
    {
        double remaining = next.speed_mps * dt;
        // a loop of coincident waypoints has zero length; stop after a full lap without progress
        std::size_t idle_hops = 0;
        while (remaining > 0.0 && idle_hops <= next.path.size())
        {
            const Point target = next.path[next.next_waypoint];
            const double d = distance(next.position, target);
            if (d <= remaining)
            {
                next.position = target;
                remaining -= d;
                next.next_waypoint = (next.next_waypoint + 1) % next.path.size();
                idle_hops = d > 0.0 ? 0 : idle_hops + 1;
            }
            else
            {
                const double f = remaining / d;
                next.position.x += (target.x - next.position.x) * f;
                next.position.y += (target.y - next.position.y) * f;
                remaining = 0.0;
            }
        }
    }
    next.serving_bs = nearest_bs(next.position, stations);
    return next;
}

double
path_loss(double distance_m)
{
    const double d_km = std::max(distance_m, 1.0) / 1000.0;
    return 128.1 + 37.6 * std::log10(d_km);
}

double
link_rate(double tx_dbm, double pl_db, double noise_dbm_hz, double bandwidth_hz)
{
    if (!(bandwidth_hz > 0.0))
    {
        return 0.0;
    }
    const double noise_dbm = noise_dbm_hz + 10.0 * std::log10(bandwidth_hz);
    const double snr_db = tx_dbm - pl_db - noise_dbm;
    return bandwidth_hz * std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
}

double
bandwidth_for_rate(double rate_bps, double tx_dbm, double pl_db, double noise_dbm_hz)
{
    if (!(rate_bps > 0.0))
    {
        return 0.0;
    }
    // rate(B) increases towards snr0 / ln 2 as B grows, snr0 = P / (N0 * PL)
    const double snr0_hz = std::pow(10.0, (tx_dbm - pl_db - noise_dbm_hz) / 10.0);
    if (rate_bps >= snr0_hz / std::log(2.0))
    {
        return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    double hi = 1.0;
    while (link_rate(tx_dbm, pl_db, noise_dbm_hz, hi) < rate_bps)
    {
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        if (link_rate(tx_dbm, pl_db, noise_dbm_hz, mid) < rate_bps)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    return hi;
}

double
multicast_rate(std::span<const double> member_rates)
{
    if (member_rates.empty())
    {
        throw Error(ErrorCode::EmptyGroup, "multicast group has no members");
    }
    return *std::min_element(member_rates.begin(), member_rates.end());
}

std::vector<double>
swipe_pmf(SwipeParams params, std::size_t n_segments)
{
    if (n_segments == 0)
    {
        throw Error(ErrorCode::OutOfRange, "a video needs at least one segment");
    }
    const double q = std::clamp(params.q, 0.0, 1.0);
    const double p = std::clamp(params.p, 0.0, 1.0);
    std::vector<double> pmf(n_segments + 1, 0.0);
    if (p >= 1.0)
    {
        pmf[0] = 1.0 - q;
    }
    else if (p <= 0.0)
    {
        for (std::size_t s = 0; s < n_segments; ++s)
        {
            pmf[s] = (1.0 - q) / static_cast<double>(n_segments);
        }
    }
    else
    {
        const double norm = 1.0 - std::pow(1.0 - p, static_cast<double>(n_segments));
        for (std::size_t s = 0; s < n_segments; ++s)
        {
            pmf[s] = (1.0 - q) * p * std::pow(1.0 - p, static_cast<double>(s)) / norm;
        }
    }
    pmf[n_segments] = q;
    return pmf;
}

namespace
{

std::vector<double>
to_cdf(const std::vector<double>& pmf)
{
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i)
    {
        acc += pmf[i];
        cdf[i] = acc;
    }
    // pin the tail at 1
    for (std::size_t i = cdf.size(); i-- > 0;)
    {
        if (pmf[i] > 0.0)
        {
            for (std::size_t j = i; j < cdf.size(); ++j)
            {
                cdf[j] = 1.0;
            }
            break;
        }
    }
    return cdf;
}

std::size_t
draw(const std::vector<double>& cdf, Rng& rng)
{
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    return idx + 1;
}

} // namespace

std::size_t
generate_swipe(SwipeParams params, std::size_t n_segments, Rng& rng)
{
    return draw(to_cdf(swipe_pmf(params, n_segments)), rng);
}

std::size_t
generate_swipe(const UserState& user, const Video& video, Rng& rng)
{
    return generate_swipe(user.true_swipe[video.type_index], video.n_segments(), rng);
}

WatchSampler::WatchSampler(const std::array<std::vector<double>, kVideoTypes>& pmfs)
{
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        m_cdf[t] = to_cdf(pmfs[t]);
    }
}

WatchSampler
WatchSampler::from_params(const std::array<SwipeParams, kVideoTypes>& params, std::size_t n_segments)
{
    std::array<std::vector<double>, kVideoTypes> pmfs;
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        pmfs[t] = swipe_pmf(params[t], n_segments);
    }
    return WatchSampler(pmfs);
}

std::size_t
WatchSampler::sample(std::size_t type, Rng& rng) const
{
    return draw(m_cdf[type], rng);
}

FixedAllocator::FixedAllocator(std::vector<double> bandwidth_hz, std::vector<double> compute_ops)
    : m_bandwidth(std::move(bandwidth_hz)),
      m_compute(std::move(compute_ops))
{
}

void
FixedAllocator::allocate(std::size_t /*slot*/,
                         std::span<const double> /*backlog_bits*/,
                         std::span<double> bandwidth_hz,
                         std::span<double> compute_ops)
{
    for (std::size_t g = 0; g < bandwidth_hz.size(); ++g)
    {
        bandwidth_hz[g] = g < m_bandwidth.size() ? m_bandwidth[g] : 0.0;
        compute_ops[g] = g < m_compute.size() ? m_compute[g] : 0.0;
    }
}

std::size_t
UserPlayback::delivered() const
{
    std::size_t n = 0;
    for (auto c : delivered_by_version)
    {
        n += c;
    }
    return n;
}

std::size_t
UserPlayback::watched() const
{
    std::size_t n = 0;
    for (auto c : watched_by_version)
    {
        n += c;
    }
    return n;
}

const UserPlayback*
PlaybackReport::find(UserId user) const
{
    auto it = std::lower_bound(users.begin(), users.end(), user, [](const UserPlayback& u, UserId id) {
        return u.user < id;
    });
    return it != users.end() && it->user == user ? &*it : nullptr;
}

} // namespace dtvs
