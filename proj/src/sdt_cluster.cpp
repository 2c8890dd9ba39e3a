#include "dtvs/error.hpp"
#include "dtvs/sdt.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace dtvs
{

UserFeature
make_feature(const UdtAbstraction& twin, std::span<const BaseStation> stations, const FeatureScales& scales)
{
    UserFeature f;
    f.user = twin.user;
    f.bs = nearest_bs(twin.position, stations);
    f.values.reserve(kFeatureDims);
    f.values.push_back(std::clamp(twin.position.x / scales.area_m, 0.0, 1.0));
    f.values.push_back(std::clamp(twin.position.y / scales.area_m, 0.0, 1.0));
    for (double p : twin.preference)
    {
        f.values.push_back(std::clamp(p, 0.0, 1.0));
    }
    const std::size_t s = twin.swipe.n_segments();
    for (std::size_t t = 0; t < kVideoTypes; ++t)
    {
        double e = 0.0;
        if (t < twin.swipe.pmf.size())
        {
            for (std::size_t k = 0; k <= s; ++k)
            {
                e += static_cast<double>(k + 1) * twin.swipe.pmf[t][k];
            }
        }
        f.values.push_back(s > 0 ? std::clamp(e / static_cast<double>(s + 1), 0.0, 1.0) : 0.0);
    }
    const double rate = link_rate(scales.tx_dbm, twin.path_loss_db, scales.noise_dbm_hz, scales.reference_bandwidth_hz);
    const double best = link_rate(scales.tx_dbm, path_loss(10.0), scales.noise_dbm_hz, scales.reference_bandwidth_hz);
    f.values.push_back(std::clamp(rate / best, 0.0, 1.0));
    return f;
}

std::vector<std::vector<UserId>>
Grouping::members() const
{
    std::vector<std::vector<UserId>> out(group_bs.size());
    for (UserId u = 0; u < assignment.size(); ++u)
    {
        out.at(assignment[u]).push_back(u);
    }
    return out;
}

void
validate_grouping(const Grouping& grouping, std::span<const UserFeature> features)
{
    if (grouping.assignment.size() != features.size())
    {
        throw Error(ErrorCode::UnassignedUser, "grouping does not cover every user");
    }
    std::vector<std::size_t> sizes(grouping.n_groups(), 0);
    for (std::size_t i = 0; i < features.size(); ++i)
    {
        const GroupId g = grouping.assignment[features[i].user];
        if (g >= grouping.n_groups())
        {
            throw Error(ErrorCode::UnknownGroup, "user " + std::to_string(features[i].user) + " maps to no group");
        }
        if (grouping.group_bs[g] != features[i].bs)
        {
            throw Error(ErrorCode::OutOfRange, "group " + std::to_string(g) + " mixes serving BSs");
        }
        ++sizes[g];
    }
    for (std::size_t g = 0; g < sizes.size(); ++g)
    {
        if (sizes[g] == 0)
        {
            throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(g) + " is empty");
        }
    }
}

Grouping
grouping_from_keys(std::span<const std::pair<BsId, std::size_t>> keys)
{
    std::map<std::pair<BsId, std::size_t>, GroupId> ids;
    for (const auto& k : keys)
    {
        ids.emplace(k, 0);
    }
    Grouping g;
    for (auto& [key, id] : ids)
    {
        id = g.group_bs.size();
        g.group_bs.push_back(key.first);
        g.group_label.push_back(key.second);
    }
    g.assignment.reserve(keys.size());
    for (const auto& k : keys)
    {
        g.assignment.push_back(ids.at(k));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Q-learning

double
QTable::value(std::uint64_t bucket, std::size_t action) const
{
    auto it = m_entries.find({bucket, action});
    return it == m_entries.end() ? 0.0 : it->second.value;
}

std::size_t
QTable::visits(std::uint64_t bucket, std::size_t action) const
{
    auto it = m_entries.find({bucket, action});
    return it == m_entries.end() ? 0 : it->second.visits;
}

void
QTable::update(std::uint64_t bucket, std::size_t action, double reward, double learning_rate)
{
    auto& e = m_entries[{bucket, action}];
    e.value += learning_rate * (reward - e.value);
    ++e.visits;
}

std::size_t
QTable::greedy(std::uint64_t bucket, std::size_t n_actions) const
{
    std::size_t best = 0;
    double best_v = value(bucket, 0);
    for (std::size_t a = 1; a < n_actions; ++a)
    {
        const double v = value(bucket, a);
        if (v > best_v)
        {
            best_v = v;
            best = a;
        }
    }
    return best;
}

std::uint64_t
feature_bucket(const UserFeature& feature, std::size_t bins)
{
    std::uint64_t key = 0xcbf29ce484222325ULL;
    for (double v : feature.values)
    {
        const auto b = static_cast<std::uint64_t>(
            std::min<double>(static_cast<double>(bins - 1), std::floor(std::clamp(v, 0.0, 1.0) * static_cast<double>(bins))));
        key = (key ^ b) * 0x100000001b3ULL;
    }
    return key;
}

namespace
{

Grouping
compact(std::span<const UserFeature> features, const std::vector<std::size_t>& action)
{
    std::vector<std::pair<BsId, std::size_t>> keys(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
    {
        keys[features[i].user] = {features[i].bs, action[i]};
    }
    return grouping_from_keys(keys);
}

void
check_dense_ids(std::span<const UserFeature> features)
{
    std::vector<bool> seen(features.size(), false);
    for (const auto& f : features)
    {
        if (f.user >= features.size() || seen[f.user])
        {
            throw Error(ErrorCode::OutOfRange, "user ids must be 0..N-1 without repeats");
        }
        seen[f.user] = true;
    }
}

} // namespace

Grouping
greedy_grouping(std::span<const UserFeature> features, const RlParams& params, const QTable& table)
{
    std::vector<std::size_t> action(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
    {
        action[i] = table.greedy(feature_bucket(features[i], params.bucket_bins), params.g_max);
    }
    return compact(features, action);
}

Grouping
cluster_rl(std::span<const UserFeature> features,
           const RlParams& params,
           QTable& table,
           const UtilityFn& utility,
           Rng& rng)
{
    if (features.empty())
    {
        throw Error(ErrorCode::NoUsers, "nothing to cluster");
    }
    if (params.g_max == 0 || params.episodes == 0)
    {
        throw Error(ErrorCode::OutOfRange, "g_max and episodes must be positive");
    }
    check_dense_ids(features);
    if (params.g_max == 1)
    {
        return compact(features, std::vector<std::size_t>(features.size(), 0));
    }

    std::vector<std::uint64_t> buckets(features.size());
    std::vector<std::size_t> action(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
    {
        buckets[i] = feature_bucket(features[i], params.bucket_bins);
        action[i] = table.greedy(buckets[i], params.g_max);
    }
    double current = utility(compact(features, action));

    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t e = 0; e < params.episodes; ++e)
    {
        const double progress =
            params.episodes > 1 ? static_cast<double>(e) / static_cast<double>(params.episodes - 1) : 0.0;
        const double epsilon = params.epsilon_start + (params.epsilon_end - params.epsilon_start) * progress;
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t i : order)
        {
            std::size_t a;
            if (rng.uniform01() < epsilon)
            {
                a = rng.below(params.g_max);
            }
            else
            {
                a = table.greedy(buckets[i], params.g_max);
            }
            double reward = 0.0;
            if (a != action[i])
            {
                action[i] = a;
                const double moved = utility(compact(features, action));
                reward = moved - current;
                current = moved;
            }
            table.update(buckets[i], a, reward, params.learning_rate);
        }
    }
    return greedy_grouping(features, params, table);
}

// ---------------------------------------------------------------------------
// DBSCAN

namespace
{

double
squared_distance(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

std::vector<int>
dbscan_labels(std::span<const std::vector<double>> points, double eps, std::size_t min_pts)
{
    if (!(eps > 0.0) || min_pts == 0)
    {
        throw Error(ErrorCode::OutOfRange, "DBSCAN needs eps > 0 and min_pts >= 1");
    }
    constexpr int kUnvisited = -2;
    constexpr int kNoise = -1;
    const double eps2 = eps * eps;
    const std::size_t n = points.size();

    auto region = [&](std::size_t p) {
        std::vector<std::size_t> out;
        for (std::size_t q = 0; q < n; ++q)
        {
            if (squared_distance(points[p], points[q]) <= eps2)
            {
                out.push_back(q);
            }
        }
        return out;
    };

    std::vector<int> labels(n, kUnvisited);
    int cluster = 0;
    for (std::size_t p = 0; p < n; ++p)
    {
        if (labels[p] != kUnvisited)
        {
            continue;
        }
        auto neighbours = region(p);
        if (neighbours.size() < min_pts)
        {
            labels[p] = kNoise;
            continue;
        }
        labels[p] = cluster;
        std::deque<std::size_t> frontier(neighbours.begin(), neighbours.end());
        while (!frontier.empty())
        {
            const std::size_t q = frontier.front();
            frontier.pop_front();
            if (labels[q] == kNoise)
            {
                labels[q] = cluster; // border point
            }
            if (labels[q] != kUnvisited)
            {
                continue;
            }
            labels[q] = cluster;
            auto more = region(q);
            if (more.size() >= min_pts)
            {
                frontier.insert(frontier.end(), more.begin(), more.end());
            }
        }
        ++cluster;
    }
    return labels;
}

Grouping
cluster_dbscan(std::span<const UserFeature> features, double eps, std::size_t min_pts)
{
    check_dense_ids(features);
    std::vector<std::vector<double>> points(features.size());
    for (const auto& f : features)
    {
        points[f.user] = f.values;
    }
    const auto labels = dbscan_labels(points, eps, min_pts);

    // clusters keep their label, noise points get labels past the last cluster
    const int n_clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::pair<BsId, std::size_t>> keys(features.size());
    std::size_t next_single = static_cast<std::size_t>(std::max(n_clusters, 0));
    for (UserId u = 0; u < features.size(); ++u)
    {
        keys[u].second = labels[u] >= 0 ? static_cast<std::size_t>(labels[u]) : next_single++;
    }
    for (const auto& f : features)
    {
        keys[f.user].first = f.bs;
    }
    // order groups by label rather than by BS first
    std::vector<std::pair<std::size_t, BsId>> swapped(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
    {
        swapped[i] = {keys[i].second, keys[i].first};
    }
    std::map<std::pair<std::size_t, BsId>, GroupId> ids;
    for (const auto& k : swapped)
    {
        ids.emplace(k, 0);
    }
    Grouping g;
    for (auto& [key, id] : ids)
    {
        id = g.group_bs.size();
        g.group_bs.push_back(key.second);
        g.group_label.push_back(key.first);
    }
    for (const auto& k : swapped)
    {
        g.assignment.push_back(ids.at(k));
    }
    return g;
}

Grouping
cluster_heuristic(std::span<const UserFeature> features)
{
    check_dense_ids(features);
    std::vector<std::pair<BsId, std::size_t>> keys(features.size());
    for (const auto& f : features)
    {
        std::size_t top = 0;
        for (std::size_t t = 1; t < kVideoTypes; ++t)
        {
            if (f.values[2 + t] > f.values[2 + top])
            {
                top = t;
            }
        }
        keys[f.user] = {f.bs, top};
    }
    return grouping_from_keys(keys);
}

} // namespace dtvs
