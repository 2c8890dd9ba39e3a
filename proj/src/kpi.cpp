#include "dtvs/kpi.hpp"

#include "dtvs/error.hpp"

#include <algorithm>
#include <cmath>

namespace dtvs
{

double
quality_score(double rate_bps, double max_rate_bps)
{
    return std::log1p(rate_bps) / std::log1p(max_rate_bps);
}

double
user_satisfaction(const PlaybackReport& report,
                  UserId user,
                  std::span<const double> bitrate_ladder,
                  double stall_penalty)
{
    const UserPlayback* up = report.find(user);
    if (up == nullptr)
    {
        throw Error(ErrorCode::UnknownUser, "user " + std::to_string(user) + " is not in the report");
    }
    if (bitrate_ladder.empty())
    {
        throw Error(ErrorCode::BadLadder, "empty bitrate ladder");
    }
    const std::size_t watched = up->watched();
    if (watched == 0)
    {
        return 0.0;
    }
    const double r_max = bitrate_ladder.back();
    double quality = 0.0;
    for (std::size_t v = 0; v < up->watched_by_version.size() && v < bitrate_ladder.size(); ++v)
    {
        quality += static_cast<double>(up->watched_by_version[v]) * quality_score(bitrate_ladder[v], r_max);
    }
    quality /= static_cast<double>(watched);
    const double stall_frac = report.window_s > 0.0 ? up->stall_time_s / report.window_s : 0.0;
    return std::clamp(quality - stall_penalty * stall_frac, 0.0, 1.0);
}

ResourceUsage
measure_usage(const PlaybackReport& report, double total_bandwidth_hz, double total_compute_ops)
{
    if (!(total_bandwidth_hz > 0.0) || !(total_compute_ops > 0.0) || !(report.window_s > 0.0))
    {
        throw Error(ErrorCode::OutOfRange, "capacities and window must be positive");
    }
    double hz_s = 0.0;
    double ops = 0.0;
    for (const auto& g : report.groups)
    {
        hz_s += g.bandwidth_used_hz_s;
        ops += g.ops_used;
    }
    return {hz_s / (total_bandwidth_hz * report.window_s), ops / (total_compute_ops * report.window_s)};
}

double
system_utility(std::span<const double> satisfactions,
               double bandwidth_used_hz,
               double total_bandwidth_hz,
               double compute_used_ops,
               double total_compute_ops,
               double consumption_weight)
{
    if (!(total_bandwidth_hz > 0.0) || !(total_compute_ops > 0.0))
    {
        throw Error(ErrorCode::OutOfRange, "capacities must be positive");
    }
    double mean = 0.0;
    for (double s : satisfactions)
    {
        mean += s;
    }
    if (!satisfactions.empty())
    {
        mean /= static_cast<double>(satisfactions.size());
    }
    const double usage = (bandwidth_used_hz / total_bandwidth_hz + compute_used_ops / total_compute_ops) / 2.0;
    return mean - consumption_weight * usage;
}

double
operation_cost(AbstractionLevel level, double op_cost)
{
    return op_cost * static_cast<double>(level.value());
}

double
holistic_dt_value(const KpiWeights& weights, double freshness_ratio, double utility, double cost)
{
    if (!(freshness_ratio >= 0.0 && freshness_ratio <= 1.0))
    {
        throw Error(ErrorCode::OutOfRange, "freshness ratio must be in [0, 1]");
    }
    return weights.alpha * freshness_ratio + weights.beta * utility - weights.gamma * cost;
}

} // namespace dtvs
