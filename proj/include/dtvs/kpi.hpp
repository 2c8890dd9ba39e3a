#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/physnet.hpp"

#include <span>

namespace dtvs
{

/// Log-shaped quality of a bitrate relative to the top of the ladder.
double quality_score(double rate_bps, double max_rate_bps);

/// Mean quality of the watched segments minus the stall penalty, clamped to
/// [0, 1]; 0 when nothing was watched.
double user_satisfaction(const PlaybackReport& report,
                         UserId user,
                         std::span<const double> bitrate_ladder,
                         double stall_penalty);

struct ResourceUsage
{
    double bandwidth_fraction = 0.0; ///< used Hz*s over B_total * window
    double compute_fraction = 0.0;   ///< used ops over P_total * window

    double consumption() const
    {
        return 0.5 * (bandwidth_fraction + compute_fraction);
    }
};

ResourceUsage measure_usage(const PlaybackReport& report, double total_bandwidth_hz, double total_compute_ops);

/// Q: mean satisfaction minus the weighted mean consumption fraction.
/// Usage arguments are time averages (Hz and ops/s).
double system_utility(std::span<const double> satisfactions,
                      double bandwidth_used_hz,
                      double total_bandwidth_hz,
                      double compute_used_ops,
                      double total_compute_ops,
                      double consumption_weight);

/// R(L) = c_op * L.
double operation_cost(AbstractionLevel level, double op_cost);

/// V = alpha * freshness + beta * Q - gamma * R.
double holistic_dt_value(const KpiWeights& weights, double freshness_ratio, double utility, double cost);

} // namespace dtvs
