#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/physnet.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dtvs
{

inline constexpr int kMetricsSchemaVersion = 1;

/// KPIs of one (scheme, seed, window).
struct WindowMetrics
{
    SchemeId scheme = SchemeId::Proposed;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::size_t groups = 0;
    std::vector<double> satisfaction; ///< indexed by user
    double bw_frac = 0.0;
    double compute_frac = 0.0;
    double freshness = 0.0;
    double utility = 0.0; ///< Q
    double cost = 0.0;    ///< R
    double value = 0.0;   ///< V

    // capacity bookkeeping
    double reserved_bw_hz = 0.0;
    double reserved_compute_ops = 0.0;
    double peak_slot_bw_hz = 0.0;      ///< largest per-slot sum of group allocations
    double peak_slot_compute_ops = 0.0;
    double worst_delivery_excess_bits = 0.0; ///< max over groups of sent - (capacity + one top segment)

    double consumption() const
    {
        return 0.5 * (bw_frac + compute_frac);
    }
};

struct CellError
{
    SchemeId scheme = SchemeId::Proposed;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::string message;
};

/// Per-user, per-window playback trace.
struct TraceRow
{
    SchemeId scheme = SchemeId::Proposed;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    UserId user = 0;
    GroupId group = 0;
    std::size_t delivered = 0;
    double stall_s = 0.0;
    std::size_t swipes = 0;
    std::size_t completions = 0;
};

struct RunMetrics
{
    std::vector<WindowMetrics> windows; ///< sorted by (scheme, seed, window)
    std::vector<CellError> errors;
    std::vector<TraceRow> trace;
    std::vector<std::string> udt_snapshots; ///< CSV per cell, same order as the cells, when tracing
};

struct RunOptions
{
    bool trace = false;
};

/// Runs one (scheme, seed) cell; errors propagate.
RunMetrics run_cell(const ScenarioConfig& config, SchemeId scheme, std::uint64_t seed, const RunOptions& options = {});

/// Every (scheme, seed) cell; a failing cell contributes only its error.
RunMetrics run_experiment(const ScenarioConfig& config,
                          const std::vector<SchemeId>& schemes,
                          const std::vector<std::uint64_t>& seeds,
                          const RunOptions& options = {});

struct BoxStats
{
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0; ///< population
};

/// Linear-interpolation quantile of sorted data, position q * (n - 1).
double quantile_sorted(const std::vector<double>& sorted, double q);

BoxStats summarize(std::vector<double> values);

/// Per-user satisfaction values of a scheme across all seeds and windows.
std::vector<double> satisfaction_values(const RunMetrics& metrics, SchemeId scheme);
/// Per-window resource consumption (mean of bw and compute fractions) of a scheme.
std::vector<double> consumption_values(const RunMetrics& metrics, SchemeId scheme);

void write_metrics_csv(std::ostream& out, const RunMetrics& metrics);
void write_summary_csv(std::ostream& out, const RunMetrics& metrics);
void write_trace_csv(std::ostream& out, const RunMetrics& metrics);

// ---------------------------------------------------------------------------
// World construction, exposed for tests

struct World
{
    std::vector<BaseStation> stations;
    std::vector<UserState> users;
    VideoCatalog catalog;
};

World build_world(const ScenarioConfig& config, std::uint64_t seed);

} // namespace dtvs
