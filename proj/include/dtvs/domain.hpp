#pragma once

#include "dtvs/rng.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dtvs
{

using UserId = std::size_t;
using GroupId = std::size_t;
using BsId = std::size_t;
using VideoId = std::size_t;

inline constexpr std::size_t kVideoTypes = 8;

// ---------------------------------------------------------------------------
// Service profiles

enum class ServiceKind
{
    ShortVideo,
    ImmersiveVR,
    Holographic,
};

enum class ServiceComponent : unsigned
{
    Segments = 1u << 0,
    Tiles2D = 1u << 1,
    Tiles3D = 1u << 2,
};

struct ServiceProfile
{
    ServiceKind name;
    double required_rate_bps;
    double latency_budget_s;
    unsigned components; ///< bitwise OR of ServiceComponent

    bool has(ServiceComponent c) const
    {
        return (components & static_cast<unsigned>(c)) != 0;
    }
};

/// Bandwidth and latency requirement rows per service. Only ShortVideo
/// drives the simulation; the other rows are carried as configuration.
ServiceProfile service_profile(ServiceKind kind);

// ---------------------------------------------------------------------------
// Catalog

struct Video
{
    VideoId id = 0;
    std::size_t type_index = 0;
    double duration_s = 0.0;
    double segment_len_s = 0.0;
    std::vector<double> versions;     ///< bitrates in bit/s, ascending
    std::vector<double> compute_cost; ///< ops per segment, one entry per version
    double popularity = 0.0;          ///< in [0,1); orders videos within a type

    std::size_t n_segments() const;
    double segment_bits(std::size_t version) const
    {
        return versions[version] * segment_len_s;
    }
};

struct CatalogParams
{
    std::size_t count = 1000;
    double duration_s = 15.0;
    double segment_len_s = 1.0;
    std::vector<double> ladder_bps{1.5e6, 4.5e6, 15e6, 45e6};
    /// Transcoding load per delivered bit; compute cost scales with bitrate.
    double ops_per_bit = 20.0;
};

struct VideoCatalog
{
    std::vector<Video> videos;
    std::array<std::string_view, kVideoTypes> type_names{
        "Entertainment", "Games", "Food", "Sports", "Science", "Dance", "Travel", "News"};
    /// Video ids per type, ordered by descending popularity.
    std::array<std::vector<VideoId>, kVideoTypes> by_type;

    std::size_t n_segments() const;
    const std::vector<double>& ladder() const
    {
        return videos.front().versions;
    }
};

VideoCatalog build_catalog(const CatalogParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Scenario

enum class SchemeId
{
    Proposed,     ///< RL clustering + convex reservation
    Optimization, ///< DBSCAN + branch-and-bound reservation
    Heuristic,    ///< (BS, top preference) grouping + historical reservation
};

std::string_view to_string(SchemeId scheme);
SchemeId parse_scheme(std::string_view name);

/// Data abstraction level of the twins: 0 raw samples, 1 windowed histograms,
/// 2 distribution parameters, 3 one distilled feature vector.
class AbstractionLevel
{
  public:
    constexpr AbstractionLevel() = default;
    explicit AbstractionLevel(int level);

    constexpr int value() const
    {
        return m_level;
    }

  private:
    int m_level = 2;
};

struct KpiWeights
{
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

struct KpiParams
{
    KpiWeights weights;
    double stall_penalty = 0.5;     ///< mu_stall
    double consumption_weight = 0.25; ///< gamma_r
    double op_cost = 0.1;           ///< c_op, cost per abstraction level
};

struct UdtParams
{
    std::size_t capacity = 512;
    double smoothing = 1.0;
    double period_min_s = 1.0;
    double period_max_s = 9.0;
    double required_sync_hz = 1.0;
    std::size_t history_events = 60;
    double pca_variance = 0.8; ///< cumulative variance kept by the importance analysis
};

struct SdtParams
{
    std::size_t g_max = 4; ///< groups per BS available to the RL clusterer
    std::size_t rl_episodes = 8;
    double learning_rate = 0.5;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t bucket_bins = 3;
    double dbscan_eps = 0.35;
    std::size_t dbscan_min_pts = 3;
    std::size_t bnb_grid = 200; ///< grid points per unit of capacity
    double headroom = 2.0;      ///< cap_g = headroom * d_g
    std::size_t recommend_k = 10;
};

struct EmulationParams
{
    double horizon_s = 0.0; ///< 0 means one large window
    double tick_s = 1.0;
    std::uint64_t seed = 7;
};

struct ScenarioConfig
{
    std::size_t n_users = 60;
    std::size_t n_bs = 2;
    double area_m = 1000.0;
    double tx_power_dbm = 27.0;
    double noise_density_dbm_hz = -174.0;
    double speed_min_kmh = 2.0;
    double speed_max_kmh = 5.0;
    double user_radius_m = 300.0;
    std::size_t waypoints = 4;
    double shadowing_sigma_db = 0.0;
    std::size_t n_cohorts = 4;

    double total_bandwidth_hz = 20e6;
    double total_compute_ops = 2e9;

    double small_ts_s = 1.0;
    double large_ts_s = 60.0;
    std::size_t sim_windows = 20;
    double tick_s = 0.1;
    std::size_t buffer_segments = 5;

    std::uint64_t seed = 0;
    SchemeId algorithm = SchemeId::Proposed;
    AbstractionLevel abstraction{2};

    CatalogParams catalog;
    KpiParams kpi;
    UdtParams udt;
    SdtParams sdt;
    EmulationParams emulation;

    std::size_t slots_per_window() const;
    double emulation_horizon_s() const
    {
        return emulation.horizon_s > 0.0 ? emulation.horizon_s : large_ts_s;
    }
};

/// Normalizes a parsed scenario document: applies defaults, rejects unknown
/// keys and inconsistent values.
ScenarioConfig validate_scenario(const nlohmann::json& raw);
ScenarioConfig load_scenario_file(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Resource schedule

/// Fixed caching placement: every version of every video sits at the edge
/// server. Carried so the schedule holds the full (C, A, P, S, L) tuple.
struct CachePlacement
{
    std::size_t n_nodes = 0;
    std::size_t edge_node = 0;

    bool cached(VideoId /*video*/, std::size_t /*version*/, std::size_t node) const
    {
        return node == edge_node;
    }
};

struct ResourceSchedule
{
    std::vector<std::vector<double>> bandwidth; ///< C: group x slot, Hz
    CachePlacement caching;                     ///< A
    std::vector<std::vector<double>> compute;   ///< P: group x slot, ops/s
    std::vector<std::vector<double>> sensing;   ///< S: reserved, unused
    AbstractionLevel level;                     ///< L

    void reset(std::size_t groups, std::size_t slots);
};

} // namespace dtvs
