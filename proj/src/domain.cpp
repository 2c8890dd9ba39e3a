#include "dtvs/domain.hpp"

#include "dtvs/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace dtvs
{

using nlohmann::json;

ServiceProfile
service_profile(ServiceKind kind)
{
    const auto segments = static_cast<unsigned>(ServiceComponent::Segments);
    const auto tiles2d = static_cast<unsigned>(ServiceComponent::Tiles2D);
    const auto tiles3d = static_cast<unsigned>(ServiceComponent::Tiles3D);
    switch (kind)
    {
    case ServiceKind::ShortVideo:
        // 4K at 45 Mbps, "several seconds" of tolerable latency
        return {kind, 45e6, 3.0, segments | tiles3d};
    case ServiceKind::ImmersiveVR:
        // 8K upper bound, strong interaction mode
        return {kind, 100e6, 10e-3, tiles2d | tiles3d};
    case ServiceKind::Holographic:
        // 4K, 6-DoF movement
        return {kind, 100e6, 5e-3, tiles3d};
    }
    throw Error(ErrorCode::OutOfRange, "unknown service kind");
}

std::size_t
Video::n_segments() const
{
    return static_cast<std::size_t>(std::llround(duration_s / segment_len_s));
}

std::size_t
VideoCatalog::n_segments() const
{
    return videos.empty() ? 0 : videos.front().n_segments();
}

VideoCatalog
build_catalog(const CatalogParams& params, Rng& rng)
{
    if (params.ladder_bps.empty())
    {
        throw Error(ErrorCode::BadLadder, "bitrate ladder is empty");
    }
    for (std::size_t i = 0; i < params.ladder_bps.size(); ++i)
    {
        if (!(params.ladder_bps[i] > 0.0) || (i > 0 && !(params.ladder_bps[i] > params.ladder_bps[i - 1])))
        {
            throw Error(ErrorCode::BadLadder, "bitrates must be positive and strictly ascending");
        }
    }
    if (!(params.segment_len_s > 0.0) || !(params.duration_s > 0.0))
    {
        throw Error(ErrorCode::OutOfRange, "duration and segment length must be positive");
    }
    const double ratio = params.duration_s / params.segment_len_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
    {
        throw Error(ErrorCode::OutOfRange, "duration must be a multiple of the segment length");
    }

    VideoCatalog catalog;
    catalog.videos.reserve(params.count);
    for (std::size_t i = 0; i < params.count; ++i)
    {
        Video v;
        v.id = i;
        v.type_index = i % kVideoTypes;
        v.duration_s = params.duration_s;
        v.segment_len_s = params.segment_len_s;
        v.versions = params.ladder_bps;
        v.compute_cost.reserve(v.versions.size());
        for (double rate : v.versions)
        {
            v.compute_cost.push_back(params.ops_per_bit * rate * params.segment_len_s);
        }
        v.popularity = rng.uniform01();
        catalog.by_type[v.type_index].push_back(i);
        catalog.videos.push_back(std::move(v));
    }
    for (auto& ids : catalog.by_type)
    {
        std::stable_sort(ids.begin(), ids.end(), [&](VideoId a, VideoId b) {
            return catalog.videos[a].popularity > catalog.videos[b].popularity;
        });
    }
    return catalog;
}

std::string_view
to_string(SchemeId scheme)
{
    switch (scheme)
    {
    case SchemeId::Proposed:
        return "proposed";
    case SchemeId::Optimization:
        return "optimization";
    case SchemeId::Heuristic:
        return "heuristic";
    }
    return "unknown";
}

SchemeId
parse_scheme(std::string_view name)
{
    for (auto s : {SchemeId::Proposed, SchemeId::Optimization, SchemeId::Heuristic})
    {
        if (to_string(s) == name)
        {
            return s;
        }
    }
    throw Error(ErrorCode::OutOfRange, "unknown scheme '" + std::string(name) + "'");
}

AbstractionLevel::AbstractionLevel(int level)
    : m_level(level)
{
    if (level < 0 || level > 3)
    {
        throw Error(ErrorCode::OutOfRange, "abstraction level must be in 0..3");
    }
}

std::size_t
ScenarioConfig::slots_per_window() const
{
    return static_cast<std::size_t>(std::llround(large_ts_s / small_ts_s));
}

void
ResourceSchedule::reset(std::size_t groups, std::size_t slots)
{
    bandwidth.assign(groups, std::vector<double>(slots, 0.0));
    compute.assign(groups, std::vector<double>(slots, 0.0));
    sensing.clear();
}

// ---------------------------------------------------------------------------
// Scenario parsing

namespace
{

/// One table of the scenario document; tracks consumed keys.
class Table
{
  public:
    Table(const json& node, std::string path)
        : m_node(node),
          m_path(std::move(path))
    {
        if (!m_node.is_object())
        {
            throw Error(ErrorCode::OutOfRange, m_path + " must be a table");
        }
    }

    template <typename T>
    void read(const char* key, T& out)
    {
        m_seen.insert(key);
        auto it = m_node.find(key);
        if (it == m_node.end())
        {
            return;
        }
        if (it->is_null())
        {
            throw Error(ErrorCode::MissingField, field(key) + " has no value");
        }
        try
        {
            out = it->template get<T>();
        }
        catch (const json::exception&)
        {
            throw Error(ErrorCode::OutOfRange, field(key) + " has the wrong type");
        }
    }

    /// Optional sub-table; returns a null-like empty object when absent.
    const json& child(const char* key)
    {
        static const json empty = json::object();
        m_seen.insert(key);
        auto it = m_node.find(key);
        if (it == m_node.end())
        {
            return empty;
        }
        if (it->is_null())
        {
            throw Error(ErrorCode::MissingField, field(key) + " has no value");
        }
        return *it;
    }

    void finish() const
    {
        for (auto it = m_node.begin(); it != m_node.end(); ++it)
        {
            if (!m_seen.contains(it.key()))
            {
                throw Error(ErrorCode::UnknownKey, "unknown key " + field(it.key().c_str()));
            }
        }
    }

    std::string field(const char* key) const
    {
        return m_path.empty() ? std::string(key) : m_path + "." + key;
    }

  private:
    const json& m_node;
    std::string m_path;
    std::set<std::string, std::less<>> m_seen;
};

void
require_positive(double value, const std::string& name)
{
    if (!(value > 0.0) || !std::isfinite(value))
    {
        throw Error(ErrorCode::OutOfRange, name + " must be positive");
    }
}

void
require_nonnegative(double value, const std::string& name)
{
    if (!(value >= 0.0) || !std::isfinite(value))
    {
        throw Error(ErrorCode::OutOfRange, name + " must be non-negative");
    }
}

bool
divides(double small, double large)
{
    const double ratio = large / small;
    return ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio);
}

} // namespace

ScenarioConfig
validate_scenario(const json& raw)
{
    ScenarioConfig c;
    Table root(raw, "");

    std::uint64_t seed = c.seed;
    root.read("seed", seed);
    c.seed = seed;

    std::string algorithm(to_string(c.algorithm));
    root.read("algorithm", algorithm);
    c.algorithm = parse_scheme(algorithm);

    int level = c.abstraction.value();
    root.read("abstraction_level", level);
    c.abstraction = AbstractionLevel(level);

    {
        Table t(root.child("network"), "network");
        t.read("n_users", c.n_users);
        t.read("n_bs", c.n_bs);
        t.read("area_m", c.area_m);
        t.read("tx_power_dbm", c.tx_power_dbm);
        t.read("noise_density_dbm_hz", c.noise_density_dbm_hz);
        std::vector<double> speeds{c.speed_min_kmh, c.speed_max_kmh};
        t.read("speed_kmh", speeds);
        if (speeds.size() != 2)
        {
            throw Error(ErrorCode::MissingField, "network.speed_kmh needs [min, max]");
        }
        c.speed_min_kmh = speeds[0];
        c.speed_max_kmh = speeds[1];
        t.read("user_radius_m", c.user_radius_m);
        t.read("waypoints", c.waypoints);
        t.read("shadowing_sigma_db", c.shadowing_sigma_db);
        t.read("cohorts", c.n_cohorts);
        t.finish();
    }
    {
        Table t(root.child("resources"), "resources");
        t.read("total_bandwidth_hz", c.total_bandwidth_hz);
        t.read("total_compute_ops", c.total_compute_ops);
        t.finish();
    }
    {
        Table t(root.child("timing"), "timing");
        t.read("small_ts_s", c.small_ts_s);
        t.read("large_ts_s", c.large_ts_s);
        t.read("sim_windows", c.sim_windows);
        t.read("tick_s", c.tick_s);
        t.read("buffer_segments", c.buffer_segments);
        t.finish();
    }
    {
        Table t(root.child("catalog"), "catalog");
        t.read("count", c.catalog.count);
        t.read("duration_s", c.catalog.duration_s);
        t.read("segment_len_s", c.catalog.segment_len_s);
        t.read("bitrate_ladder_bps", c.catalog.ladder_bps);
        t.read("ops_per_bit", c.catalog.ops_per_bit);
        t.finish();
    }
    {
        Table t(root.child("kpi"), "kpi");
        t.read("alpha", c.kpi.weights.alpha);
        t.read("beta", c.kpi.weights.beta);
        t.read("gamma", c.kpi.weights.gamma);
        t.read("stall_penalty", c.kpi.stall_penalty);
        t.read("consumption_weight", c.kpi.consumption_weight);
        t.read("op_cost", c.kpi.op_cost);
        t.finish();
    }
    {
        Table t(root.child("udt"), "udt");
        t.read("capacity", c.udt.capacity);
        t.read("smoothing", c.udt.smoothing);
        t.read("period_min_s", c.udt.period_min_s);
        t.read("period_max_s", c.udt.period_max_s);
        t.read("required_sync_hz", c.udt.required_sync_hz);
        t.read("history_events", c.udt.history_events);
        t.read("pca_variance", c.udt.pca_variance);
        t.finish();
    }
    {
        Table t(root.child("sdt"), "sdt");
        t.read("g_max", c.sdt.g_max);
        t.read("rl_episodes", c.sdt.rl_episodes);
        t.read("learning_rate", c.sdt.learning_rate);
        t.read("epsilon_start", c.sdt.epsilon_start);
        t.read("epsilon_end", c.sdt.epsilon_end);
        t.read("bucket_bins", c.sdt.bucket_bins);
        t.read("dbscan_eps", c.sdt.dbscan_eps);
        t.read("dbscan_min_pts", c.sdt.dbscan_min_pts);
        t.read("bnb_grid", c.sdt.bnb_grid);
        t.read("headroom", c.sdt.headroom);
        t.read("recommend_k", c.sdt.recommend_k);
        t.finish();
    }
    {
        Table t(root.child("emulation"), "emulation");
        t.read("horizon_s", c.emulation.horizon_s);
        t.read("tick_s", c.emulation.tick_s);
        t.read("seed", c.emulation.seed);
        t.finish();
    }
    root.finish();

    // ranges
    if (c.n_users == 0)
    {
        throw Error(ErrorCode::OutOfRange, "network.n_users must be positive");
    }
    if (c.n_bs == 0)
    {
        throw Error(ErrorCode::OutOfRange, "network.n_bs must be positive");
    }
    require_positive(c.area_m, "network.area_m");
    require_positive(c.user_radius_m, "network.user_radius_m");
    require_nonnegative(c.shadowing_sigma_db, "network.shadowing_sigma_db");
    if (!std::isfinite(c.tx_power_dbm) || !std::isfinite(c.noise_density_dbm_hz))
    {
        throw Error(ErrorCode::OutOfRange, "radio powers must be finite");
    }
    require_positive(c.speed_min_kmh, "network.speed_kmh[0]");
    if (!(c.speed_max_kmh >= c.speed_min_kmh) || !std::isfinite(c.speed_max_kmh))
    {
        throw Error(ErrorCode::OutOfRange, "network.speed_kmh must be an ascending [min, max]");
    }
    if (c.waypoints < 2)
    {
        throw Error(ErrorCode::OutOfRange, "network.waypoints must be at least 2");
    }
    if (c.n_cohorts == 0)
    {
        throw Error(ErrorCode::OutOfRange, "network.cohorts must be positive");
    }
    require_positive(c.total_bandwidth_hz, "resources.total_bandwidth_hz");
    require_positive(c.total_compute_ops, "resources.total_compute_ops");
    require_positive(c.small_ts_s, "timing.small_ts_s");
    require_positive(c.large_ts_s, "timing.large_ts_s");
    require_positive(c.tick_s, "timing.tick_s");
    if (c.sim_windows == 0)
    {
        throw Error(ErrorCode::OutOfRange, "timing.sim_windows must be positive");
    }
    if (c.buffer_segments == 0)
    {
        throw Error(ErrorCode::OutOfRange, "timing.buffer_segments must be positive");
    }
    if (!divides(c.small_ts_s, c.large_ts_s))
    {
        throw Error(ErrorCode::InconsistentTimescales, "small_ts_s must divide large_ts_s");
    }
    if (!divides(c.tick_s, c.small_ts_s))
    {
        throw Error(ErrorCode::InconsistentTimescales, "tick_s must divide small_ts_s");
    }
    if (c.catalog.count == 0)
    {
        throw Error(ErrorCode::OutOfRange, "catalog.count must be positive");
    }
    require_positive(c.catalog.duration_s, "catalog.duration_s");
    require_positive(c.catalog.segment_len_s, "catalog.segment_len_s");
    require_nonnegative(c.catalog.ops_per_bit, "catalog.ops_per_bit");
    if (c.catalog.ladder_bps.empty())
    {
        throw Error(ErrorCode::MissingField, "catalog.bitrate_ladder_bps is empty");
    }
    for (std::size_t i = 0; i < c.catalog.ladder_bps.size(); ++i)
    {
        if (!(c.catalog.ladder_bps[i] > 0.0) || (i > 0 && !(c.catalog.ladder_bps[i] > c.catalog.ladder_bps[i - 1])))
        {
            throw Error(ErrorCode::BadLadder, "catalog.bitrate_ladder_bps must be positive and ascending");
        }
    }
    if (!divides(c.catalog.segment_len_s, c.catalog.duration_s))
    {
        throw Error(ErrorCode::OutOfRange, "catalog.duration_s must be a multiple of segment_len_s");
    }
    require_nonnegative(c.kpi.weights.alpha, "kpi.alpha");
    require_nonnegative(c.kpi.weights.beta, "kpi.beta");
    require_nonnegative(c.kpi.weights.gamma, "kpi.gamma");
    require_nonnegative(c.kpi.stall_penalty, "kpi.stall_penalty");
    require_nonnegative(c.kpi.consumption_weight, "kpi.consumption_weight");
    require_nonnegative(c.kpi.op_cost, "kpi.op_cost");
    if (c.udt.capacity < 2)
    {
        throw Error(ErrorCode::OutOfRange, "udt.capacity must be at least 2");
    }
    require_nonnegative(c.udt.smoothing, "udt.smoothing");
    require_positive(c.udt.period_min_s, "udt.period_min_s");
    if (!(c.udt.period_max_s >= c.udt.period_min_s))
    {
        throw Error(ErrorCode::OutOfRange, "udt.period_max_s must be >= period_min_s");
    }
    require_positive(c.udt.required_sync_hz, "udt.required_sync_hz");
    if (!(c.udt.pca_variance > 0.0 && c.udt.pca_variance <= 1.0))
    {
        throw Error(ErrorCode::OutOfRange, "udt.pca_variance must be in (0, 1]");
    }
    if (c.sdt.g_max == 0 || c.sdt.rl_episodes == 0 || c.sdt.bucket_bins == 0 || c.sdt.dbscan_min_pts == 0 ||
        c.sdt.bnb_grid == 0 || c.sdt.recommend_k == 0)
    {
        throw Error(ErrorCode::OutOfRange, "sdt counts must be positive");
    }
    if (!(c.sdt.learning_rate > 0.0 && c.sdt.learning_rate <= 1.0))
    {
        throw Error(ErrorCode::OutOfRange, "sdt.learning_rate must be in (0, 1]");
    }
    if (!(c.sdt.epsilon_end >= 0.0 && c.sdt.epsilon_end <= c.sdt.epsilon_start && c.sdt.epsilon_start <= 1.0))
    {
        throw Error(ErrorCode::OutOfRange, "sdt epsilon schedule must satisfy 0 <= end <= start <= 1");
    }
    require_positive(c.sdt.dbscan_eps, "sdt.dbscan_eps");
    if (!(c.sdt.headroom >= 1.0))
    {
        throw Error(ErrorCode::OutOfRange, "sdt.headroom must be >= 1");
    }
    require_nonnegative(c.emulation.horizon_s, "emulation.horizon_s");
    require_positive(c.emulation.tick_s, "emulation.tick_s");
    return c;
}

ScenarioConfig
load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::Io, "cannot open scenario file " + path);
    }
    json raw;
    try
    {
        raw = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    }
    catch (const json::parse_error& e)
    {
        throw Error(ErrorCode::Io, "cannot parse " + path + ": " + e.what());
    }
    return validate_scenario(raw);
}

json
scenario_to_json(const ScenarioConfig& c)
{
    return json{
        {"seed", c.seed},
        {"algorithm", std::string(to_string(c.algorithm))},
        {"abstraction_level", c.abstraction.value()},
        {"network",
         {{"n_users", c.n_users},
          {"n_bs", c.n_bs},
          {"area_m", c.area_m},
          {"tx_power_dbm", c.tx_power_dbm},
          {"noise_density_dbm_hz", c.noise_density_dbm_hz},
          {"speed_kmh", {c.speed_min_kmh, c.speed_max_kmh}},
          {"user_radius_m", c.user_radius_m},
          {"waypoints", c.waypoints},
          {"shadowing_sigma_db", c.shadowing_sigma_db},
          {"cohorts", c.n_cohorts}}},
        {"resources", {{"total_bandwidth_hz", c.total_bandwidth_hz}, {"total_compute_ops", c.total_compute_ops}}},
        {"timing",
         {{"small_ts_s", c.small_ts_s},
          {"large_ts_s", c.large_ts_s},
          {"sim_windows", c.sim_windows},
          {"tick_s", c.tick_s},
          {"buffer_segments", c.buffer_segments}}},
        {"catalog",
         {{"count", c.catalog.count},
          {"duration_s", c.catalog.duration_s},
          {"segment_len_s", c.catalog.segment_len_s},
          {"bitrate_ladder_bps", c.catalog.ladder_bps},
          {"ops_per_bit", c.catalog.ops_per_bit}}},
        {"kpi",
         {{"alpha", c.kpi.weights.alpha},
          {"beta", c.kpi.weights.beta},
          {"gamma", c.kpi.weights.gamma},
          {"stall_penalty", c.kpi.stall_penalty},
          {"consumption_weight", c.kpi.consumption_weight},
          {"op_cost", c.kpi.op_cost}}},
        {"udt",
         {{"capacity", c.udt.capacity},
          {"smoothing", c.udt.smoothing},
          {"period_min_s", c.udt.period_min_s},
          {"period_max_s", c.udt.period_max_s},
          {"required_sync_hz", c.udt.required_sync_hz},
          {"history_events", c.udt.history_events},
          {"pca_variance", c.udt.pca_variance}}},
        {"sdt",
         {{"g_max", c.sdt.g_max},
          {"rl_episodes", c.sdt.rl_episodes},
          {"learning_rate", c.sdt.learning_rate},
          {"epsilon_start", c.sdt.epsilon_start},
          {"epsilon_end", c.sdt.epsilon_end},
          {"bucket_bins", c.sdt.bucket_bins},
          {"dbscan_eps", c.sdt.dbscan_eps},
          {"dbscan_min_pts", c.sdt.dbscan_min_pts},
          {"bnb_grid", c.sdt.bnb_grid},
          {"headroom", c.sdt.headroom},
          {"recommend_k", c.sdt.recommend_k}}},
        {"emulation", {{"horizon_s", c.emulation.horizon_s}, {"tick_s", c.emulation.tick_s}, {"seed", c.emulation.seed}}},
    };
}

} // namespace dtvs
