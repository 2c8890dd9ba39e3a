#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/physnet.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dtvs
{

enum class Attribute : std::size_t
{
    Position = 0,
    ChannelQuality = 1,
    SwipeEvents = 2,
    PreferenceSignals = 3,
};

inline constexpr std::size_t kAttributes = 4;

/// Attributes the twin samples on a clock; the other two arrive as events.
inline constexpr std::array<Attribute, 2> kPeriodicAttributes{Attribute::Position, Attribute::ChannelQuality};

const char* to_string(Attribute attribute);

struct SwipeObservation
{
    std::size_t type = 0;
    std::size_t outcome = 0; ///< 1..S+1, S+1 = watched to completion
};

struct WatchSignal
{
    std::size_t type = 0;
    double watch_s = 0.0;
};

/// Position, channel quality (path loss, dB), swipe event, watch-time signal.
using ObservationValue = std::variant<Point, double, SwipeObservation, WatchSignal>;

/// Fixed-capacity time series; the oldest sample is evicted when full.
template <typename T>
class TimeSeries
{
  public:
    struct Sample
    {
        double time;
        T value;
    };

    explicit TimeSeries(std::size_t capacity = 512)
        : m_capacity(capacity)
    {
        m_data.reserve(capacity);
    }

    void push(double time, const T& value)
    {
        if (m_data.size() < m_capacity)
        {
            m_data.push_back({time, value});
        }
        else
        {
            m_data[m_head] = {time, value};
            m_head = (m_head + 1) % m_capacity;
        }
    }

    std::size_t size() const
    {
        return m_data.size();
    }
    std::size_t capacity() const
    {
        return m_capacity;
    }
    bool empty() const
    {
        return m_data.empty();
    }

    /// i-th sample, oldest first.
    const Sample& operator[](std::size_t i) const
    {
        return m_data[(m_head + i) % m_data.size()];
    }
    const Sample& back() const
    {
        return (*this)[m_data.size() - 1];
    }

  private:
    std::size_t m_capacity;
    std::size_t m_head = 0;
    std::vector<Sample> m_data;
};

/// A user twin's finite observation store with per-attribute freshness.
class UdtPool
{
  public:
    explicit UdtPool(std::size_t capacity = 512, double initial_period_s = 1.0);

    /// Appends a sample. Timestamps must strictly increase per attribute and
    /// the value type must match the attribute.
    void ingest(Attribute attribute, double time, const ObservationValue& value);

    const TimeSeries<Point>& positions() const
    {
        return m_positions;
    }
    const TimeSeries<double>& channel() const
    {
        return m_channel;
    }
    const TimeSeries<SwipeObservation>& swipes() const
    {
        return m_swipes;
    }
    const TimeSeries<WatchSignal>& watch_signals() const
    {
        return m_watch;
    }

    std::size_t size(Attribute attribute) const;
    bool has_sync(Attribute attribute) const;
    double last_sync(Attribute attribute) const;

    /// Time since the last sample of the attribute; infinite before the first.
    double age(Attribute attribute, double now) const;

    /// Samples in (now - window, now] divided by the window length.
    double achieved_frequency(Attribute attribute, double now, double window_s) const;

    double collection_period(Attribute attribute) const;
    void set_collection_period(Attribute attribute, double period_s);

    /// True when a periodic attribute is due for its next sample at `now`.
    bool due(Attribute attribute, double now) const;

  private:
    TimeSeries<Point> m_positions;
    TimeSeries<double> m_channel;
    TimeSeries<SwipeObservation> m_swipes;
    TimeSeries<WatchSignal> m_watch;
    std::array<double, kAttributes> m_last_sync{};
    std::array<bool, kAttributes> m_synced{};
    std::array<double, kAttributes> m_period{};

    template <typename F>
    void for_each_time_desc(Attribute attribute, F&& f) const;
};

void ingest_observation(UdtPool& pool, Attribute attribute, double time, const ObservationValue& value);

/// Per video type, a pmf over outcomes 1..S+1 (stored at 0..S).
struct SwipeDistribution
{
    std::vector<std::vector<double>> pmf;

    std::size_t n_segments() const
    {
        return pmf.empty() ? 0 : pmf.front().size() - 1;
    }
    /// Expected segments watched for a type (completion counts as S).
    double expected_watch_segments(std::size_t type) const;
};

/// Laplace-smoothed empirical pmf per type; uniform for unseen types when
/// smoothing is zero.
SwipeDistribution estimate_swipe_distribution(const UdtPool& pool,
                                              std::size_t n_types,
                                              std::size_t n_segments,
                                              double smoothing);

/// Watch-time share per type; uniform when no watch time was observed.
Preference estimate_preference(const UdtPool& pool);

/// Data importance from the leading principal components of the correlation
/// matrix: importance_d = sum_k lambda_k w_kd^2 / sum_k lambda_k over the
/// components that explain `variance_kept` of the variance. Constant columns
/// get 0.
std::vector<double> feature_importance_pca(const Eigen::MatrixXd& data, double variance_kept = 0.8);

/// Standardized mean shift between two consecutive windows of a series.
double distribution_drift(std::span<const double> previous, std::span<const double> recent);

/// Sampling period, decreasing in both importance and drift, within [t_min, t_max].
double adapt_collection_period(double importance, double drift, double t_min, double t_max);

struct FreshnessState
{
    std::vector<double> achieved_hz; ///< f
    std::vector<double> required_hz; ///< F
    std::vector<double> age_s;
};

FreshnessState freshness_state(const UdtPool& pool, double now, double window_s, double required_hz);

/// min(1, mean over attributes of min(1, f / F)).
double freshness_ratio(const FreshnessState& state);

/// What a user twin hands to the infrastructure and slice twins.
struct UdtAbstraction
{
    UserId user = 0;
    Point position;
    double path_loss_db = 0.0;
    SwipeDistribution swipe;
    Preference preference{};
};

UdtAbstraction abstract_user(UserId user, const UdtPool& pool, std::size_t n_segments, double smoothing);

/// CSV rows: user, attribute, age, f, period.
void write_udt_snapshot(std::ostream& out,
                        std::span<const UdtPool> pools,
                        double now,
                        double window_s,
                        bool header = true);

} // namespace dtvs
