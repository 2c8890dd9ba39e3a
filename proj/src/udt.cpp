#include "dtvs/udt.hpp"

#include "dtvs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace dtvs
{

const char*
to_string(Attribute attribute)
{
    switch (attribute)
    {
    case Attribute::Position:
        return "position";
    case Attribute::ChannelQuality:
        return "channel_quality";
    case Attribute::SwipeEvents:
        return "swipe_events";
    case Attribute::PreferenceSignals:
        return "preference_signals";
    }
    return "unknown";
}

namespace
{

std::size_t
index(Attribute a)
{
    return static_cast<std::size_t>(a);
}

} // namespace

UdtPool::UdtPool(std::size_t capacity, double initial_period_s)
    : m_positions(capacity),
      m_channel(capacity),
      m_swipes(capacity),
      m_watch(capacity)
{
    m_period.fill(initial_period_s);
}

void
UdtPool::ingest(Attribute attribute, double time, const ObservationValue& value)
{
    const std::size_t i = index(attribute);
    if (m_synced[i] && !(time > m_last_sync[i]))
    {
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    std::string(to_string(attribute)) + " sample at t=" + std::to_string(time) +
                        " is not after t=" + std::to_string(m_last_sync[i]));
    }
    switch (attribute)
    {
    case Attribute::Position:
        if (auto p = std::get_if<Point>(&value))
        {
            m_positions.push(time, *p);
            break;
        }
        throw Error(ErrorCode::AttributeMismatch, "position expects a point");
    case Attribute::ChannelQuality:
        if (auto p = std::get_if<double>(&value))
        {
            m_channel.push(time, *p);
            break;
        }
        throw Error(ErrorCode::AttributeMismatch, "channel quality expects a path loss");
    case Attribute::SwipeEvents:
        if (auto p = std::get_if<SwipeObservation>(&value))
        {
            m_swipes.push(time, *p);
            break;
        }
        throw Error(ErrorCode::AttributeMismatch, "swipe events expect a swipe observation");
    case Attribute::PreferenceSignals:
        if (auto p = std::get_if<WatchSignal>(&value))
        {
            m_watch.push(time, *p);
            break;
        }
        throw Error(ErrorCode::AttributeMismatch, "preference signals expect a watch signal");
    }
    m_last_sync[i] = time;
    m_synced[i] = true;
}

void
ingest_observation(UdtPool& pool, Attribute attribute, double time, const ObservationValue& value)
{
    pool.ingest(attribute, time, value);
}

std::size_t
UdtPool::size(Attribute attribute) const
{
    switch (attribute)
    {
    case Attribute::Position:
        return m_positions.size();
    case Attribute::ChannelQuality:
        return m_channel.size();
    case Attribute::SwipeEvents:
        return m_swipes.size();
    case Attribute::PreferenceSignals:
        return m_watch.size();
    }
    return 0;
}

bool
UdtPool::has_sync(Attribute attribute) const
{
    return m_synced[index(attribute)];
}

double
UdtPool::last_sync(Attribute attribute) const
{
    return m_last_sync[index(attribute)];
}

double
UdtPool::age(Attribute attribute, double now) const
{
    if (!has_sync(attribute))
    {
        return std::numeric_limits<double>::infinity();
    }
    return std::max(0.0, now - last_sync(attribute));
}

template <typename F>
void
UdtPool::for_each_time_desc(Attribute attribute, F&& f) const
{
    auto walk = [&](const auto& series) {
        for (std::size_t i = series.size(); i-- > 0;)
        {
            if (!f(series[i].time))
            {
                return;
            }
        }
    };
    switch (attribute)
    {
    case Attribute::Position:
        walk(m_positions);
        break;
    case Attribute::ChannelQuality:
        walk(m_channel);
        break;
    case Attribute::SwipeEvents:
        walk(m_swipes);
        break;
    case Attribute::PreferenceSignals:
        walk(m_watch);
        break;
    }
}

double
UdtPool::achieved_frequency(Attribute attribute, double now, double window_s) const
{
    if (!(window_s > 0.0))
    {
        return 0.0;
    }
    std::size_t count = 0;
    for_each_time_desc(attribute, [&](double t) {
        if (t <= now - window_s)
        {
            return false;
        }
        if (t <= now)
        {
            ++count;
        }
        return true;
    });
    return static_cast<double>(count) / window_s;
}

double
UdtPool::collection_period(Attribute attribute) const
{
    return m_period[index(attribute)];
}

void
UdtPool::set_collection_period(Attribute attribute, double period_s)
{
    m_period[index(attribute)] = period_s;
}

bool
UdtPool::due(Attribute attribute, double now) const
{
    return !has_sync(attribute) || now - last_sync(attribute) >= collection_period(attribute) - 1e-9;
}

// ---------------------------------------------------------------------------

double
SwipeDistribution::expected_watch_segments(std::size_t type) const
{
    const auto& p = pmf.at(type);
    const std::size_t s_max = p.size() - 1;
    double e = 0.0;
    for (std::size_t i = 0; i < s_max; ++i)
    {
        e += static_cast<double>(i + 1) * p[i];
    }
    e += static_cast<double>(s_max) * p[s_max];
    return e;
}

SwipeDistribution
estimate_swipe_distribution(const UdtPool& pool, std::size_t n_types, std::size_t n_segments, double smoothing)
{
    if (n_segments == 0)
    {
        throw Error(ErrorCode::OutOfRange, "n_segments must be at least 1");
    }
    const std::size_t outcomes = n_segments + 1;
    std::vector<std::vector<double>> counts(n_types, std::vector<double>(outcomes, 0.0));
    std::vector<double> totals(n_types, 0.0);
    const auto& swipes = pool.swipes();
    for (std::size_t i = 0; i < swipes.size(); ++i)
    {
        const auto& obs = swipes[i].value;
        if (obs.type >= n_types || obs.outcome < 1 || obs.outcome > outcomes)
        {
            continue;
        }
        counts[obs.type][obs.outcome - 1] += 1.0;
        totals[obs.type] += 1.0;
    }
    SwipeDistribution dist;
    dist.pmf.resize(n_types);
    for (std::size_t t = 0; t < n_types; ++t)
    {
        auto& pmf = dist.pmf[t];
        pmf.resize(outcomes);
        const double denom = totals[t] + smoothing * static_cast<double>(outcomes);
        for (std::size_t k = 0; k < outcomes; ++k)
        {
            pmf[k] = denom > 0.0 ? (counts[t][k] + smoothing) / denom : 1.0 / static_cast<double>(outcomes);
        }
    }
    return dist;
}

Preference
estimate_preference(const UdtPool& pool)
{
    Preference pref{};
    double total = 0.0;
    const auto& watch = pool.watch_signals();
    for (std::size_t i = 0; i < watch.size(); ++i)
    {
        const auto& w = watch[i].value;
        if (w.type < kVideoTypes && w.watch_s > 0.0)
        {
            pref[w.type] += w.watch_s;
            total += w.watch_s;
        }
    }
    if (!(total > 0.0))
    {
        pref.fill(1.0 / static_cast<double>(kVideoTypes));
        return pref;
    }
    for (auto& p : pref)
    {
        p /= total;
    }
    return pref;
}

std::vector<double>
feature_importance_pca(const Eigen::MatrixXd& data, double variance_kept)
{
    const auto n = data.rows();
    const auto d = data.cols();
    if (n < 2)
    {
        throw Error(ErrorCode::TooFewSamples, "PCA needs at least two samples");
    }
    std::vector<double> importance(static_cast<std::size_t>(d), 0.0);

    // standardize, dropping constant columns
    std::vector<Eigen::Index> live;
    Eigen::MatrixXd z(n, d);
    for (Eigen::Index j = 0; j < d; ++j)
    {
        const double mean = data.col(j).mean();
        const Eigen::VectorXd centered = data.col(j).array() - mean;
        const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
        if (sd > 1e-12 * std::max(1.0, std::abs(mean)))
        {
            z.col(static_cast<Eigen::Index>(live.size())) = centered / sd;
            live.push_back(j);
        }
    }
    if (live.empty())
    {
        return importance;
    }
    const auto k = static_cast<Eigen::Index>(live.size());
    const Eigen::MatrixXd zs = z.leftCols(k);
    const Eigen::MatrixXd corr = (zs.transpose() * zs) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
    const Eigen::VectorXd& values = solver.eigenvalues(); // ascending
    const Eigen::MatrixXd& vectors = solver.eigenvectors();

    const double trace = std::max(values.sum(), 0.0);
    // leading components up to the variance target, plus any tied with the last one kept
    double kept = 0.0;
    Eigen::Index first = k; // components [first, k) are kept
    while (first > 0 && kept < variance_kept * trace - 1e-12)
    {
        --first;
        kept += std::max(values(first), 0.0);
    }
    const double cutoff = values(first);
    while (first > 0 && std::abs(values(first - 1) - cutoff) <= 1e-9 * std::max(1.0, std::abs(cutoff)))
    {
        --first;
        kept += std::max(values(first), 0.0);
    }
    if (!(kept > 0.0))
    {
        return importance;
    }
    for (Eigen::Index i = 0; i < k; ++i)
    {
        double acc = 0.0;
        for (Eigen::Index c = first; c < k; ++c)
        {
            const double w = vectors(i, c);
            acc += std::max(values(c), 0.0) * w * w;
        }
        importance[static_cast<std::size_t>(live[static_cast<std::size_t>(i)])] = acc / kept;
    }
    return importance;
}

double
distribution_drift(std::span<const double> previous, std::span<const double> recent)
{
    if (previous.empty() || recent.empty())
    {
        return 0.0;
    }
    auto moments = [](std::span<const double> xs) {
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs)
        {
            ss += (x - mean) * (x - mean);
        }
        return std::pair{mean, ss};
    };
    const auto [m_prev, ss_prev] = moments(previous);
    const auto [m_rec, ss_rec] = moments(recent);
    const double pooled = std::sqrt((ss_prev + ss_rec) / static_cast<double>(previous.size() + recent.size()));
    return std::abs(m_rec - m_prev) / (pooled + 1e-9);
}

double
adapt_collection_period(double importance, double drift, double t_min, double t_max)
{
    const double imp = std::clamp(importance, 0.0, 1.0);
    const double dr = std::max(0.0, drift);
    const double period = t_min + (t_max - t_min) * (1.0 - imp) * std::exp(-dr);
    return std::clamp(period, t_min, t_max);
}

FreshnessState
freshness_state(const UdtPool& pool, double now, double window_s, double required_hz)
{
    FreshnessState state;
    for (Attribute a : kPeriodicAttributes)
    {
        state.achieved_hz.push_back(pool.achieved_frequency(a, now, window_s));
        state.required_hz.push_back(required_hz);
        const double age = pool.age(a, now);
        state.age_s.push_back(std::isfinite(age) ? age : window_s);
    }
    return state;
}

double
freshness_ratio(const FreshnessState& state)
{
    if (state.achieved_hz.empty())
    {
        return 0.0;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < state.achieved_hz.size(); ++i)
    {
        if (!(state.required_hz[i] > 0.0))
        {
            throw Error(ErrorCode::OutOfRange, "required sync frequency must be positive");
        }
        acc += std::min(1.0, std::max(0.0, state.achieved_hz[i]) / state.required_hz[i]);
    }
    return std::min(1.0, acc / static_cast<double>(state.achieved_hz.size()));
}

UdtAbstraction
abstract_user(UserId user, const UdtPool& pool, std::size_t n_segments, double smoothing)
{
    UdtAbstraction a;
    a.user = user;
    if (!pool.positions().empty())
    {
        a.position = pool.positions().back().value;
    }
    if (!pool.channel().empty())
    {
        a.path_loss_db = pool.channel().back().value;
    }
    a.swipe = estimate_swipe_distribution(pool, kVideoTypes, n_segments, smoothing);
    a.preference = estimate_preference(pool);
    return a;
}

void
write_udt_snapshot(std::ostream& out, std::span<const UdtPool> pools, double now, double window_s, bool header)
{
    if (header)
    {
        out << "user,attribute,age,f,period\n";
    }
    for (std::size_t u = 0; u < pools.size(); ++u)
    {
        for (std::size_t a = 0; a < kAttributes; ++a)
        {
            const auto attr = static_cast<Attribute>(a);
            const double age = pools[u].age(attr, now);
            out << u << ',' << to_string(attr) << ',';
            if (std::isfinite(age))
            {
                out << age;
            }
            out << ',' << pools[u].achieved_frequency(attr, now, window_s) << ',' << pools[u].collection_period(attr)
                << '\n';
        }
    }
}

} // namespace dtvs
