#pragma once

// Independent reference computations used by the tests. None of these call
// into the library; they follow a different route to the same quantity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle
{

/// Shannon rate with powers handled in linear milliwatts, long double.
inline long double
link_rate(long double tx_dbm, long double pl_db, long double noise_dbm_hz, long double bandwidth_hz)
{
    if (bandwidth_hz <= 0)
    {
        return 0;
    }
    const long double rx_mw = std::pow(10.0L, (tx_dbm - pl_db) / 10.0L);
    const long double noise_mw = std::pow(10.0L, noise_dbm_hz / 10.0L) * bandwidth_hz;
    return bandwidth_hz * std::log2(1.0L + rx_mw / noise_mw);
}

/// Truncated geometric plus completion atom, normalized by summing the
/// untruncated weights rather than through the closed-form tail.
inline std::vector<double>
swipe_pmf(double p, double q, std::size_t s)
{
    std::vector<long double> w(s);
    long double total = 0;
    for (std::size_t i = 0; i < s; ++i)
    {
        w[i] = p == 0.0 ? 1.0L : static_cast<long double>(p) * std::pow(1.0L - p, static_cast<long double>(i));
        total += w[i];
    }
    std::vector<double> pmf(s + 1);
    for (std::size_t i = 0; i < s; ++i)
    {
        pmf[i] = static_cast<double>((1.0L - q) * w[i] / total);
    }
    pmf[s] = q;
    return pmf;
}

inline double
total_variation(const std::vector<double>& a, const std::vector<double>& b)
{
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        tv += std::abs(a[i] - b[i]);
    }
    return 0.5 * tv;
}

using Matrix = std::vector<std::vector<double>>;

/// Cyclic Jacobi rotations for a symmetric matrix; eigenvalues and column
/// eigenvectors.
inline void
jacobi_eigen(Matrix a, std::vector<double>& values, Matrix& vectors)
{
    const std::size_t n = a.size();
    vectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
    {
        vectors[i][i] = 1.0;
    }
    for (int sweep = 0; sweep < 100; ++sweep)
    {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            for (std::size_t j = i + 1; j < n; ++j)
            {
                off += a[i][j] * a[i][j];
            }
        }
        if (off < 1e-30)
        {
            break;
        }
        for (std::size_t p = 0; p < n; ++p)
        {
            for (std::size_t q = p + 1; q < n; ++q)
            {
                if (std::abs(a[p][q]) < 1e-300)
                {
                    continue;
                }
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const double vkp = vectors[k][p];
                    const double vkq = vectors[k][q];
                    vectors[k][p] = c * vkp - s * vkq;
                    vectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        values[i] = a[i][i];
    }
}

/// Correlation-matrix importance over the leading components that reach
/// `kept` of the variance (ties with the last kept eigenvalue included).
inline std::vector<double>
pca_importance(const Matrix& rows, double kept)
{
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (const auto& r : rows)
    {
        for (std::size_t j = 0; j < d; ++j)
        {
            mean[j] += r[j] / static_cast<double>(n);
        }
    }
    for (const auto& r : rows)
    {
        for (std::size_t j = 0; j < d; ++j)
        {
            sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        }
    }
    std::vector<std::size_t> live;
    for (std::size_t j = 0; j < d; ++j)
    {
        sd[j] = std::sqrt(sd[j] / static_cast<double>(n - 1));
        if (sd[j] > 1e-12 * std::max(1.0, std::abs(mean[j])))
        {
            live.push_back(j);
        }
    }
    std::vector<double> importance(d, 0.0);
    if (live.empty())
    {
        return importance;
    }
    const std::size_t m = live.size();
    Matrix corr(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
    {
        for (std::size_t b = 0; b < m; ++b)
        {
            double s = 0.0;
            for (const auto& r : rows)
            {
                s += (r[live[a]] - mean[live[a]]) / sd[live[a]] * (r[live[b]] - mean[live[b]]) / sd[live[b]];
            }
            corr[a][b] = s / static_cast<double>(n - 1);
        }
    }
    std::vector<double> values;
    Matrix vectors;
    jacobi_eigen(corr, values, vectors);
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i)
    {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
    double total = 0.0;
    for (double v : values)
    {
        total += std::max(v, 0.0);
    }
    double acc = 0.0;
    double kept_sum = 0.0;
    double last = 0.0;
    std::vector<double> imp(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
    {
        const double lam = std::max(values[order[i]], 0.0);
        if (acc >= kept * total - 1e-12 && std::abs(lam - last) > 1e-9 * std::max(1.0, std::abs(last)))
        {
            break;
        }
        for (std::size_t j = 0; j < m; ++j)
        {
            imp[j] += lam * vectors[j][order[i]] * vectors[j][order[i]];
        }
        acc += lam;
        kept_sum += lam;
        last = lam;
    }
    for (std::size_t j = 0; j < m; ++j)
    {
        importance[live[j]] = kept_sum > 0 ? imp[j] / kept_sum : 0.0;
    }
    return importance;
}

inline double
log_utility(double b, double d, double n)
{
    return n * std::log1p(b / d);
}

/// Best separable allocation on a grid of `units` steps by dynamic
/// programming; returns the objective.
inline double
grid_optimum(const std::vector<double>& demand,
             const std::vector<double>& weight,
             const std::vector<double>& cap,
             double budget,
             std::size_t units)
{
    const double step = budget / static_cast<double>(units);
    std::vector<double> best(units + 1, 0.0);
    for (std::size_t g = 0; g < demand.size(); ++g)
    {
        std::vector<double> next(units + 1, -std::numeric_limits<double>::infinity());
        const auto cap_units = static_cast<std::size_t>(std::floor(cap[g] / step + 1e-9));
        for (std::size_t used = 0; used <= units; ++used)
        {
            for (std::size_t x = 0; x <= std::min(used, cap_units); ++x)
            {
                const double v = best[used - x] + log_utility(static_cast<double>(x) * step, demand[g], weight[g]);
                next[used] = std::max(next[used], v);
            }
        }
        best = next;
    }
    return *std::max_element(best.begin(), best.end());
}

/// Every grid allocation with per-group caps and the budget; returns the best
/// objective and one maximizer.
inline double
exhaustive_grid(const std::vector<double>& demand,
                const std::vector<double>& weight,
                const std::vector<double>& cap,
                double budget,
                double step,
                std::vector<double>& argmax)
{
    const std::size_t g = demand.size();
    const auto total_units = static_cast<std::size_t>(std::floor(budget / step + 1e-9));
    std::vector<std::size_t> x(g, 0);
    double best = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i == g)
        {
            double v = 0.0;
            for (std::size_t k = 0; k < g; ++k)
            {
                v += log_utility(static_cast<double>(x[k]) * step, demand[k], weight[k]);
            }
            if (v > best)
            {
                best = v;
                argmax.assign(g, 0.0);
                for (std::size_t k = 0; k < g; ++k)
                {
                    argmax[k] = static_cast<double>(x[k]) * step;
                }
            }
            return;
        }
        const auto cap_units = static_cast<std::size_t>(std::floor(cap[i] / step + 1e-9));
        for (std::size_t u = 0; u <= std::min(left, cap_units); ++u)
        {
            x[i] = u;
            rec(i + 1, left - u);
        }
    };
    rec(0, total_units);
    return best;
}

/// Ester et al. DBSCAN: recursive region expansion over precomputed
/// neighbourhoods; -1 noise, clusters numbered as found.
inline std::vector<int>
dbscan(const std::vector<std::vector<double>>& pts, double eps, std::size_t min_pts)
{
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j < n; ++j)
        {
            double s = 0.0;
            for (std::size_t k = 0; k < pts[i].size(); ++k)
            {
                s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
            }
            if (std::sqrt(s) <= eps)
            {
                nb[i].push_back(j);
            }
        }
    }
    std::vector<int> label(n, -2);
    int cluster = 0;
    std::function<void(std::size_t)> expand = [&](std::size_t p) {
        for (std::size_t q : nb[p])
        {
            if (label[q] == -1)
            {
                label[q] = cluster;
            }
            if (label[q] != -2)
            {
                continue;
            }
            label[q] = cluster;
            if (nb[q].size() >= min_pts)
            {
                expand(q);
            }
        }
    };
    for (std::size_t p = 0; p < n; ++p)
    {
        if (label[p] != -2)
        {
            continue;
        }
        if (nb[p].size() < min_pts)
        {
            label[p] = -1;
            continue;
        }
        label[p] = cluster;
        expand(p);
        ++cluster;
    }
    return label;
}

/// Segments a single viewer has received by time t when the link runs at
/// `ratio` segments per second and may lead the playhead by `cap` segments;
/// integrated with a fine step.
inline double
fluid_delivered(double ratio, double cap, double t_end, double dt = 1e-4)
{
    double delivered = 0.0;
    double played = 0.0;
    for (double t = 0.0; t < t_end; t += dt)
    {
        const double limit = std::floor(played) + cap;
        delivered = std::min(delivered + ratio * dt, std::max(delivered, limit));
        if (played + dt <= std::floor(delivered) + 1e-12)
        {
            played += dt;
        }
    }
    return delivered;
}

} // namespace oracle
