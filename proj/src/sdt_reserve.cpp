#include "dtvs/error.hpp"
#include "dtvs/sdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace dtvs
{

double
reservation_objective(std::span<const double> allocation, std::span<const double> demand, std::span<const double> weight)
{
    double v = 0.0;
    for (std::size_t g = 0; g < allocation.size(); ++g)
    {
        v += weight[g] * std::log1p(allocation[g] / demand[g]);
    }
    return v;
}

namespace
{

void
check_inputs(std::span<const double> demand, std::span<const double> weight, std::span<const double> cap)
{
    if (demand.size() != weight.size() || demand.size() != cap.size())
    {
        throw Error(ErrorCode::OutOfRange, "demand, weight and cap sizes differ");
    }
    for (std::size_t g = 0; g < demand.size(); ++g)
    {
        if (!(demand[g] > 0.0) || !std::isfinite(demand[g]))
        {
            throw Error(ErrorCode::OutOfRange, "demands must be positive and finite");
        }
        if (!(weight[g] >= 0.0) || !(cap[g] >= 0.0))
        {
            throw Error(ErrorCode::OutOfRange, "weights and caps must be non-negative");
        }
    }
}

} // namespace

std::vector<double>
water_fill(std::span<const double> demand, std::span<const double> weight, std::span<const double> cap, double budget)
{
    check_inputs(demand, weight, cap);
    const std::size_t n = demand.size();
    std::vector<double> b(n, 0.0);
    if (!(budget > 0.0) || n == 0)
    {
        return b;
    }

    // groups with zero weight gain nothing and stay at zero
    double useful_caps = 0.0;
    for (std::size_t g = 0; g < n; ++g)
    {
        if (weight[g] > 0.0)
        {
            useful_caps += cap[g];
        }
    }
    if (useful_caps <= budget)
    {
        for (std::size_t g = 0; g < n; ++g)
        {
            b[g] = weight[g] > 0.0 ? cap[g] : 0.0;
        }
        return b;
    }

    auto fill = [&](double nu, std::vector<double>& out) {
        double sum = 0.0;
        for (std::size_t g = 0; g < n; ++g)
        {
            const double x = weight[g] > 0.0 ? std::clamp(weight[g] / nu - demand[g], 0.0, cap[g]) : 0.0;
            out[g] = x;
            sum += x;
        }
        return sum;
    };

    // the water level nu lies between "every group capped" and "every group empty"
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t g = 0; g < n; ++g)
    {
        if (weight[g] > 0.0)
        {
            lo = std::min(lo, weight[g] / (demand[g] + cap[g]));
            hi = std::max(hi, weight[g] / demand[g]);
        }
    }
    std::vector<double> tmp(n);
    for (int it = 0; it < 400; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
        {
            break;
        }
        if (fill(mid, tmp) > budget)
        {
            lo = mid;
        }
        else
        {
            hi = mid;
        }
    }
    const double sum = fill(hi, b);
    // hand the bisection residue to the groups strictly inside their bounds
    double residue = budget - sum;
    if (residue > 0.0)
    {
        for (std::size_t g = 0; g < n && residue > 0.0; ++g)
        {
            if (weight[g] > 0.0 && b[g] > 0.0 && b[g] < cap[g])
            {
                const double add = std::min(residue, cap[g] - b[g]);
                b[g] += add;
                residue -= add;
            }
        }
    }
    return b;
}

std::vector<double>
branch_and_bound(std::span<const double> demand,
                 std::span<const double> weight,
                 std::span<const double> cap,
                 double budget,
                 double step)
{
    check_inputs(demand, weight, cap);
    if (!(step > 0.0))
    {
        throw Error(ErrorCode::OutOfRange, "grid step must be positive");
    }
    const std::size_t n = demand.size();
    if (n == 0 || !(budget > 0.0))
    {
        return std::vector<double>(n, 0.0);
    }
    const double units_real = std::floor(budget / step + 1e-9);
    if (units_real > 1e4)
    {
        throw Error(ErrorCode::GridTooFine, "more than 10^4 grid points per group");
    }
    const auto total_units = static_cast<std::size_t>(units_real);

    std::vector<std::size_t> max_units(n);
    std::vector<double> grid_cap(n);
    for (std::size_t g = 0; g < n; ++g)
    {
        max_units[g] = std::min(total_units, static_cast<std::size_t>(std::floor(cap[g] / step + 1e-9)));
        grid_cap[g] = static_cast<double>(max_units[g]) * step;
    }
    auto gain = [&](std::size_t g, std::size_t units) {
        return weight[g] * std::log1p(static_cast<double>(units) * step / demand[g]);
    };
    auto leaf_value = [&](const std::vector<std::size_t>& units) {
        std::vector<double> alloc(n);
        for (std::size_t g = 0; g < n; ++g)
        {
            alloc[g] = static_cast<double>(units[g]) * step;
        }
        return reservation_objective(alloc, demand, weight);
    };

    // branching order: largest demand first
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return demand[a] > demand[b]; });

    // continuous optimum of the groups order[depth..] with `units` left
    std::vector<double> sub_d, sub_w, sub_c;
    auto relax = [&](std::size_t depth, std::size_t units, std::vector<double>* alloc = nullptr) {
        sub_d.clear();
        sub_w.clear();
        sub_c.clear();
        for (std::size_t i = depth; i < n; ++i)
        {
            sub_d.push_back(demand[order[i]]);
            sub_w.push_back(weight[order[i]]);
            sub_c.push_back(grid_cap[order[i]]);
        }
        auto b = water_fill(sub_d, sub_w, sub_c, static_cast<double>(units) * step);
        if (alloc != nullptr)
        {
            *alloc = b;
        }
        return reservation_objective(b, sub_d, sub_w);
    };

    // incumbent: greedy marginal allocation on the grid
    std::vector<std::size_t> best_units(n, 0);
    {
        using Item = std::pair<double, std::size_t>;
        auto cmp = [](const Item& a, const Item& b) {
            return a.first < b.first || (a.first == b.first && a.second > b.second);
        };
        std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
        for (std::size_t g = 0; g < n; ++g)
        {
            if (max_units[g] > 0 && weight[g] > 0.0)
            {
                heap.push({gain(g, 1) - gain(g, 0), g});
            }
        }
        for (std::size_t u = 0; u < total_units && !heap.empty(); ++u)
        {
            const auto [delta, g] = heap.top();
            heap.pop();
            ++best_units[g];
            if (best_units[g] < max_units[g])
            {
                heap.push({gain(g, best_units[g] + 1) - gain(g, best_units[g]), g});
            }
        }
    }
    double incumbent = leaf_value(best_units);
    auto tolerance = [&] { return 1e-10 * std::max(1.0, std::abs(incumbent)); };

    struct Node
    {
        double bound;
        std::size_t depth;
        std::size_t units_left;
        double fixed;
        std::vector<std::size_t> units;
    };
    auto worse = [](const Node& a, const Node& b) { return a.bound < b.bound; };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
    open.push(Node{relax(0, total_units), 0, total_units, 0.0, std::vector<std::size_t>(n, 0)});

    // expansion cap; the greedy incumbent stands if it is hit
    constexpr std::size_t kMaxExpansions = 200000;
    std::size_t expansions = 0;
    std::vector<double> relaxed;
    while (!open.empty() && expansions < kMaxExpansions)
    {
        Node node = open.top();
        open.pop();
        if (node.bound < incumbent - tolerance())
        {
            break;
        }
        ++expansions;
        const std::size_t j = order[node.depth];
        const std::size_t limit = std::min(max_units[j], node.units_left);
        relax(node.depth, node.units_left, &relaxed);
        const auto x_star = static_cast<std::size_t>(std::min<double>(static_cast<double>(limit), std::floor(relaxed[0] / step)));

        auto visit = [&](std::size_t x) {
            const double fixed = node.fixed + gain(j, x);
            if (node.depth + 1 == n)
            {
                std::vector<std::size_t> units = node.units;
                units[j] = x;
                const double v = leaf_value(units);
                if (v > incumbent)
                {
                    incumbent = v;
                    best_units = std::move(units);
                }
                return fixed;
            }
            const double bound = fixed + relax(node.depth + 1, node.units_left - x);
            if (bound >= incumbent - tolerance())
            {
                std::vector<std::size_t> units = node.units;
                units[j] = x;
                open.push(Node{bound, node.depth + 1, node.units_left - x, fixed, std::move(units)});
            }
            return bound;
        };

        // concave child bound: scan outwards from the relaxed optimum, stop each
        // side once it drops below the incumbent
        for (std::size_t x = x_star + 1; x-- > 0;)
        {
            if (visit(x) < incumbent - tolerance())
            {
                break;
            }
        }
        for (std::size_t x = x_star + 1; x <= limit; ++x)
        {
            if (visit(x) < incumbent - tolerance())
            {
                break;
            }
        }
    }

    std::vector<double> alloc(n);
    for (std::size_t g = 0; g < n; ++g)
    {
        alloc[g] = static_cast<double>(best_units[g]) * step;
    }
    return alloc;
}

namespace
{

struct Sides
{
    std::vector<double> bw_d, cpu_d, w, bw_cap, cpu_cap;
};

Sides
split(std::span<const SliceDemand> demands, double headroom)
{
    if (demands.empty())
    {
        throw Error(ErrorCode::EmptyDemands, "no groups to reserve for");
    }
    Sides s;
    for (const auto& d : demands)
    {
        s.bw_d.push_back(d.bandwidth_hz);
        s.cpu_d.push_back(d.compute_ops);
        s.w.push_back(d.weight);
        s.bw_cap.push_back(headroom * d.bandwidth_hz);
        s.cpu_cap.push_back(headroom * d.compute_ops);
    }
    return s;
}

} // namespace

SliceReservation
reserve_convex(std::span<const SliceDemand> demands, double total_bandwidth_hz, double total_compute_ops, double headroom)
{
    const Sides s = split(demands, headroom);
    return {water_fill(s.bw_d, s.w, s.bw_cap, total_bandwidth_hz), water_fill(s.cpu_d, s.w, s.cpu_cap, total_compute_ops)};
}

SliceReservation
reserve_bnb(std::span<const SliceDemand> demands,
            double total_bandwidth_hz,
            double total_compute_ops,
            double headroom,
            double bandwidth_step,
            double compute_step)
{
    const Sides s = split(demands, headroom);
    return {branch_and_bound(s.bw_d, s.w, s.bw_cap, total_bandwidth_hz, bandwidth_step),
            branch_and_bound(s.cpu_d, s.w, s.cpu_cap, total_compute_ops, compute_step)};
}

namespace
{

std::vector<double>
proportional_split(std::span<const std::vector<double>> history, double total)
{
    const std::size_t n = history.size();
    std::vector<double> means(n, 0.0);
    std::vector<bool> known(n, false);
    double known_sum = 0.0;
    std::size_t known_count = 0;
    for (std::size_t g = 0; g < n; ++g)
    {
        if (!history[g].empty())
        {
            means[g] = std::accumulate(history[g].begin(), history[g].end(), 0.0) / static_cast<double>(history[g].size());
            known[g] = true;
            known_sum += means[g];
            ++known_count;
        }
    }
    const double prior = known_count > 0 ? known_sum / static_cast<double>(known_count) : 1.0;
    double sum = 0.0;
    for (std::size_t g = 0; g < n; ++g)
    {
        if (!known[g])
        {
            means[g] = prior;
        }
        sum += means[g];
    }
    std::vector<double> out(n, n > 0 ? total / static_cast<double>(n) : 0.0);
    if (sum > 0.0)
    {
        for (std::size_t g = 0; g < n; ++g)
        {
            out[g] = total * means[g] / sum;
        }
    }
    return out;
}

} // namespace

SliceReservation
reserve_historical(std::span<const std::vector<double>> bits_history,
                   std::span<const std::vector<double>> ops_history,
                   double total_bandwidth_hz,
                   double total_compute_ops)
{
    if (bits_history.empty() || bits_history.size() != ops_history.size())
    {
        throw Error(ErrorCode::EmptyDemands, "history must cover every group");
    }
    return {proportional_split(bits_history, total_bandwidth_hz), proportional_split(ops_history, total_compute_ops)};
}

} // namespace dtvs
