#include "dtvs/rng.hpp"

#include <cmath>
#include <numbers>

namespace dtvs
{

namespace
{

// splitmix64 finalizer, used to spread labels and indices over the seed space
std::uint64_t
mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Rng::Rng(std::uint64_t seed)
    : m_engine(mix(seed))
{
}

Rng
Rng::derive(std::uint64_t master, std::string_view stream, std::uint64_t index)
{
    // FNV-1a over the label
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stream)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return Rng(mix(master) ^ mix(h) ^ mix(index * 0x2545f4914f6cdd1dULL + 1));
}

std::uint64_t
Rng::next_u64()
{
    return m_engine();
}

double
Rng::uniform01()
{
    return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
}

double
Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform01();
}

std::uint64_t
Rng::below(std::uint64_t n)
{
    // rejection sampling keeps the result unbiased
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do
    {
        x = m_engine();
    } while (x >= limit);
    return x % n;
}

double
Rng::normal()
{
    double u1 = uniform01();
    while (u1 <= 0.0)
    {
        u1 = uniform01();
    }
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t
Rng::categorical(std::span<const double> weights)
{
    double total = 0.0;
    for (double w : weights)
    {
        total += w;
    }
    if (weights.empty())
    {
        return 0;
    }
    if (total <= 0.0)
    {
        return below(weights.size());
    }
    const double target = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        acc += weights[i];
        if (target < acc)
        {
            return i;
        }
    }
    // rounding: fall back to the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
    {
        if (weights[i] > 0.0)
        {
            return i;
        }
    }
    return weights.size() - 1;
}

} // namespace dtvs
