#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace dtvs
{

/// Seedable generator with platform-independent draws. The standard
/// distributions are implementation-defined, so only the raw engine output
/// is used and every variate is derived here.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed = 0);

    /// Independent substream keyed by a label, e.g. derive(seed, "mobility").
    static Rng derive(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform01();
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller.
    double normal();

    /// Index drawn from non-negative weights (need not be normalized).
    std::size_t categorical(std::span<const double> weights);

    template <typename T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i)
        {
            std::size_t j = below(i);
            std::swap(items[i - 1], items[j]);
        }
    }

  private:
    std::mt19937_64 m_engine;
};

} // namespace dtvs
