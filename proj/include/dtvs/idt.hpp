#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/physnet.hpp"
#include "dtvs/sdt.hpp"
#include "dtvs/udt.hpp"

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace dtvs
{

struct DemandParams
{
    double reference_bandwidth_hz = 1e6; ///< bandwidth at which member rates are estimated
    double tx_dbm = 27.0;
    double noise_dbm_hz = -174.0;
    double ops_per_bit = 20.0;
    double max_bandwidth_hz = 20e6; ///< bandwidth demand is clamped to this
    std::size_t recommend_k = 10;   ///< 0 skips the recommended list
};

struct GroupDemand
{
    GroupId group = 0;
    double expected_bandwidth_bps = 0.0;
    double expected_compute_ops = 0.0;
    double bandwidth_demand_hz = 0.0; ///< spectrum that carries expected_bandwidth_bps to the worst member
    std::size_t n_members = 0;
    std::array<double, kVideoTypes> expected_watch_fraction{};
    Preference feed_weights{}; ///< mean member preference
    std::size_t version = 0;
    double worst_path_loss_db = 0.0;
    std::vector<VideoId> recommended;

    SliceDemand slice_demand() const
    {
        return {bandwidth_demand_hz, expected_compute_ops, static_cast<double>(n_members)};
    }
};

/// Expected per-group demand from the members' twin abstractions: watch
/// fraction per type from the swipe pmfs, a version the worst member can
/// sustain, and the top-k videos by mean member preference.
GroupDemand aggregate_group_demand(GroupId group,
                                   std::span<const UdtAbstraction> twins,
                                   std::span<const UserId> members,
                                   const VideoCatalog& catalog,
                                   const DemandParams& params);

/// Fractions of a lendable pool for each backlogged group, proportional to
/// backlog; zero for idle groups and all zero when nothing is backlogged.
std::vector<double> backlog_shares(std::span<const double> backlog);

/// Small-timescale policy: every backlogged group uses its own reservation;
/// idle groups' reservations form a pool split among backlogged groups by
/// backlog. A borrower repays its loan out of its own reservation in the
/// following slots and cannot borrow again until it has.
class BacklogAllocator : public SlotAllocator
{
  public:
    explicit BacklogAllocator(SliceReservation reservation);

    void allocate(std::size_t slot,
                  std::span<const double> backlog_bits,
                  std::span<double> bandwidth_hz,
                  std::span<double> compute_ops) override;

    const SliceReservation& reservation() const
    {
        return m_reservation;
    }

  private:
    SliceReservation m_reservation;
    std::vector<double> m_bw_debt;
    std::vector<double> m_cpu_debt;
};

/// Builds the slot allocator for a window; every reserved group needs a demand.
BacklogAllocator allocate_small_timescale(const SliceReservation& reservation, std::span<const GroupDemand> demands);

struct EmulationSettings
{
    const VideoCatalog* catalog = nullptr;
    double total_bandwidth_hz = 20e6;
    double total_compute_ops = 2e9;
    double horizon_s = 60.0;
    double slot_s = 1.0;
    double tick_s = 1.0;
    std::size_t buffer_segments = 5;
    double tx_dbm = 27.0;
    double noise_dbm_hz = -174.0;
    double ops_per_bit = 20.0;
    double headroom = 2.0;
    double stall_penalty = 0.5;
    double consumption_weight = 0.25;
    std::uint64_t seed = 7;
};

/// Twin-side network emulation: reserves with the convex solver on the
/// aggregated demands, streams one shortened window against the twins'
/// channel and swipe estimates, and scores the system utility Q.
/// Pure: same grouping and twins give the same utility.
class TwinEmulator
{
  public:
    TwinEmulator(std::vector<UdtAbstraction> twins, EmulationSettings settings);

    double utility(const Grouping& grouping) const;

    std::span<const UdtAbstraction> twins() const
    {
        return m_twins;
    }

  private:
    std::vector<UdtAbstraction> m_twins;
    std::vector<WatchSampler> m_samplers;
    EmulationSettings m_settings;
};

double emulate_utility(const Grouping& grouping,
                       std::span<const UdtAbstraction> twins,
                       const EmulationSettings& settings);

} // namespace dtvs
