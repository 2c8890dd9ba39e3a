#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/physnet.hpp"
#include "dtvs/rng.hpp"
#include "dtvs/udt.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

namespace dtvs
{

// ---------------------------------------------------------------------------
// Clustering input

/// Clustering coordinates of one user, every component in [0, 1]:
/// position (2), preference (8), expected swipe point per type (8), channel (1).
struct UserFeature
{
    UserId user = 0;
    BsId bs = 0; ///< nearest BS of the estimated position
    std::vector<double> values;
};

inline constexpr std::size_t kFeatureDims = 2 + kVideoTypes + kVideoTypes + 1;

struct FeatureScales
{
    double area_m = 1000.0;
    double tx_dbm = 27.0;
    double noise_dbm_hz = -174.0;
    double reference_bandwidth_hz = 1e6;
};

UserFeature make_feature(const UdtAbstraction& twin, std::span<const BaseStation> stations, const FeatureScales& scales);

// ---------------------------------------------------------------------------
// Grouping

/// Partition of users 0..N-1 into multicast groups, each served by one BS.
struct Grouping
{
    std::vector<GroupId> assignment; ///< user -> group
    std::vector<BsId> group_bs;      ///< group -> serving BS
    std::vector<std::size_t> group_label; ///< group -> clusterer label (RL slot, DBSCAN label, top type)

    std::size_t n_groups() const
    {
        return group_bs.size();
    }
    std::vector<std::vector<UserId>> members() const;
};

/// Throws unless every user is in exactly one non-empty group and each group's
/// members share the group BS.
void validate_grouping(const Grouping& grouping, std::span<const UserFeature> features);

/// Builds a grouping from arbitrary (bs, label) keys per user; groups are
/// numbered in ascending key order.
Grouping grouping_from_keys(std::span<const std::pair<BsId, std::size_t>> keys);

// ---------------------------------------------------------------------------
// Clusterers

struct RlParams
{
    std::size_t g_max = 4;
    std::size_t episodes = 8;
    double learning_rate = 0.5;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    std::size_t bucket_bins = 3;
};

/// Tabular action values over (feature bucket, group slot).
class QTable
{
  public:
    double value(std::uint64_t bucket, std::size_t action) const;
    std::size_t visits(std::uint64_t bucket, std::size_t action) const;
    void update(std::uint64_t bucket, std::size_t action, double reward, double learning_rate);

    /// Highest-valued action in [0, n_actions); ties go to the lowest index.
    std::size_t greedy(std::uint64_t bucket, std::size_t n_actions) const;
    std::size_t size() const
    {
        return m_entries.size();
    }

  private:
    struct Entry
    {
        double value = 0.0;
        std::size_t visits = 0;
    };
    std::map<std::pair<std::uint64_t, std::size_t>, Entry> m_entries;
};

std::uint64_t feature_bucket(const UserFeature& feature, std::size_t bins);

/// Utility of a candidate grouping, e.g. the infrastructure twin's emulation.
using UtilityFn = std::function<double(const Grouping&)>;

/// Contextual-bandit Q-learning: users are visited in shuffled order and
/// moved to group slot g of their nearest BS, rewarded by the utility change.
/// The returned grouping is the greedy (epsilon = 0) assignment.
Grouping cluster_rl(std::span<const UserFeature> features,
                    const RlParams& params,
                    QTable& table,
                    const UtilityFn& utility,
                    Rng& rng);

/// Greedy assignment from a fixed table; deterministic.
Grouping greedy_grouping(std::span<const UserFeature> features, const RlParams& params, const QTable& table);

/// Textbook DBSCAN labels: -1 for noise, clusters numbered in discovery order.
std::vector<int> dbscan_labels(std::span<const std::vector<double>> points, double eps, std::size_t min_pts);

/// DBSCAN over the feature vectors; noise becomes singleton groups and each
/// cluster is split by BS.
Grouping cluster_dbscan(std::span<const UserFeature> features, double eps, std::size_t min_pts);

/// One group per non-empty (nearest BS, top preference type) key.
Grouping cluster_heuristic(std::span<const UserFeature> features);

// ---------------------------------------------------------------------------
// Reservation

struct SliceReservation
{
    std::vector<double> bandwidth_hz;
    std::vector<double> compute_ops;
};

struct SliceDemand
{
    double bandwidth_hz = 0.0; ///< d_g on the bandwidth side
    double compute_ops = 0.0;  ///< d_g on the computing side
    double weight = 1.0;       ///< n_g
};

/// sum_g n_g log(1 + b_g / d_g)
double reservation_objective(std::span<const double> allocation,
                             std::span<const double> demand,
                             std::span<const double> weight);

/// KKT water-filling of one resource with per-group caps; exact to a
/// relative 1e-12 of the budget and never above it.
std::vector<double> water_fill(std::span<const double> demand,
                               std::span<const double> weight,
                               std::span<const double> cap,
                               double budget);

/// Best-first branch and bound over multiples of `step`; the bound of a node
/// is the continuous optimum of the groups not yet fixed.
std::vector<double> branch_and_bound(std::span<const double> demand,
                                     std::span<const double> weight,
                                     std::span<const double> cap,
                                     double budget,
                                     double step);

SliceReservation reserve_convex(std::span<const SliceDemand> demands,
                                double total_bandwidth_hz,
                                double total_compute_ops,
                                double headroom = 2.0);

SliceReservation reserve_bnb(std::span<const SliceDemand> demands,
                             double total_bandwidth_hz,
                             double total_compute_ops,
                             double headroom,
                             double bandwidth_step,
                             double compute_step);

/// Split proportional to each group's mean past traffic; groups without
/// history get the mean of the others, and no history at all splits evenly.
SliceReservation reserve_historical(std::span<const std::vector<double>> bits_history,
                                    std::span<const std::vector<double>> ops_history,
                                    double total_bandwidth_hz,
                                    double total_compute_ops);

} // namespace dtvs
