#pragma once

#include "dtvs/domain.hpp"
#include "dtvs/rng.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace dtvs
{

struct Point
{
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct BaseStation
{
    BsId id = 0;
    Point position;
    std::size_t edge_server = 0;
};

/// Ground-truth swipe behaviour for one video type: a geometric abandonment
/// over segments 1..S (parameter p) truncated to the video, plus an atom q of
/// watching to completion.
struct SwipeParams
{
    double p = 0.3;
    double q = 0.2;
};

using Preference = std::array<double, kVideoTypes>;

struct Playhead
{
    std::size_t video_slot = 0; ///< index into the group feed
    std::size_t segment = 0;
};

struct UserState
{
    UserId id = 0;
    Point position;
    std::vector<Point> path; ///< closed waypoint loop
    std::size_t next_waypoint = 0;
    double speed_mps = 0.0;
    BsId serving_bs = 0;
    std::size_t cohort = 0;
    Preference true_preference{};
    std::array<SwipeParams, kVideoTypes> true_swipe{};
    double shadowing_db = 0.0;
    Playhead playhead;                 ///< where playback stood at the last window end
    std::size_t buffered_segments = 0; ///< delivered but unwatched at the last window end
};

/// Serving BS by distance; equidistant users go to the lower id.
BsId nearest_bs(Point p, std::span<const BaseStation> stations);

/// Moves the user speed*dt along its waypoint loop and re-attaches it to
/// the nearest BS.
UserState step_mobility(const UserState& user, double dt, std::span<const BaseStation> stations);

// ---------------------------------------------------------------------------
// Channel

/// Log-distance urban macro path loss, distance clamped to 1 m.
double path_loss(double distance_m);

/// Shannon rate of a link that uses the full transmit power over
/// `bandwidth_hz`; noise grows with the bandwidth.
double link_rate(double tx_dbm, double pl_db, double noise_dbm_hz, double bandwidth_hz);

/// Smallest bandwidth whose link_rate reaches `rate_bps` (bisection).
double bandwidth_for_rate(double rate_bps, double tx_dbm, double pl_db, double noise_dbm_hz);

/// Rate decodable by every member: the minimum of the member link rates.
double multicast_rate(std::span<const double> member_rates);

// ---------------------------------------------------------------------------
// Swipes

/// pmf over outcomes 1..S+1 stored at indices 0..S; the last entry is
/// "watched to completion".
std::vector<double> swipe_pmf(SwipeParams params, std::size_t n_segments);

/// Draws the swipe outcome in 1..S+1 (S+1 = watched to completion).
std::size_t generate_swipe(SwipeParams params, std::size_t n_segments, Rng& rng);
std::size_t generate_swipe(const UserState& user, const Video& video, Rng& rng);

/// Inverse-CDF sampler over per-type outcome pmfs.
class WatchSampler
{
  public:
    WatchSampler() = default;
    explicit WatchSampler(const std::array<std::vector<double>, kVideoTypes>& pmfs);

    static WatchSampler from_params(const std::array<SwipeParams, kVideoTypes>& params, std::size_t n_segments);

    /// Outcome in 1..S+1.
    std::size_t sample(std::size_t type, Rng& rng) const;
    std::size_t n_segments() const
    {
        return m_cdf[0].empty() ? 0 : m_cdf[0].size() - 1;
    }

  private:
    std::array<std::vector<double>, kVideoTypes> m_cdf;
};

// ---------------------------------------------------------------------------
// Playback

/// One user as the playback engine sees it.
struct Viewer
{
    UserId id = 0;
    double path_loss_db = 0.0; ///< towards the BS serving its group
    const WatchSampler* watch = nullptr;
};

/// A multicast group as the playback engine sees it.
struct GroupSession
{
    GroupId id = 0;
    BsId bs = 0;
    std::vector<UserId> members;
    Preference feed_weights{}; ///< type mix of the group's recommended feed
};

/// Per-slot allocator of the reserved resources, fed with each group's
/// backlog (undelivered bits within the members' lookahead).
class SlotAllocator
{
  public:
    virtual ~SlotAllocator() = default;
    virtual void allocate(std::size_t slot,
                          std::span<const double> backlog_bits,
                          std::span<double> bandwidth_hz,
                          std::span<double> compute_ops) = 0;
};

/// Hands every group a fixed share each slot; used by tests and by the
/// scalar checks.
class FixedAllocator : public SlotAllocator
{
  public:
    FixedAllocator(std::vector<double> bandwidth_hz, std::vector<double> compute_ops);
    void allocate(std::size_t slot,
                  std::span<const double> backlog_bits,
                  std::span<double> bandwidth_hz,
                  std::span<double> compute_ops) override;

  private:
    std::vector<double> m_bandwidth;
    std::vector<double> m_compute;
};

struct PlaybackSettings
{
    const VideoCatalog* catalog = nullptr;
    double window_s = 60.0;
    double slot_s = 1.0;
    double tick_s = 0.1;
    std::size_t buffer_segments = 5;
    double start_time_s = 0.0; ///< absolute time of the window start, for event stamps
    double tx_dbm = 27.0;
    double noise_dbm_hz = -174.0;
    double ops_per_bit = 20.0;
};

struct ViewEvent
{
    double time_s = 0.0;
    std::size_t type = 0;
    VideoId video = 0;
    std::size_t watched = 0; ///< segments watched, 1..S
    bool completed = false;

    std::size_t outcome(std::size_t n_segments) const
    {
        return completed ? n_segments + 1 : watched;
    }
};

struct UserPlayback
{
    UserId user = 0;
    GroupId group = 0;
    std::vector<std::size_t> delivered_by_version;
    std::vector<std::size_t> watched_by_version;
    double stall_time_s = 0.0;
    std::vector<ViewEvent> views; ///< finished views only; the one cut by the window end is dropped
    Playhead final_playhead;
    std::size_t final_buffered = 0;

    std::size_t delivered() const;
    std::size_t watched() const;
};

struct GroupPlayback
{
    GroupId group = 0;
    double bits_sent = 0.0;
    double ops_used = 0.0;
    double bandwidth_used_hz_s = 0.0;   ///< allocation x busy time
    double bandwidth_alloc_hz_s = 0.0;  ///< allocation x slot length
    double compute_alloc_ops = 0.0;     ///< compute allocation x slot length
    double link_capacity_bits = 0.0;    ///< deliverable bits at the allocated rates
    std::size_t segments_sent = 0;
};

struct PlaybackReport
{
    double window_s = 0.0;
    std::vector<UserPlayback> users;   ///< ordered by user id
    std::vector<GroupPlayback> groups; ///< ordered as the input groups

    const UserPlayback* find(UserId user) const;
};

/// Called at the start of every slot with the slot start time (relative to
/// the window) so the caller can move users and refresh path losses.
using SlotHook = std::function<void(double, std::span<Viewer>)>;

/// Streams one window. Each group multicasts the earliest segment any member
/// needs within its lookahead, at the rate of its worst member; playback runs
/// in real time and stalls when the current segment is missing; swipes cut the
/// current video and move to the next one in the group feed.
PlaybackReport simulate_window(std::span<Viewer> viewers,
                               std::span<const GroupSession> groups,
                               SlotAllocator& allocator,
                               const PlaybackSettings& settings,
                               Rng& rng,
                               ResourceSchedule* schedule = nullptr,
                               const SlotHook& hook = {});

} // namespace dtvs
