#include "dtvs/error.hpp"
#include "dtvs/physnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

namespace dtvs
{

namespace
{

constexpr double kEps = 1e-9;

/// A group's recommended feed: videos drawn by type from the feed weights,
/// most popular unseen video of that type first. Extended on demand.
class Feed
{
  public:
    Feed(const VideoCatalog& catalog, const Preference& weights, Rng rng)
        : m_catalog(catalog),
          m_weights(weights.begin(), weights.end()),
          m_rng(rng)
    {
    }

    void ensure(std::size_t slot)
    {
        while (videos.size() <= slot)
        {
            std::size_t type = m_rng.categorical(m_weights);
            // skip types the catalog does not carry
            for (std::size_t tries = 0; m_catalog.by_type[type].empty() && tries < kVideoTypes; ++tries)
            {
                type = (type + 1) % kVideoTypes;
            }
            const auto& ids = m_catalog.by_type[type];
            videos.push_back(ids[m_cursor[type] % ids.size()]);
            ++m_cursor[type];
            delivered.push_back(0);
            versions.emplace_back();
        }
    }

    const Video& video(std::size_t slot) const
    {
        return m_catalog.videos[videos[slot]];
    }

    std::vector<VideoId> videos;
    std::vector<std::size_t> delivered;                  ///< delivered prefix length per feed slot
    std::vector<std::vector<std::uint8_t>> versions;     ///< version of each delivered segment

  private:
    const VideoCatalog& m_catalog;
    std::vector<double> m_weights;
    std::array<std::size_t, kVideoTypes> m_cursor{};
    Rng m_rng;
};

struct ViewerState
{
    std::size_t viewer = 0; ///< index into the viewer span
    std::size_t group = 0;  ///< index into the group span
    std::size_t slot = 0;   ///< feed slot being watched
    std::size_t segment = 0;
    double position_s = 0.0; ///< played time inside the current segment
    std::size_t outcome = 0; ///< sampled swipe outcome for the current video
    Rng rng;
};

struct GroupState
{
    explicit GroupState(Feed f)
        : feed(std::move(f))
    {
    }

    Feed feed;
    std::vector<std::size_t> members; ///< ViewerState indices, ascending user id
    bool in_flight = false;
    std::size_t in_slot = 0;
    std::size_t in_segment = 0;
    std::size_t in_version = 0;
    double in_remaining = 0.0;
    std::size_t last_version = 0;
    std::vector<std::size_t> delivered_by_version;
};

struct Candidate
{
    std::size_t slot;
    std::size_t segment;
};

} // namespace

PlaybackReport
simulate_window(std::span<Viewer> viewers,
                std::span<const GroupSession> groups,
                SlotAllocator& allocator,
                const PlaybackSettings& settings,
                Rng& rng,
                ResourceSchedule* schedule,
                const SlotHook& hook)
{
    if (settings.catalog == nullptr || settings.catalog->videos.empty())
    {
        throw Error(ErrorCode::OutOfRange, "playback needs a catalog");
    }
    const VideoCatalog& catalog = *settings.catalog;
    const std::size_t n_seg = catalog.n_segments();
    const std::size_t n_versions = catalog.ladder().size();
    const double seg_len = catalog.videos.front().segment_len_s;
    const std::size_t lookahead = settings.buffer_segments;
    const auto n_slots = static_cast<std::size_t>(std::llround(settings.window_s / settings.slot_s));
    const auto ticks_per_slot = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(settings.slot_s / settings.tick_s)));
    const double dt = settings.slot_s / static_cast<double>(ticks_per_slot);

    // membership checks
    std::map<UserId, std::size_t> viewer_index;
    for (std::size_t i = 0; i < viewers.size(); ++i)
    {
        if (viewers[i].watch == nullptr)
        {
            throw Error(ErrorCode::OutOfRange, "viewer without a swipe model");
        }
        viewer_index.emplace(viewers[i].id, i);
    }
    std::vector<std::size_t> group_of(viewers.size(), std::numeric_limits<std::size_t>::max());
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        if (groups[g].members.empty())
        {
            throw Error(ErrorCode::EmptyGroup, "group " + std::to_string(groups[g].id) + " has no members");
        }
        for (UserId u : groups[g].members)
        {
            auto it = viewer_index.find(u);
            if (it == viewer_index.end())
            {
                throw Error(ErrorCode::UnassignedUser, "group member " + std::to_string(u) + " is not a viewer");
            }
            if (group_of[it->second] != std::numeric_limits<std::size_t>::max())
            {
                throw Error(ErrorCode::UnassignedUser, "user " + std::to_string(u) + " is in two groups");
            }
            group_of[it->second] = g;
        }
    }
    for (std::size_t i = 0; i < viewers.size(); ++i)
    {
        if (group_of[i] == std::numeric_limits<std::size_t>::max())
        {
            throw Error(ErrorCode::UnassignedUser, "user " + std::to_string(viewers[i].id) + " has no group");
        }
    }

    const std::uint64_t base = rng.next_u64();

    std::vector<GroupState> gs;
    gs.reserve(groups.size());
    for (const auto& g : groups)
    {
        gs.emplace_back(Feed(catalog, g.feed_weights, Rng::derive(base, "feed", g.id)));
        gs.back().delivered_by_version.assign(n_versions, 0);
        gs.back().last_version = n_versions - 1;
    }

    // viewer states in user id order
    std::vector<std::size_t> order(viewers.size());
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return viewers[a].id < viewers[b].id; });

    std::vector<ViewerState> vs;
    vs.reserve(viewers.size());
    PlaybackReport report;
    report.window_s = settings.window_s;
    report.users.reserve(viewers.size());
    for (std::size_t i : order)
    {
        ViewerState s;
        s.viewer = i;
        s.group = group_of[i];
        s.rng = Rng::derive(base, "swipe", viewers[i].id);
        auto& feed = gs[s.group].feed;
        feed.ensure(0);
        s.outcome = viewers[i].watch->sample(feed.video(0).type_index, s.rng);
        gs[s.group].members.push_back(vs.size());
        vs.push_back(std::move(s));

        UserPlayback up;
        up.user = viewers[i].id;
        up.group = groups[group_of[i]].id;
        up.watched_by_version.assign(n_versions, 0);
        report.users.push_back(std::move(up));
    }
    report.groups.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        report.groups[g].group = groups[g].id;
    }
    if (schedule != nullptr)
    {
        schedule->reset(groups.size(), n_slots);
    }

    auto watch_limit = [&](std::size_t outcome) { return std::min(outcome, n_seg); };

    // earliest undelivered segment inside any member's lookahead; ties by user id
    auto next_needed = [&](GroupState& g) -> std::optional<Candidate> {
        std::optional<Candidate> best;
        std::size_t best_offset = lookahead;
        for (std::size_t m : g.members)
        {
            const auto& s = vs[m];
            std::size_t slot = s.slot;
            std::size_t seg = s.segment;
            std::size_t offset = 0;
            while (offset < best_offset)
            {
                g.feed.ensure(slot);
                const std::size_t dc = g.feed.delivered[slot];
                if (dc < n_seg)
                {
                    const std::size_t off = offset + (dc > seg ? dc - seg : 0);
                    if (off < best_offset)
                    {
                        best_offset = off;
                        best = Candidate{slot, dc};
                    }
                    break;
                }
                offset += n_seg - seg;
                ++slot;
                seg = 0;
            }
        }
        return best;
    };

    // undelivered segments inside the union of the members' lookahead windows
    auto backlog_segments = [&](GroupState& g) {
        std::map<std::size_t, std::size_t> need_end;
        for (std::size_t m : g.members)
        {
            const auto& s = vs[m];
            std::size_t slot = s.slot;
            std::size_t seg = s.segment;
            std::size_t rem = lookahead;
            while (rem > 0)
            {
                const std::size_t end = std::min(n_seg, seg + rem);
                auto& e = need_end[slot];
                e = std::max(e, end);
                rem -= end - seg;
                ++slot;
                seg = 0;
            }
        }
        std::size_t count = 0;
        for (auto [slot, end] : need_end)
        {
            g.feed.ensure(slot);
            const std::size_t dc = g.feed.delivered[slot];
            count += end > dc ? end - dc : 0;
        }
        return count;
    };

    std::vector<double> backlog(groups.size());
    std::vector<double> bw(groups.size());
    std::vector<double> cpu(groups.size());
    std::vector<double> eff_rate(groups.size());
    std::vector<double> member_rates;

    for (std::size_t slot_idx = 0; slot_idx < n_slots; ++slot_idx)
    {
        const double slot_start = static_cast<double>(slot_idx) * settings.slot_s;
        if (hook)
        {
            hook(slot_start, viewers);
        }
        for (std::size_t g = 0; g < gs.size(); ++g)
        {
            auto& grp = gs[g];
            const double version_bits = catalog.ladder()[grp.last_version] * seg_len;
            double bits = static_cast<double>(backlog_segments(grp)) * version_bits;
            if (grp.in_flight)
            {
                bits -= catalog.ladder()[grp.in_version] * seg_len - grp.in_remaining;
            }
            backlog[g] = std::max(0.0, bits);
        }
        std::fill(bw.begin(), bw.end(), 0.0);
        std::fill(cpu.begin(), cpu.end(), 0.0);
        allocator.allocate(slot_idx, backlog, bw, cpu);

        for (std::size_t g = 0; g < gs.size(); ++g)
        {
            bw[g] = std::max(0.0, bw[g]);
            cpu[g] = std::max(0.0, cpu[g]);
            member_rates.clear();
            for (std::size_t m : gs[g].members)
            {
                member_rates.push_back(
                    link_rate(settings.tx_dbm, viewers[vs[m].viewer].path_loss_db, settings.noise_dbm_hz, bw[g]));
            }
            double rate = multicast_rate(member_rates);
            if (settings.ops_per_bit > 0.0)
            {
                rate = std::min(rate, cpu[g] / settings.ops_per_bit);
            }
            eff_rate[g] = rate;
            auto& rep = report.groups[g];
            rep.bandwidth_alloc_hz_s += bw[g] * settings.slot_s;
            rep.compute_alloc_ops += cpu[g] * settings.slot_s;
            rep.link_capacity_bits += rate * settings.slot_s;
            if (schedule != nullptr)
            {
                schedule->bandwidth[g][slot_idx] = bw[g];
                schedule->compute[g][slot_idx] = cpu[g];
            }
        }

        for (std::size_t tick = 0; tick < ticks_per_slot; ++tick)
        {
            const double tick_start = slot_start + static_cast<double>(tick) * dt;

            // transmission
            for (std::size_t g = 0; g < gs.size(); ++g)
            {
                auto& grp = gs[g];
                const double capacity = eff_rate[g] * dt;
                double left = capacity;
                while (left > 0.0)
                {
                    if (!grp.in_flight)
                    {
                        auto c = next_needed(grp);
                        if (!c)
                        {
                            break;
                        }
                        std::size_t v = 0;
                        for (std::size_t i = 0; i < n_versions; ++i)
                        {
                            if (catalog.ladder()[i] <= eff_rate[g])
                            {
                                v = i;
                            }
                        }
                        grp.in_flight = true;
                        grp.in_slot = c->slot;
                        grp.in_segment = c->segment;
                        grp.in_version = v;
                        grp.last_version = v;
                        grp.in_remaining = catalog.ladder()[v] * seg_len;
                    }
                    const double sent = std::min(left, grp.in_remaining);
                    left -= sent;
                    grp.in_remaining -= sent;
                    report.groups[g].bits_sent += sent;
                    if (grp.in_remaining <= kEps * catalog.ladder()[grp.in_version])
                    {
                        grp.in_flight = false;
                        grp.feed.delivered[grp.in_slot] += 1;
                        grp.feed.versions[grp.in_slot].push_back(static_cast<std::uint8_t>(grp.in_version));
                        grp.delivered_by_version[grp.in_version] += 1;
                        report.groups[g].segments_sent += 1;
                    }
                }
                if (capacity > 0.0)
                {
                    const double busy = (capacity - left) / capacity;
                    report.groups[g].bandwidth_used_hz_s += bw[g] * dt * busy;
                }
            }

            // playback
            for (std::size_t i = 0; i < vs.size(); ++i)
            {
                auto& s = vs[i];
                auto& grp = gs[s.group];
                auto& up = report.users[i];
                double budget = dt;
                while (budget > kEps)
                {
                    if (s.segment < grp.feed.delivered[s.slot])
                    {
                        const double play = std::min(budget, seg_len - s.position_s);
                        s.position_s += play;
                        budget -= play;
                        if (s.position_s >= seg_len - kEps)
                        {
                            up.watched_by_version[grp.feed.versions[s.slot][s.segment]] += 1;
                            s.position_s = 0.0;
                            s.segment += 1;
                            if (s.segment >= watch_limit(s.outcome))
                            {
                                const Video& video = grp.feed.video(s.slot);
                                up.views.push_back(ViewEvent{settings.start_time_s + tick_start + (dt - budget),
                                                             video.type_index,
                                                             video.id,
                                                             s.segment,
                                                             s.outcome > n_seg});
                                s.slot += 1;
                                s.segment = 0;
                                grp.feed.ensure(s.slot);
                                s.outcome = viewers[s.viewer].watch->sample(grp.feed.video(s.slot).type_index, s.rng);
                            }
                        }
                    }
                    else
                    {
                        up.stall_time_s += budget;
                        budget = 0.0;
                    }
                }
            }
        }
    }

    for (std::size_t i = 0; i < vs.size(); ++i)
    {
        const auto& s = vs[i];
        auto& grp = gs[s.group];
        auto& up = report.users[i];
        up.delivered_by_version = grp.delivered_by_version;
        up.final_playhead = Playhead{s.slot, s.segment};
        const std::size_t dc = grp.feed.delivered[s.slot];
        up.final_buffered = dc > s.segment ? dc - s.segment : 0;
    }
    for (std::size_t g = 0; g < gs.size(); ++g)
    {
        report.groups[g].ops_used = report.groups[g].bits_sent * settings.ops_per_bit;
    }
    return report;
}

} // namespace dtvs
