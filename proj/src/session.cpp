#include "heatkey/session.hpp"

#include <algorithm>

namespace heatkey::service {

std::optional<TemperatureMessage> Subscription::wait_next(std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mutex_);
    if (!ready_.wait_for(lock, timeout, [this] { return !queue_.empty(); })) {
        return std::nullopt;
    }
    auto msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
}

std::vector<TemperatureMessage> Subscription::drain()
{
    std::lock_guard lock(mutex_);
    std::vector<TemperatureMessage> out(std::make_move_iterator(queue_.begin()),
                                        std::make_move_iterator(queue_.end()));
    queue_.clear();
    return out;
}

void Subscription::push(const TemperatureMessage& msg)
{
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(msg);
    }
    ready_.notify_all();
}

namespace {

struct ActivityView {
    std::vector<ActiveInterval> fragments;
    /// Fragment still growing at `now`, clipped to `now`.
    std::optional<ActiveInterval> open;
};

ActivityView view_activity(const std::vector<RawEvent>& events,
                           const std::vector<ActiveInterval>& windows,
                           std::int64_t now)
{
    const auto normalized = normalize_events(events);

    std::vector<ActiveInterval> screen = screen_intervals(normalized, now);
    bool window_open = false;
    for (const auto& w : windows) {
        const auto end = std::min(w.end_ms, now);
        if (w.start_ms < end) {
            screen.push_back({w.start_ms, end});
        }
        window_open = window_open || (w.start_ms <= now && w.end_ms > now);
    }
    screen = merge_intervals(std::move(screen));
    const auto calls = call_intervals(normalized, now);

    bool screen_open = false;
    bool call_open = false;
    for (const auto& e : normalized) {
        switch (e.kind) {
        case EventKind::ScreenOn: screen_open = true; break;
        case EventKind::ScreenOff: screen_open = false; break;
        case EventKind::CallStart: call_open = true; break;
        case EventKind::CallEnd: call_open = false; break;
        }
    }

    ActivityView view{subtract_calls(screen, calls), std::nullopt};
    if ((screen_open || window_open) && !call_open && !view.fragments.empty() &&
        view.fragments.back().end_ms == now) {
        view.open = view.fragments.back();
    }
    return view;
}

}  // namespace

Session::Session(EngineParams params, std::int64_t origin_ms)
    : engine_(params), grid_{origin_ms, params.sampling_period.count()},
      reset_floor_(origin_ms),
      latest_now_(origin_ms)
{
    publish();
}

std::int64_t Session::accepting_from() const noexcept
{
    return std::max(grid_.period_start(engine_.state().next_period_index), reset_floor_);
}

void Session::ingest_event(const RawEvent& event, std::int64_t now)
{
    std::lock_guard lock(mutex_);
    latest_now_ = std::max(latest_now_, now);
    if (event.timestamp_ms > latest_now_) {
        throw EventRejected(Rejection::InFuture, "event timestamp is later than the session clock");
    }
    if (event.timestamp_ms < accepting_from()) {
        throw EventRejected(Rejection::TooLate, "event falls in an already finalized period");
    }
    if (std::find(events_.begin(), events_.end(), event) == events_.end()) {
        events_.push_back(event);
    }
}

void Session::keypress(std::int64_t now)
{
    std::lock_guard lock(mutex_);
    latest_now_ = std::max(latest_now_, now);
    now = latest_now_;
    if (!windows_.empty() && windows_.back().end_ms >= now) {
        windows_.back().end_ms = std::max(windows_.back().end_ms, now + kKeypressGraceMs);
    } else {
        windows_.push_back({now, now + kKeypressGraceMs});
    }
}

std::optional<TemperatureMessage> Session::tick(std::int64_t now)
{
    std::lock_guard lock(mutex_);
    latest_now_ = std::max(latest_now_, now);
    now = latest_now_;

    std::optional<TemperatureMessage> last;
    for (;;) {
        const auto period = engine_.state().next_period_index;
        const auto boundary = grid_.period_start(period + 1);
        if (now < boundary) {
            break;
        }
        const auto view = view_activity(events_, windows_, now);
        if (view.open && view.open->start_ms < boundary &&
            Millis{view.open->duration_ms()} < engine_.params().notification_threshold) {
            break;
        }
        const auto samples =
            assign_to_periods(view.fragments, grid_, engine_.params(), grid_.period_of(now));
        auto msg = engine_.advance(samples[period].usage_factor);
        current_ = msg;
        broadcast(msg);
        prune(boundary);
        last = std::move(msg);
    }
    if (last) {
        publish();
    }
    return last;
}

TemperatureMessage Session::reset(std::int64_t now)
{
    std::lock_guard lock(mutex_);
    latest_now_ = std::max(latest_now_, now);
    events_.clear();
    windows_.clear();
    reset_floor_ = latest_now_;
    engine_.reset();

    const auto next = engine_.state().next_period_index;
    TemperatureMessage msg{next == 0 ? 0 : next - 1, 0, engine_.palette()[0],
                           level_phrase(0, engine_.params().level_count)};
    current_ = msg;
    broadcast(msg);
    publish();
    return msg;
}

std::shared_ptr<const SessionSnapshot> Session::snapshot() const
{
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
}

std::shared_ptr<Subscription> Session::subscribe()
{
    auto sub = std::make_shared<Subscription>();
    std::lock_guard lock(mutex_);
    if (current_) {
        sub->push(*current_);
    }
    subscribers_.push_back(sub);
    return sub;
}

void Session::broadcast(const TemperatureMessage& msg)
{
    std::erase_if(subscribers_, [&msg](const std::weak_ptr<Subscription>& weak) {
        auto sub = weak.lock();
        if (!sub) {
            return true;
        }
        sub->push(msg);
        return false;
    });
}

void Session::publish()
{
    auto snap = std::make_shared<const SessionSnapshot>(SessionSnapshot{
        current_, engine_.state(), engine_.params(), grid_, accepting_from()});
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snap);
}

// Drops history that can no longer influence an unfinalized period: everything
// up to the latest instant c <= boundary at which the screen is off, no call is
// in progress and no keypress window is open.
void Session::prune(std::int64_t boundary)
{
    const auto normalized = normalize_events(events_);

    std::vector<std::int64_t> candidates;
    for (const auto& e : normalized) {
        if (e.timestamp_ms <= boundary) {
            candidates.push_back(e.timestamp_ms);
        }
    }
    for (const auto& w : windows_) {
        if (w.end_ms <= boundary) {
            candidates.push_back(w.end_ms);
        }
    }
    std::sort(candidates.begin(), candidates.end(), std::greater<>{});
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    for (const auto cut : candidates) {
        bool screen_on = false;
        bool in_call = false;
        for (const auto& e : normalized) {
            if (e.timestamp_ms > cut) {
                break;
            }
            screen_on = e.kind == EventKind::ScreenOn ||
                        (screen_on && e.kind != EventKind::ScreenOff);
            in_call = e.kind == EventKind::CallStart || (in_call && e.kind != EventKind::CallEnd);
        }
        const bool covered = std::any_of(windows_.begin(), windows_.end(), [cut](const auto& w) {
            return w.start_ms <= cut && cut < w.end_ms;
        });
        if (screen_on || in_call || covered) {
            continue;
        }
        std::erase_if(events_, [cut](const RawEvent& e) { return e.timestamp_ms <= cut; });
        std::erase_if(windows_, [cut](const ActiveInterval& w) { return w.end_ms <= cut; });
        return;
    }
}

}  // namespace heatkey::service
