#pragma once

#include "heatkey/engine.hpp"
#include "heatkey/ingest.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace heatkey::service {

/// Keypresses keep the screen "on" this long after the key goes down.
inline constexpr std::int64_t kKeypressGraceMs = 2'000;

/// Per-subscriber FIFO of broadcast messages. Dropping the last reference
/// unsubscribes.
class Subscription {
public:
    /// Blocks up to `timeout` for the next message.
    std::optional<TemperatureMessage> wait_next(std::chrono::milliseconds timeout);
    std::vector<TemperatureMessage> drain();

private:
    friend class Session;
    void push(const TemperatureMessage& msg);

    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<TemperatureMessage> queue_;
};

/// Immutable picture of a session, published after every state change.
struct SessionSnapshot {
    std::optional<TemperatureMessage> current;
    EngineState engine;
    EngineParams params;
    PeriodGrid grid;
    /// Activity before this instant can no longer change any message.
    std::int64_t accepting_from_ms = 0;
};

enum class Rejection { TooLate, InFuture };

class EventRejected : public std::runtime_error {
public:
    EventRejected(Rejection why, const std::string& what)
        : std::runtime_error(what), why_(why) {}
    Rejection why() const noexcept { return why_; }

private:
    Rejection why_;
};

/**
 * Live counterpart of replay: folds events into the current sampling period
 * and advances the engine whenever the simulated clock crosses a boundary.
 *
 * All times are simulated milliseconds supplied by the caller; the session
 * owns no clock. Every public member is safe to call concurrently.
 *
 * A period is finalized once its end boundary has passed and the active
 * fragment still open at `now` (if it began earlier) is either already long
 * enough to count as deliberate use or has closed. Until then its short/long
 * classification is unknown.
 */
class Session {
public:
    Session(EngineParams params, std::int64_t origin_ms);

    /// Throws EventRejected when t is later than `now` or precedes the
    /// unfinalized window.
    void ingest_event(const RawEvent& event, std::int64_t now);

    /// Opens or extends a screen-on window [now, now + grace).
    void keypress(std::int64_t now);

    /// Finalizes every period that can be finalized at `now`, broadcasting each
    /// message. Returns the last message produced, if any.
    std::optional<TemperatureMessage> tick(std::int64_t now);

    /// Cold start: clears activity and y, broadcasts a level-0 message.
    TemperatureMessage reset(std::int64_t now);

    std::shared_ptr<const SessionSnapshot> snapshot() const;

    /// New subscribers are primed with the current message, if there is one.
    std::shared_ptr<Subscription> subscribe();

private:
    void prune(std::int64_t boundary);
    void broadcast(const TemperatureMessage& msg);
    void publish();
    std::int64_t accepting_from() const noexcept;

    mutable std::mutex mutex_;
    UsageEngine engine_;
    PeriodGrid grid_;
    std::vector<RawEvent> events_;
    std::vector<ActiveInterval> windows_;
    std::int64_t reset_floor_;
    std::int64_t latest_now_ = 0;
    std::optional<TemperatureMessage> current_;
    std::vector<std::weak_ptr<Subscription>> subscribers_;

    mutable std::mutex snapshot_mutex_;
    std::shared_ptr<const SessionSnapshot> snapshot_;
};

}  // namespace heatkey::service
