#pragma once

#include "heatkey/engine.hpp"
#include "heatkey/session.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

namespace heatkey::service {

struct ServiceConfig {
    EngineParams params;
    /// Simulated seconds per wall second.
    double time_scale = 60.0;
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8787;
    /// Grid origin and simulated start time.
    std::int64_t origin_ms = 0;
    std::chrono::milliseconds tick_interval{50};
};

/// Monotonic wall-time source; injectable so tests can step time by hand.
using WallSource = std::function<std::chrono::nanoseconds()>;

WallSource steady_wall_source();

/// Simulated time = start + elapsed wall time * scale.
class ScaledClock {
public:
    ScaledClock(double time_scale, std::int64_t sim_start_ms, WallSource wall);

    std::int64_t now_ms() const;
    double time_scale() const noexcept { return time_scale_; }

private:
    double time_scale_;
    std::int64_t sim_start_ms_;
    WallSource wall_;
    std::chrono::nanoseconds wall_start_;
};

nlohmann::json params_json(const EngineParams& params);
/// Message fields plus "payload_hex", the 12-byte wire encoding.
nlohmann::json message_json(const TemperatureMessage& msg);
nlohmann::json snapshot_json(const SessionSnapshot& snap, std::int64_t now_ms);

/**
 * HTTP front end for a Session:
 *
 *   POST /events    {"t": <ms>, "kind": "..."}; "t" defaults to simulated now
 *   POST /keypress  screen activity at simulated now
 *   POST /reset     cold start
 *   GET  /state     snapshot
 *   GET  /stream    server-sent events, one message per event
 *   GET  /config    parameters, time scale, origin
 *
 * A background thread ticks the session from the scaled clock.
 */
class FeedbackServer {
public:
    explicit FeedbackServer(ServiceConfig config, WallSource wall = steady_wall_source());
    ~FeedbackServer();

    FeedbackServer(const FeedbackServer&) = delete;
    FeedbackServer& operator=(const FeedbackServer&) = delete;

    /// Binds and starts serving in the background. Returns the bound port.
    /// Throws std::runtime_error when the address cannot be bound.
    int start();
    void stop();
    /// Blocks until stop() is called from elsewhere.
    void wait();

    Session& session() noexcept { return session_; }
    const ScaledClock& clock() const noexcept { return clock_; }
    const ServiceConfig& config() const noexcept { return config_; }

private:
    struct Http;

    void tick_loop(std::stop_token stop);

    ServiceConfig config_;
    ScaledClock clock_;
    Session session_;
    std::unique_ptr<Http> http_;
    std::atomic<bool> stopping_{false};
    std::thread listener_;
    std::jthread ticker_;
};

}  // namespace heatkey::service
