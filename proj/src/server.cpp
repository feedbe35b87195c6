#include "heatkey/server.hpp"

#include "heatkey/codec.hpp"

#include <cmath>
#include <condition_variable>
#include <stdexcept>

#include <httplib.h>

namespace heatkey::service {

using nlohmann::json;

namespace {

constexpr std::chrono::milliseconds kStreamPoll{250};
constexpr int kStreamKeepaliveEvery = 8;
constexpr std::size_t kHttpWorkers = 64;

void send_json(httplib::Response& res, const json& body, int status = 200)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message)
{
    send_json(res, json{{"error", message}}, status);
}

}  // namespace

WallSource steady_wall_source()
{
    return [] { return std::chrono::steady_clock::now().time_since_epoch(); };
}

ScaledClock::ScaledClock(double time_scale, std::int64_t sim_start_ms, WallSource wall)
    : time_scale_(time_scale), sim_start_ms_(sim_start_ms), wall_(std::move(wall))
{
    if (!(time_scale_ > 0.0) || !std::isfinite(time_scale_)) {
        throw std::invalid_argument("time scale must be positive");
    }
    wall_start_ = wall_();
}

std::int64_t ScaledClock::now_ms() const
{
    const auto elapsed = std::chrono::duration<double, std::milli>(wall_() - wall_start_);
    return sim_start_ms_ + static_cast<std::int64_t>(std::floor(elapsed.count() * time_scale_));
}

json params_json(const EngineParams& p)
{
    return {
        {"sampling_period_ms", p.sampling_period.count()},
        {"notification_correction_ms", p.notification_correction.count()},
        {"notification_threshold_ms", p.notification_threshold.count()},
        {"alpha", p.alpha},
        {"strictness", p.strictness},
        {"level_count", p.level_count},
    };
}

json message_json(const TemperatureMessage& msg)
{
    return {
        {"period_index", msg.period_index},
        {"level", msg.level},
        {"color", to_hex(msg.color)},
        {"rgb", {msg.color.r, msg.color.g, msg.color.b}},
        {"phrase", msg.phrase},
        {"payload_hex", codec::to_hex(codec::encode(msg))},
    };
}

json snapshot_json(const SessionSnapshot& snap, std::int64_t now_ms)
{
    return {
        {"sim_now_ms", now_ms},
        {"origin_ms", snap.grid.origin_ms},
        {"period_index", snap.engine.next_period_index},
        {"overall_usage", snap.engine.overall_usage},
        {"accepting_from_ms", snap.accepting_from_ms},
        {"current", snap.current ? message_json(*snap.current) : json(nullptr)},
        {"params", params_json(snap.params)},
    };
}

struct FeedbackServer::Http {
    httplib::Server server;
    std::mutex mutex;
    std::condition_variable stopped;
};

FeedbackServer::FeedbackServer(ServiceConfig config, WallSource wall)
    : config_(std::move(config)),
      clock_(config_.time_scale, config_.origin_ms, std::move(wall)),
      session_(config_.params, config_.origin_ms),
      http_(std::make_unique<Http>())
{
    auto& svr = http_->server;
    svr.new_task_queue = [] { return new httplib::ThreadPool(kHttpWorkers); };
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
    });

    svr.Post("/events", [this](const httplib::Request& req, httplib::Response& res) {
        const auto now = clock_.now_ms();
        RawEvent event;
        try {
            const json body = json::parse(req.body);
            if (body.is_object() && !body.contains("t") && body.contains("kind")) {
                json stamped = body;
                stamped["t"] = now;
                event = parse_event_json(stamped.dump());
            } else {
                event = parse_event_json(req.body);
            }
        } catch (const std::exception& e) {
            return send_error(res, 400, e.what());
        }
        try {
            session_.ingest_event(event, now);
        } catch (const EventRejected& e) {
            return send_error(res, e.why() == Rejection::TooLate ? 409 : 422, e.what());
        }
        send_json(res, {{"accepted", true}, {"t", event.timestamp_ms}});
    });

    svr.Post("/keypress", [this](const httplib::Request&, httplib::Response& res) {
        const auto now = clock_.now_ms();
        session_.keypress(now);
        send_json(res, {{"accepted", true}, {"t", now}});
    });

    svr.Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, message_json(session_.reset(clock_.now_ms())));
    });

    svr.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, snapshot_json(*session_.snapshot(), clock_.now_ms()));
    });

    svr.Get("/config", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, {
                           {"params", params_json(config_.params)},
                           {"time_scale", config_.time_scale},
                           {"origin_ms", config_.origin_ms},
                           {"keypress_grace_ms", kKeypressGraceMs},
                       });
    });

    svr.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
        auto sub = session_.subscribe();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, sub, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
                if (stopping_) {
                    sink.done();
                    return false;
                }
                std::string chunk;
                if (auto msg = sub->wait_next(kStreamPoll)) {
                    chunk = "data: " + message_json(*msg).dump() + "\n\n";
                    idle = 0;
                } else if (++idle >= kStreamKeepaliveEvery) {
                    chunk = ": keepalive\n\n";
                    idle = 0;
                }
                return chunk.empty() || sink.write(chunk.data(), chunk.size());
            });
    });
}

FeedbackServer::~FeedbackServer()
{
    stop();
}

int FeedbackServer::start()
{
    auto& svr = http_->server;
    int port = config_.port;
    if (port == 0) {
        port = svr.bind_to_any_port(config_.host);
    } else if (!svr.bind_to_port(config_.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw std::runtime_error("cannot bind " + config_.host + ":" +
                                 std::to_string(config_.port));
    }
    listener_ = std::thread([&svr] { svr.listen_after_bind(); });
    ticker_ = std::jthread([this](std::stop_token stop) { tick_loop(stop); });
    svr.wait_until_ready();
    return port;
}

void FeedbackServer::stop()
{
    if (stopping_.exchange(true)) {
        return;
    }
    if (ticker_.joinable()) {
        ticker_.request_stop();
        ticker_.join();
    }
    http_->server.stop();
    if (listener_.joinable()) {
        listener_.join();
    }
    {
        std::lock_guard lock(http_->mutex);
    }
    http_->stopped.notify_all();
}

void FeedbackServer::wait()
{
    std::unique_lock lock(http_->mutex);
    http_->stopped.wait(lock, [this] { return stopping_.load(); });
}

void FeedbackServer::tick_loop(std::stop_token stop)
{
    std::mutex m;
    std::condition_variable_any cv;
    std::unique_lock lock(m);
    while (!stop.stop_requested()) {
        session_.tick(clock_.now_ms());
        cv.wait_for(lock, stop, config_.tick_interval, [] { return false; });
    }
}

}  // namespace heatkey::service
