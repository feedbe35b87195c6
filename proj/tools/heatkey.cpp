// heatkey: replay usage logs, generate synthetic scenarios, serve live feedback.

#include "heatkey/engine.hpp"
#include "heatkey/ingest.hpp"
#include "heatkey/replay.hpp"
#include "heatkey/server.hpp"

#include <cmath>
#include <csignal>
#include <pthread.h>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

namespace {

constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;

struct ParamFlags {
    double period_s = 1800.0;
    double notif_s = 300.0;
    double threshold_s = 30.0;
    double alpha = 0.2;
    double strictness = 1.0;
    int levels = 5;

    void attach(CLI::App& app)
    {
        app.add_option("--period-s", period_s, "Sampling period in seconds")->capture_default_str();
        app.add_option("--notif-s", notif_s, "Notification correction time in seconds")
            ->capture_default_str();
        app.add_option("--threshold-s", threshold_s,
                       "Active intervals shorter than this count as notification glances")
            ->capture_default_str();
        app.add_option("--alpha", alpha, "Forgetting coefficient, 0 < alpha < 1")
            ->capture_default_str();
        app.add_option("--strictness", strictness, "Quantizer strictness exponent s > 0")
            ->capture_default_str();
        app.add_option("--levels", levels, "Number of temperature levels (2..8)")
            ->capture_default_str();
    }

    heatkey::EngineParams build() const
    {
        const auto ms = [](double seconds) {
            if (!std::isfinite(seconds)) {
                throw std::invalid_argument("durations must be finite");
            }
            return heatkey::Millis{std::llround(seconds * 1000.0)};
        };
        heatkey::EngineParams p;
        p.sampling_period = ms(period_s);
        p.notification_correction = ms(notif_s);
        p.notification_threshold = ms(threshold_s);
        p.alpha = alpha;
        p.strictness = strictness;
        p.level_count = levels;
        for (const auto& warning : heatkey::validate(p)) {
            std::cerr << "warning: " << warning << '\n';
        }
        return p;
    }
};

std::string read_source(const std::string& path)
{
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), {}};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error(path + ": cannot open");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Smartphone-usage temperature engine: replay, scenario generation, live service"};
    app.require_subcommand(1);

    ParamFlags replay_params;
    std::string log_path;
    std::optional<std::int64_t> replay_origin;
    std::string format = "csv";
    auto* replay = app.add_subcommand("replay", "Replay an event log into a temperature timeline");
    replay->add_option("--log", log_path, "Event log path ('-' for stdin)")->required();
    replay_params.attach(*replay);
    replay->add_option("--origin-ms", replay_origin,
                       "Left edge of period 0 (default: log directive or first event, aligned)");
    replay->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "jsonl"}))
        ->capture_default_str();

    std::string scenario_name;
    std::uint64_t seed = 0;
    std::uint64_t periods = 16;
    double gen_period_s = 1800.0;
    std::int64_t gen_origin = 0;
    auto* gen = app.add_subcommand(
        "gen",
        "Generate a synthetic event log.\n"
        "  typical-day         quiet first quarter, bursts of 5-25 min every 10-40 min with\n"
        "                      occasional calls and glances, sparse glances in the last quarter\n"
        "  uninterrupted       screen on for the whole horizon\n"
        "  idle                no events\n"
        "  notification-storm  3-15 s glances, about 6 per period, Poisson arrivals");
    gen->add_option("--scenario", scenario_name, "Scenario name")->required();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--periods", periods, "Horizon in sampling periods")->capture_default_str();
    gen->add_option("--period-s", gen_period_s, "Sampling period in seconds")->capture_default_str();
    gen->add_option("--origin-ms", gen_origin, "Start of the log")->capture_default_str();

    ParamFlags serve_params;
    double time_scale = 60.0;
    std::string listen = "127.0.0.1:8787";
    std::optional<std::int64_t> serve_origin;
    auto* serve = app.add_subcommand("serve", "Run the live feedback service");
    serve_params.attach(*serve);
    serve->add_option("--time-scale", time_scale, "Simulated seconds per wall second")
        ->capture_default_str();
    serve->add_option("--listen", listen, "host:port")->capture_default_str();
    serve->add_option("--origin-ms", serve_origin,
                      "Simulated start time (default: now, aligned to the period)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (replay->parsed()) {
        heatkey::EngineParams params;
        try {
            params = replay_params.build();
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        try {
            const auto log = heatkey::parse_event_log(read_source(log_path));
            const auto grid = heatkey::grid_for(log, params, replay_origin);
            const auto records = heatkey::run_replay(log, params, grid);
            std::cout << heatkey::format_timeline(records, format == "jsonl"
                                                               ? heatkey::OutputFormat::Jsonl
                                                               : heatkey::OutputFormat::Csv);
        } catch (const heatkey::ParseError& e) {
            std::cerr << log_path << ':' << e.line() << ": " << e.what() << '\n';
            return kExitInput;
        } catch (const std::exception& e) {
            std::cerr << log_path << ": " << e.what() << '\n';
            return kExitInput;
        }
        return 0;
    }

    if (gen->parsed()) {
        try {
            const auto period_ms = std::llround(gen_period_s * 1000.0);
            if (period_ms <= 0) {
                throw std::invalid_argument("period must be positive");
            }
            std::cout << heatkey::gen_scenario(scenario_name, seed, periods, period_ms, gen_origin);
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitUsage;
        }
        return 0;
    }

    heatkey::service::ServiceConfig config;
    try {
        config.params = serve_params.build();
        const auto colon = listen.rfind(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("--listen expects host:port");
        }
        config.host = listen.substr(0, colon);
        config.port = std::stoi(listen.substr(colon + 1));
        config.time_scale = time_scale;
        const auto wall_now = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::system_clock::now().time_since_epoch())
                                  .count();
        config.origin_ms = serve_origin.value_or(
            heatkey::aligned_origin(wall_now, config.params.sampling_period.count()));

        // Block before any thread exists so only sigwait below sees them.
        sigset_t signals;
        sigemptyset(&signals);
        sigaddset(&signals, SIGINT);
        sigaddset(&signals, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &signals, nullptr);

        heatkey::service::FeedbackServer server(config);
        const int port = server.start();
        std::cerr << "listening on http://" << config.host << ':' << port << " (time scale "
                  << time_scale << ")\n";
        int received = 0;
        sigwait(&signals, &received);
        server.stop();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
