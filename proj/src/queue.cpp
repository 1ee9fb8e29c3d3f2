#include "tsbench/queue.hpp"

#include "tsbench/random.hpp"

#include <algorithm>
#include <stdexcept>

namespace tsbench::queue {

void QueueSpec::validate() const {
    if (!(arrival_rate >= 0.0) || !(service_rate > 0.0)) {
        throw std::invalid_argument("QueueSpec: rates must be positive");
    }
    if (servers < 1) {
        throw std::invalid_argument("QueueSpec: servers must be >= 1");
    }
}

std::string QueueSpec::name() const { return "MM" + std::to_string(servers); }

namespace {

// Advances a birth-death chain, invoking on_event(time, state) after each jump.
template <typename OnEvent>
void run_events(const QueueSpec& spec, double horizon, std::uint64_t seed, OnEvent&& on_event) {
    Rng rng(derive_seed(seed, "queue-events", 0));
    long in_system = 0;
    double now = 0.0;
    for (;;) {
        const double arrival = spec.arrival_rate;
        const double service = spec.service_rate * static_cast<double>(std::min<long>(in_system, spec.servers));
        const double total = arrival + service;
        if (total <= 0.0) {
            return;
        }
        now += rng.exponential(total);
        if (now > horizon) {
            return;
        }
        if (rng.uniform() * total < arrival) {
            ++in_system;
        } else {
            --in_system;
        }
        on_event(now, in_system);
    }
}

}  // namespace

QueueTrace simulate_trace(const QueueSpec& spec, Eigen::Index n, std::uint64_t seed, bool keep_event_log) {
    spec.validate();
    if (n < 1) {
        throw std::invalid_argument("simulate_queue: n must be >= 1");
    }
    QueueTrace trace;
    trace.samples.reserve(static_cast<std::size_t>(n));
    if (keep_event_log) {
        trace.event_log.push_back(0);
    }
    long current = 0;
    long next_sample = 1;
    run_events(spec, static_cast<double>(n), seed, [&](double time, long state) {
        while (next_sample <= n && static_cast<double>(next_sample) < time) {
            trace.samples.push_back(current);
            ++next_sample;
        }
        current = state;
        if (keep_event_log) {
            trace.event_log.push_back(state);
        }
    });
    while (next_sample <= n) {
        trace.samples.push_back(current);
        ++next_sample;
    }
    return trace;
}

TimeSeries simulate_queue(const QueueSpec& spec, Eigen::Index n, std::uint64_t seed) {
    const QueueTrace trace = simulate_trace(spec, n, seed);
    Eigen::VectorXd values(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        values[t] = static_cast<double>(trace.samples[static_cast<std::size_t>(t)]);
    }
    return {std::move(values), spec.name() + "|n=" + std::to_string(n) + "|seed=" + std::to_string(seed)};
}

double time_average_in_system(const QueueSpec& spec, double horizon, std::uint64_t seed) {
    spec.validate();
    double area = 0.0;
    double last_time = 0.0;
    long last_state = 0;
    run_events(spec, horizon, seed, [&](double time, long state) {
        area += static_cast<double>(last_state) * (time - last_time);
        last_time = time;
        last_state = state;
    });
    area += static_cast<double>(last_state) * (horizon - last_time);
    return area / horizon;
}

}  // namespace tsbench::queue
