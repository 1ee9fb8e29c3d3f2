#pragma once

#include "tsbench/series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tsbench::queue {

/// Markovian queue: Poisson arrivals, exponential service, `servers` parallel servers.
struct QueueSpec {
    double arrival_rate = 4.0;
    double service_rate = 2.0;  // per busy server
    int servers = 1;

    void validate() const;
    std::string name() const;  // "MM1", "MM2", ...

    static QueueSpec mm1() { return {4.0, 2.0, 1}; }
    static QueueSpec mm2() { return {4.0, 2.0, 2}; }
};

struct QueueTrace {
    /// Number in system at t = 1..n.
    std::vector<long> samples;
    /// Number in system right after each event, starting with the initial 0.
    std::vector<long> event_log;
};

/// Event-driven simulation from an empty system, sampling at integer times.
QueueTrace simulate_trace(const QueueSpec& spec, Eigen::Index n, std::uint64_t seed, bool keep_event_log = false);

TimeSeries simulate_queue(const QueueSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Time-averaged number in system over [0, horizon] (stable-queue diagnostics).
double time_average_in_system(const QueueSpec& spec, double horizon, std::uint64_t seed);

}  // namespace tsbench::queue
