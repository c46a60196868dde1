#pragma once

// Device/edge digital-twin records and the synchronization state machine.
//
// The device uploads its running deviation (observed status minus the
// edge's prediction) each cycle; the edge rebuilds the status and emits the
// next prediction. A cycle whose latency exceeds the sync deadline, or a
// dead link, desynchronizes the pair: the device sends a null deviation and
// the edge keeps simulating open-loop. The first healthy cycle afterwards
// uploads the full status (Resyncing) and, once applied, returns to Synced.

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dtshare::dtsync {

struct Kinetic {
    std::array<double, 2> position{};
    std::array<double, 2> velocity{};
};

// g = (kinetic, network, model performance)
struct Status {
    Kinetic kinetic;
    std::map<int, double> link_quality;  // neighbor -> quality
    double model_perf = 0.0;             // accuracy of the deployed tier, [0, 1]
};

// Componentwise; link maps take the key union with missing entries as 0.
Status operator-(const Status& a, const Status& b);
Status operator+(const Status& a, const Status& b);
bool operator==(const Status& a, const Status& b);
double norm(const Status& s);

// f = (kinetic actions, network modifications, viable model tiers). Stored as
// opaque labels; the library never interprets them.
struct Capabilities {
    std::set<std::string> kinetic;
    std::set<std::string> net;
    std::set<std::string> models;
    friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

enum class SyncPhase { synced, desynced, resyncing };
std::string_view phase_name(SyncPhase phase);

struct SyncState {
    SyncPhase phase = SyncPhase::synced;
    double last_success = 0.0;
};

struct DeviceTwinRecord {
    int node = 0;
    Status g;
    Capabilities f;
    std::optional<Status> delta_g;  // nullopt is the null deviation
    Status g_hat;                   // prediction currently in force
    SyncState sync;
};

struct EdgeTwinRecord {
    std::map<int, Status> G;
    std::map<int, Capabilities> F;
    std::map<int, Status> G_hat_next;

    // Throws Error if the three maps do not share one key set.
    void check_consistent() const;
};

// Status prediction for the next cycle given the current status.
using Predictor = std::function<Status(const Status& current, double period)>;

Status last_value_hold(const Status& current, double period);
// Advances position by velocity * period; everything else held.
Status linear_extrapolation(const Status& current, double period);

struct SyncConfig {
    double deadline = 0.1;  // t_dt, seconds
    double period = 0.1;    // cycle period, seconds
    Predictor predictor = last_value_hold;
};

struct Channel {
    double latency = 0.0;
    bool up = true;
};

struct SyncOutcome {
    SyncPhase phase = SyncPhase::synced;
    std::vector<SyncPhase> path;     // phases visited during the cycle, in order
    std::optional<Status> uploaded;  // deviation received by the edge
};

// Records the newly observed status. Delta g is observed - predicted, or
// null while desynced.
void device_update(DeviceTwinRecord& device, const Status& observed, const Status& predicted);

// Initial full upload: the edge starts with G = g and its prediction.
void register_device(EdgeTwinRecord& edge, DeviceTwinRecord& device, const SyncConfig& cfg);

Status edge_predict(const EdgeTwinRecord& edge, int node, const SyncConfig& cfg);

// One synchronization cycle for `device` (whose g must already hold the
// current observation).
SyncOutcome sync_cycle(DeviceTwinRecord& device, EdgeTwinRecord& edge, const Channel& channel,
                       const SyncConfig& cfg, double now);

// Sync trace CSV: cycle,node,state,delta_norm,latency. One row per visited phase.
void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, std::size_t cycle, int node, const SyncOutcome& outcome,
                      const Channel& channel);

} // namespace dtshare::dtsync
