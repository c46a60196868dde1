#include "dtshare/dtsync.hpp"

#include "dtshare/error.hpp"
#include "dtshare/text.hpp"

#include <cmath>
#include <ostream>

namespace dtshare::dtsync {

namespace {

template <typename Op>
Status combine(const Status& a, const Status& b, Op op) {
    Status out;
    for (int d = 0; d < 2; ++d) {
        out.kinetic.position[d] = op(a.kinetic.position[d], b.kinetic.position[d]);
        out.kinetic.velocity[d] = op(a.kinetic.velocity[d], b.kinetic.velocity[d]);
    }
    for (const auto& [k, v] : a.link_quality) {
        auto it = b.link_quality.find(k);
        out.link_quality[k] = op(v, it == b.link_quality.end() ? 0.0 : it->second);
    }
    for (const auto& [k, v] : b.link_quality)
        if (!a.link_quality.contains(k)) out.link_quality[k] = op(0.0, v);
    out.model_perf = op(a.model_perf, b.model_perf);
    return out;
}

bool healthy(const Channel& channel, const SyncConfig& cfg) {
    return channel.up && channel.latency <= cfg.deadline;
}

// Edge side of a cycle with no input: advance the replica on its own prediction.
void edge_open_loop(EdgeTwinRecord& edge, int node, const SyncConfig& cfg) {
    edge.G[node] = edge.G_hat_next.at(node);
    edge.G_hat_next[node] = cfg.predictor(edge.G[node], cfg.period);
}

} // namespace

Status operator-(const Status& a, const Status& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
}

Status operator+(const Status& a, const Status& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
}

bool operator==(const Status& a, const Status& b) {
    return a.kinetic.position == b.kinetic.position && a.kinetic.velocity == b.kinetic.velocity &&
           a.link_quality == b.link_quality && a.model_perf == b.model_perf;
}

double norm(const Status& s) {
    double sum = s.model_perf * s.model_perf;
    for (int d = 0; d < 2; ++d)
        sum += s.kinetic.position[d] * s.kinetic.position[d] +
               s.kinetic.velocity[d] * s.kinetic.velocity[d];
    for (const auto& [k, v] : s.link_quality) sum += v * v;
    return std::sqrt(sum);
}

std::string_view phase_name(SyncPhase phase) {
    switch (phase) {
    case SyncPhase::synced: return "synced";
    case SyncPhase::desynced: return "desynced";
    case SyncPhase::resyncing: return "resyncing";
    }
    return "unknown";
}

void EdgeTwinRecord::check_consistent() const {
    auto same_keys = [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return false;
        for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib)
            if (ia->first != ib->first) return false;
        return true;
    };
    if (!same_keys(G, F) || !same_keys(G, G_hat_next))
        throw Error("edge twin record: G, F and G_hat_next key sets differ");
}

Status last_value_hold(const Status& current, double) { return current; }

Status linear_extrapolation(const Status& current, double period) {
    Status next = current;
    for (int d = 0; d < 2; ++d)
        next.kinetic.position[d] += current.kinetic.velocity[d] * period;
    return next;
}

void device_update(DeviceTwinRecord& device, const Status& observed, const Status& predicted) {
    device.g = observed;
    if (device.sync.phase == SyncPhase::desynced)
        device.delta_g.reset();
    else
        device.delta_g = observed - predicted;
}

void register_device(EdgeTwinRecord& edge, DeviceTwinRecord& device, const SyncConfig& cfg) {
    edge.G[device.node] = device.g;
    edge.F[device.node] = device.f;
    edge.G_hat_next[device.node] = cfg.predictor(device.g, cfg.period);
    device.g_hat = edge.G_hat_next[device.node];
    device.delta_g = Status{};
    device.sync = SyncState{SyncPhase::synced, 0.0};
}

Status edge_predict(const EdgeTwinRecord& edge, int node, const SyncConfig& cfg) {
    return cfg.predictor(edge.G.at(node), cfg.period);
}

SyncOutcome sync_cycle(DeviceTwinRecord& device, EdgeTwinRecord& edge, const Channel& channel,
                       const SyncConfig& cfg, double now) {
    const int node = device.node;
    if (!edge.G.contains(node)) throw Error("sync_cycle: node not registered at the edge");
    SyncOutcome outcome;

    if (!healthy(channel, cfg)) {
        device.sync.phase = SyncPhase::desynced;
        device.delta_g.reset();
        edge_open_loop(edge, node, cfg);
        // Without edge feedback the device plans from its own state.
        device.g_hat = cfg.predictor(device.g, cfg.period);
        outcome.phase = SyncPhase::desynced;
        outcome.path = {SyncPhase::desynced};
        return outcome;
    }

    if (device.sync.phase == SyncPhase::desynced) {
        device.sync.phase = SyncPhase::resyncing;
        outcome.path.push_back(SyncPhase::resyncing);
        device.delta_g = device.g;
        edge.G[node] = *device.delta_g;
    } else {
        device_update(device, device.g, device.g_hat);
        outcome.path.push_back(SyncPhase::synced);
        edge.G[node] = edge.G_hat_next.at(node) + *device.delta_g;
    }
    outcome.uploaded = device.delta_g;
    edge.G_hat_next[node] = edge_predict(edge, node, cfg);
    device.g_hat = edge.G_hat_next[node];

    if (device.sync.phase == SyncPhase::resyncing) outcome.path.push_back(SyncPhase::synced);
    device.sync.phase = SyncPhase::synced;
    device.sync.last_success = now;
    outcome.phase = SyncPhase::synced;
    return outcome;
}

void write_trace_header(std::ostream& out) { out << "cycle,node,state,delta_norm,latency\n"; }

void write_trace_rows(std::ostream& out, std::size_t cycle, int node, const SyncOutcome& outcome,
                      const Channel& channel) {
    const std::string latency = channel.up ? format_double(channel.latency) : "down";
    for (auto phase : outcome.path) {
        out << cycle << ',' << node << ',' << phase_name(phase) << ','
            << (outcome.uploaded ? format_double(norm(*outcome.uploaded)) : "null") << ','
            << latency << '\n';
    }
}

} // namespace dtshare::dtsync
