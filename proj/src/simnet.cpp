#include "tsync/simnet.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <utility>

#include "tsync/estimation.hpp"
#include "tsync/nodes.hpp"
#include "tsync/precision.hpp"
#include "tsync/wire.hpp"

namespace tsync {

namespace {

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return std::mt19937_64(seq);
}

}  // namespace

void DelayDist::validate(const std::string& name) const {
    switch (kind) {
        case Kind::Constant:
            if (!finite_nonneg(a)) throw ConfigError(name + ": constant delay must be >= 0");
            break;
        case Kind::Uniform:
            if (!finite_nonneg(a) || !std::isfinite(b) || b < a) {
                throw ConfigError(name + ": uniform delay needs 0 <= lo <= hi");
            }
            break;
        case Kind::Gaussian:
            if (!finite_nonneg(a) || !finite_nonneg(b)) {
                throw ConfigError(name + ": gaussian delay needs mean >= 0 and sd >= 0");
            }
            if (a == 0.0 && b == 0.0) break;
            if (b > 0.0 && a / b < -4.0) throw ConfigError(name + ": gaussian mass mostly below zero");
            break;
    }
}

double DelayDist::bound() const {
    switch (kind) {
        case Kind::Constant: return a;
        case Kind::Uniform: return b;
        case Kind::Gaussian: return a + 8.0 * b;
    }
    return a;
}

double DelayDist::sample(std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::Constant: return a;
        case Kind::Uniform: return std::uniform_real_distribution<double>(a, b)(rng);
        case Kind::Gaussian: {
            if (b == 0.0) return a;
            std::normal_distribution<double> n(a, b);
            for (;;) {
                const double x = n(rng);
                if (x >= 0.0) return x;
            }
        }
    }
    return a;
}

void DelayModel::validate() const {
    if (!finite_nonneg(propagation)) throw ConfigError("delay.propagation_seconds must be >= 0");
    interrupt_tx.validate("delay.interrupt_tx");
    interrupt_rx.validate("delay.interrupt_rx");
}

double sample_delay(const DelayModel& model, std::mt19937_64& rng) {
    const double tx = model.interrupt_tx.sample(rng);
    const double rx = model.interrupt_rx.sample(rng);
    return model.propagation + tx + rx;
}

void ScenarioConfig::validate() const {
    if (!std::isfinite(si_seconds) || si_seconds <= 0.0) throw ConfigError("si_seconds must be > 0");
    if (!std::isfinite(duration_seconds) || duration_seconds < 10.0 * si_seconds) {
        throw ConfigError("duration_seconds must be >= 10 * si_seconds");
    }
    if (duration_seconds / si_seconds > 1e7) throw ConfigError("duration_seconds / si_seconds exceeds 1e7 rounds");
    if (bundle_size < 1) throw ConfigError("bundle_size must be >= 1");
    if (bundle_size > 60000) throw ConfigError("bundle_size must be <= 60000");
    if (measurements_per_si > bundle_size) throw ConfigError("measurements_per_si must be <= bundle_size");
    if (hops < 1) throw ConfigError("hops must be >= 1");
    if (hops > 64) throw ConfigError("hops must be <= 64");
    if (!(trim_fraction >= 0.0 && trim_fraction < 1.0)) throw ConfigError("trim_fraction must be in [0, 1)");
    if (!(loss_probability >= 0.0 && loss_probability < 1.0)) {
        throw ConfigError("loss_probability must be in [0, 1)");
    }
    if (!finite_nonneg(skew_max_ppm) || skew_max_ppm >= 1e5) throw ConfigError("skew_max_ppm must be in [0, 1e5)");
    if (!finite_nonneg(offset_max_seconds) || offset_max_seconds > 1e6) {
        throw ConfigError("offset_max_seconds must be in [0, 1e6]");
    }
    if (!finite_nonneg(drift_rate_ppm_per_sqrt_s)) throw ConfigError("drift_rate_ppm_per_sqrt_s must be >= 0");
    if (!std::isfinite(drift_step_seconds) || drift_step_seconds <= 0.0) {
        throw ConfigError("drift_step_seconds must be > 0");
    }
    if (!sensor_clocks.empty()) {
        if (sensor_clocks.size() != hops) throw ConfigError("sensor_clocks must list exactly `hops` entries");
        for (const auto& c : sensor_clocks) {
            try {
                c.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("sensor_clocks: ") + e.what());
            }
            if (!finite_nonneg(c.offset)) throw ConfigError("sensor_clocks: offset_seconds must be >= 0");
        }
    }
    delay.validate();
    if (!finite_nonneg(processing_seconds)) throw ConfigError("processing_seconds must be >= 0");
    if (!finite_nonneg(forward_seconds)) throw ConfigError("forward_seconds must be >= 0");
    const double relay_depth = hops * (forward_seconds + delay.bound());
    if (measurements_per_si > 0) {
        const double phase = 0.5 * si_seconds / measurements_per_si;
        if (processing_seconds >= phase) {
            throw ConfigError("processing_seconds must be < 0.5 * si_seconds / measurements_per_si");
        }
        if (relay_depth >= phase) {
            throw ConfigError("beacon relay depth hops * (forward_seconds + delay bound) must be < "
                              "0.5 * si_seconds / measurements_per_si");
        }
    } else if (relay_depth + processing_seconds >= si_seconds) {
        throw ConfigError("beacon relay depth plus processing_seconds must be < si_seconds");
    }
}

std::uint32_t ScenarioConfig::rounds() const {
    return static_cast<std::uint32_t>(std::floor(duration_seconds / si_seconds + 1e-9));
}

std::size_t RunResult::count(MessageType kind) const {
    std::size_t n = 0;
    for (const auto& m : messages) n += (m.kind == kind);
    return n;
}

namespace {

enum class EventKind { BeaconDue, MeasurementDue, MsgArrival, ChildBeaconDue, ReportDue };

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::BeaconDue;
    NodeId node = 0;
    std::uint32_t round = 0;
    std::vector<std::uint8_t> bytes;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

std::size_t bundle_entries(const ReportResponse& r) {
    std::size_t n = r.bundle.size();
    for (const auto& rb : r.relayed_bundles) n += rb.bundle.size();
    return n;
}

class Engine {
public:
    explicit Engine(const ScenarioConfig& cfg)
        : cfg_(cfg),
          delay_rng_(stream(cfg.rng_seed, 2)),
          loss_rng_(stream(cfg.rng_seed, 3)),
          head_(cfg.scheme, topology(cfg.hops)),
          head_clock_(ClockParams{}) {
        auto clock_rng = stream(cfg.rng_seed, 1);
        std::uniform_real_distribution<double> skew(-cfg.skew_max_ppm * 1e-6, cfg.skew_max_ppm * 1e-6);
        std::uniform_real_distribution<double> offset(0.0, cfg.offset_max_seconds);
        for (unsigned h = 1; h <= cfg.hops; ++h) {
            ClockParams p;
            if (cfg.sensor_clocks.empty()) {
                p.skew = skew(clock_rng);
                p.offset = offset(clock_rng);
                p.drift_rate_std = cfg.drift_rate_ppm_per_sqrt_s;
                p.drift_step = cfg.drift_step_seconds;
                p.drift_seed = clock_rng();
            } else {
                p = cfg.sensor_clocks[h - 1];
            }
            clocks_.emplace_back(p);
            SensorSettings s;
            s.id = static_cast<NodeId>(h);
            s.upper = static_cast<NodeId>(h - 1);
            if (h < cfg.hops) s.child = static_cast<NodeId>(h + 1);
            s.scheme = cfg.scheme;
            s.bundle_size = cfg.bundle_size;
            s.measurements_per_round = cfg.measurements_per_si;
            sensors_.emplace_back(s);
            round_of_.push_back(std::nullopt);
            measured_.push_back(0);
        }
    }

    RunResult execute() {
        result_.rounds = cfg_.rounds();
        if (result_.rounds > 0) push(0.0, EventKind::BeaconDue, kHeadId, 0);
        double last = 0.0;
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.time < last) throw std::logic_error("simnet: event time went backwards");
            last = ev.time;
            dispatch(ev);
        }
        finish();
        return std::move(result_);
    }

private:
    static std::map<NodeId, NodeId> topology(unsigned hops) {
        std::map<NodeId, NodeId> parent;
        for (unsigned h = 1; h <= hops; ++h) parent[static_cast<NodeId>(h)] = static_cast<NodeId>(h - 1);
        return parent;
    }

    SensorNode& sensor(NodeId id) { return sensors_.at(id - 1u); }
    HardwareClock& clock(NodeId id) { return id == kHeadId ? head_clock_ : clocks_.at(id - 1u); }

    void push(double t, EventKind kind, NodeId node, std::uint32_t round, std::vector<std::uint8_t> bytes = {}) {
        queue_.push(Event{t, next_seq_++, kind, node, round, std::move(bytes)});
    }

    void send(double now, NodeId from, NodeId to, MessageType kind, std::uint32_t round, std::size_t entries,
              std::vector<std::uint8_t> bytes) {
        double arrival = now + sample_delay(cfg_.delay, delay_rng_);
        if (arrival <= now) arrival = std::nextafter(now, std::numeric_limits<double>::infinity());
        bool lost = false;
        if (cfg_.loss_probability > 0.0) {
            lost = std::uniform_real_distribution<double>(0.0, 1.0)(loss_rng_) < cfg_.loss_probability;
        }
        result_.messages.push_back(MessageRecord{kind, round, from, to, now, arrival, bytes.size(), entries, lost});
        if (!lost) push(arrival, EventKind::MsgArrival, to, round, std::move(bytes));
    }

    void send_report(double now, NodeId id) {
        auto& s = sensor(id);
        const ReportResponse rep = s.emit_report(clock(id).read(ReferenceTime{now}));
        send(now, id, s.settings().upper, MessageType::Report, rep.round, bundle_entries(rep), encode(rep));
    }

    void maybe_schedule_report(double now, NodeId id, double turnaround) {
        auto& s = sensor(id);
        if (s.report_due()) push(now + turnaround, EventKind::ReportDue, id, *round_of_[id - 1u]);
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EventKind::BeaconDue: on_beacon_due(ev); break;
            case EventKind::MeasurementDue: on_measurement(ev); break;
            case EventKind::MsgArrival: on_arrival(ev); break;
            case EventKind::ChildBeaconDue: {
                auto& s = sensor(ev.node);
                const auto b = s.make_child_beacon(ev.round, clock(ev.node).read(ReferenceTime{ev.time}));
                send(ev.time, ev.node, *s.settings().child, MessageType::Beacon, ev.round, 0, encode(b));
                break;
            }
            case EventKind::ReportDue: {
                auto& s = sensor(ev.node);
                if (s.response_outstanding() && round_of_[ev.node - 1u] == ev.round) send_report(ev.time, ev.node);
                break;
            }
        }
    }

    void on_beacon_due(const Event& ev) {
        const double si = cfg_.si_seconds;
        const auto b = head_.emit_beacon(ev.round, head_clock_.read(ReferenceTime{ev.time}));
        send(ev.time, kHeadId, 1, MessageType::Beacon, ev.round, 0, encode(b));
        const unsigned m = cfg_.measurements_per_si;
        for (unsigned i = 0; i < m; ++i) {
            const double t = ev.round * si + (i + 0.5) * si / m;
            for (unsigned h = 1; h <= cfg_.hops; ++h) push(t, EventKind::MeasurementDue, static_cast<NodeId>(h), ev.round);
        }
        if (ev.round + 1 < result_.rounds) push((ev.round + 1) * si, EventKind::BeaconDue, kHeadId, ev.round + 1);
    }

    void on_measurement(const Event& ev) {
        auto& s = sensor(ev.node);
        const auto m = s.record_measurement(clock(ev.node).read(ReferenceTime{ev.time}));
        ledger_[{ev.node, m.seq}] = ev.time;
        ++measured_[ev.node - 1u];
        if (round_of_[ev.node - 1u]) maybe_schedule_report(ev.time, ev.node, cfg_.processing_seconds);
    }

    void on_arrival(const Event& ev) {
        if (ev.node == kHeadId) {
            const auto rep = decode_report(ev.bytes);
            const Ticks rx = head_clock_.read(ReferenceTime{ev.time});
            std::vector<Estimate> estimates;
            try {
                estimates = head_.on_report(rep, rx);
            } catch (const ProtocolError&) {
                if (cfg_.loss_probability == 0.0) throw;
                ++result_.rejected_reports;
                return;
            }
            for (const auto& e : estimates) record_estimate(e);
            return;
        }
        auto& s = sensor(ev.node);
        const Ticks rx = clock(ev.node).read(ReferenceTime{ev.time});
        if (peek_type(ev.bytes) == MessageType::Beacon) {
            const auto b = decode_beacon(ev.bytes);
            const auto& cur = round_of_[ev.node - 1u];
            if (cur && b.round <= *cur) return;
            if (s.response_outstanding()) send_report(ev.time, ev.node);
            if (!s.on_beacon(b, rx)) return;
            round_of_[ev.node - 1u] = b.round;
            if (s.settings().child) push(ev.time + cfg_.forward_seconds, EventKind::ChildBeaconDue, ev.node, b.round);
            maybe_schedule_report(ev.time, ev.node, cfg_.processing_seconds);
        } else {
            const auto rep = decode_report(ev.bytes);
            try {
                s.on_child_report(rep, rx);
            } catch (const ProtocolError&) {
                if (cfg_.loss_probability == 0.0) throw;
                ++result_.rejected_reports;
                return;
            }
            if (round_of_[ev.node - 1u]) maybe_schedule_report(ev.time, ev.node, cfg_.forward_seconds);
        }
    }

    void record_estimate(const Estimate& e) {
        const auto it = ledger_.find({e.node, e.measurement.seq});
        if (it == ledger_.end()) throw std::logic_error("simnet: estimate for unknown or repeated measurement");
        ErrorSample s;
        s.node = e.node;
        s.hop = e.node;
        s.seq = e.measurement.seq;
        s.event_ref_time = ReferenceTime{it->second};
        s.est_ref_time = e.estimate;
        s.error = e.estimate.seconds - it->second;
        result_.samples.push_back(s);
        ledger_.erase(it);
    }

    void finish() {
        result_.undelivered = ledger_.size();
        result_.head_fp_ops = head_.fpu().ops();
        for (unsigned h = 1; h <= cfg_.hops; ++h) {
            const auto& s = sensors_[h - 1];
            SensorDiagnostics d;
            d.id = s.id();
            d.hop = h;
            d.clock = clocks_[h - 1].params();
            d.final_skew = clocks_[h - 1].current_skew();
            const auto a = s.raw_anchor_pair();
            const auto l = s.raw_latest_pair();
            if (a && l && l->t1 > a->t1) d.ratio_full_final = cr_ratio(a->t1, a->t2, l->t1, l->t2, PrecisionMode::Double);
            d.ratio_sensor_final = s.ratio_est();
            d.precision_loss = compute_precision_loss(d.ratio_full_final).epsilon;
            d.fp_ops = s.fpu().ops();
            d.measurements = measured_[h - 1];
            result_.sensors.push_back(d);
        }
    }

    const ScenarioConfig& cfg_;
    std::mt19937_64 delay_rng_;
    std::mt19937_64 loss_rng_;
    HeadNode head_;
    HardwareClock head_clock_;
    std::vector<HardwareClock> clocks_;
    std::vector<SensorNode> sensors_;
    std::vector<std::optional<std::uint32_t>> round_of_;
    std::vector<std::size_t> measured_;
    std::map<std::pair<NodeId, std::uint32_t>, double> ledger_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    RunResult result_;
};

}  // namespace

RunResult run(const ScenarioConfig& config) {
    config.validate();
    Engine engine(config);
    return engine.execute();
}

}  // namespace tsync
