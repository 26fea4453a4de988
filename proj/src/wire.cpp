#include "tsync/wire.hpp"

#include <limits>
#include <string>

namespace tsync {

std::string_view to_string(SchemeMode scheme) {
    return scheme == SchemeMode::Ahts ? "ahts" : "ee-ascfr";
}

SchemeMode parse_scheme(std::string_view text) {
    if (text == "ahts" || text == "AHTS") return SchemeMode::Ahts;
    if (text == "ee-ascfr" || text == "ee_ascfr" || text == "eeascfr" || text == "EE-ASCFR") {
        return SchemeMode::EeAscfr;
    }
    throw std::invalid_argument("unknown scheme '" + std::string(text) + "' (expected ahts or ee-ascfr)");
}

namespace {

constexpr std::uint8_t kHasAnchor = 0x01;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void ticks(Ticks t) { u64(t.value); }
    void count(std::size_t n) {
        if (n > std::numeric_limits<std::uint16_t>::max()) {
            throw WireError("list too long for a u16 count");
        }
        u16(static_cast<std::uint16_t>(n));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    Ticks ticks() { return Ticks{u64()}; }
    void finish() const {
        if (pos_ != in_.size()) throw WireError("trailing bytes after message");
    }

private:
    std::uint64_t get(std::size_t bytes) {
        if (pos_ + bytes > in_.size()) throw WireError("truncated message");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += bytes;
        return v;
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_anchor(Writer& w, const std::optional<Anchor>& anchor) {
    w.u8(anchor ? kHasAnchor : 0);
    if (anchor) {
        w.u32(anchor->round);
        w.ticks(anchor->t2_zero);
    }
}

std::optional<Anchor> read_anchor(Reader& r) {
    const auto flags = r.u8();
    if ((flags & ~kHasAnchor) != 0) throw WireError("unknown flag bits");
    if ((flags & kHasAnchor) == 0) return std::nullopt;
    Anchor a;
    a.round = r.u32();
    a.t2_zero = r.ticks();
    return a;
}

void write_bundle(Writer& w, const std::vector<Measurement>& bundle) {
    w.count(bundle.size());
    for (const auto& m : bundle) {
        w.u32(m.seq);
        w.ticks(m.t_m);
    }
}

std::vector<Measurement> read_bundle(Reader& r) {
    std::vector<Measurement> bundle(r.u16());
    for (auto& m : bundle) {
        m.seq = r.u32();
        m.t_m = r.ticks();
    }
    return bundle;
}

void expect_type(Reader& r, MessageType type) {
    if (r.u8() != static_cast<std::uint8_t>(type)) throw WireError("unexpected message type");
}

}  // namespace

std::vector<std::uint8_t> encode(const BeaconRequest& beacon) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(MessageType::Beacon));
    w.u16(beacon.origin);
    w.u32(beacon.round);
    w.ticks(beacon.t1);
    return w.take();
}

std::vector<std::uint8_t> encode(const ReportResponse& report) {
    Writer w;
    w.u8(static_cast<std::uint8_t>(MessageType::Report));
    w.u16(report.origin);
    w.u32(report.round);
    w.ticks(report.t2);
    w.ticks(report.t3);
    write_anchor(w, report.anchor);
    write_bundle(w, report.bundle);
    w.count(report.relayed_sync.size());
    for (const auto& rec : report.relayed_sync) {
        w.u32(rec.round);
        w.u16(rec.upper);
        w.u16(rec.lower);
        w.ticks(rec.t1);
        w.ticks(rec.t2);
        w.ticks(rec.t3);
        w.ticks(rec.t4);
    }
    w.count(report.relayed_bundles.size());
    for (const auto& rb : report.relayed_bundles) {
        w.u16(rb.origin);
        write_anchor(w, rb.anchor);
        write_bundle(w, rb.bundle);
    }
    return w.take();
}

MessageType peek_type(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw WireError("empty message");
    switch (bytes[0]) {
        case static_cast<std::uint8_t>(MessageType::Beacon): return MessageType::Beacon;
        case static_cast<std::uint8_t>(MessageType::Report): return MessageType::Report;
        default: throw WireError("unknown message type byte");
    }
}

BeaconRequest decode_beacon(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    expect_type(r, MessageType::Beacon);
    BeaconRequest b;
    b.origin = r.u16();
    b.round = r.u32();
    b.t1 = r.ticks();
    r.finish();
    return b;
}

ReportResponse decode_report(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    expect_type(r, MessageType::Report);
    ReportResponse rep;
    rep.origin = r.u16();
    rep.round = r.u32();
    rep.t2 = r.ticks();
    rep.t3 = r.ticks();
    rep.anchor = read_anchor(r);
    rep.bundle = read_bundle(r);
    rep.relayed_sync.resize(r.u16());
    for (auto& rec : rep.relayed_sync) {
        rec.round = r.u32();
        rec.upper = r.u16();
        rec.lower = r.u16();
        rec.t1 = r.ticks();
        rec.t2 = r.ticks();
        rec.t3 = r.ticks();
        rec.t4 = r.ticks();
    }
    rep.relayed_bundles.resize(r.u16());
    for (auto& rb : rep.relayed_bundles) {
        rb.origin = r.u16();
        rb.anchor = read_anchor(r);
        rb.bundle = read_bundle(r);
    }
    r.finish();
    return rep;
}

}  // namespace tsync
