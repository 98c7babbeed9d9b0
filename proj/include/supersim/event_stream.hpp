#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "supersim/model.hpp"
#include "supersim/rng.hpp"

namespace supersim {

enum class EventKind : std::uint8_t { Arrival, Departure };

/// Owning event. For arrivals `queues` holds the d ordered choices; for
/// departures it holds the single selected queue. Indices are 0-based.
struct Event {
    EventKind kind = EventKind::Arrival;
    double time = 0.0;
    std::vector<std::uint32_t> queues;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Non-owning view into a cursor's current event; valid until the next call.
struct EventView {
    EventKind kind;
    double time;
    std::span<const std::uint32_t> queues;

    Event to_event() const { return Event{kind, time, {queues.begin(), queues.end()}}; }
};

class InsufficientStream : public std::runtime_error {
public:
    InsufficientStream(double requested, double horizon)
        : std::runtime_error("requested time " + std::to_string(requested) +
                             " exceeds stream horizon " + std::to_string(horizon)) {}
};

/// Anything that yields time-ordered events up to a horizon.
template <typename S>
concept EventSource = requires(S s, const S cs) {
    { cs.peek_time() } -> std::convertible_to<double>;
    { cs.horizon() } -> std::convertible_to<double>;
    { s.next() } -> std::same_as<EventView>;
};

// Substream labels. Changing these changes every generated stream.
inline constexpr std::string_view kArrivalTimesLabel = "arrival-times";
inline constexpr std::string_view kChoicesLabel = "choices";
inline constexpr std::string_view kDepartureTimesLabel = "departure-times";
inline constexpr std::string_view kSelectionsLabel = "selections";

/// Description of the four independent processes driving the model: arrival
/// times (rate lambda*n), arrival choice lists, departure times (rate n) and
/// departure selections. Each process reads its own xoshiro256** substream
/// seeded by derive_seed(seed, label), so the k-th arrival's choices do not
/// depend on how arrivals and departures interleave.
struct EventStream {
    ModelParams params;
    std::uint64_t seed = 0;
    double horizon = std::numeric_limits<double>::infinity();
};

class StreamCursor {
public:
    explicit StreamCursor(const EventStream& stream)
        : params_(stream.params),
          horizon_(stream.horizon),
          arrival_times_(derive_seed(stream.seed, kArrivalTimesLabel)),
          choices_(derive_seed(stream.seed, kChoicesLabel)),
          departure_times_(derive_seed(stream.seed, kDepartureTimesLabel)),
          selections_(derive_seed(stream.seed, kSelectionsLabel)),
          buffer_(stream.params.d) {
        params_.validate();
        if (!(horizon_ >= 0.0)) throw std::invalid_argument("stream horizon must be >= 0");
        next_arrival_ = arrival_times_.exponential(params_.arrival_rate());
        next_departure_ = departure_times_.exponential(params_.departure_rate());
        resolve_collision();
    }

    double horizon() const noexcept { return horizon_; }

    /// Time of the next event, or +inf when it lies beyond the horizon.
    double peek_time() const noexcept {
        const double t = std::min(next_arrival_, next_departure_);
        return t <= horizon_ ? t : std::numeric_limits<double>::infinity();
    }

    EventView next() {
        if (next_arrival_ < next_departure_) {
            const double t = next_arrival_;
            for (std::uint32_t i = 0; i < params_.d; ++i) buffer_[i] = choices_.below(params_.n);
            next_arrival_ = bump(t, t + arrival_times_.exponential(params_.arrival_rate()));
            resolve_collision();
            ++arrivals_;
            return {EventKind::Arrival, t, std::span<const std::uint32_t>(buffer_.data(), params_.d)};
        }
        const double t = next_departure_;
        buffer_[0] = selections_.below(params_.n);
        next_departure_ = bump(t, t + departure_times_.exponential(params_.departure_rate()));
        resolve_collision();
        ++departures_;
        return {EventKind::Departure, t, std::span<const std::uint32_t>(buffer_.data(), 1)};
    }

    std::uint64_t arrivals_emitted() const noexcept { return arrivals_; }
    std::uint64_t departures_emitted() const noexcept { return departures_; }

private:
    // A zero increment would repeat a time within one process.
    static double bump(double prev, double t) {
        if (t > prev) return t;
        std::cerr << "supersim: warning: repeated event time " << prev << ", perturbed by one ulp\n";
        return std::nextafter(prev, std::numeric_limits<double>::infinity());
    }

    // Equal arrival and departure times: the departure process moves one ulp later.
    void resolve_collision() {
        if (next_arrival_ == next_departure_) {
            std::cerr << "supersim: warning: arrival/departure time collision at " << next_arrival_
                      << ", departure perturbed by one ulp\n";
            next_departure_ = std::nextafter(next_departure_, std::numeric_limits<double>::infinity());
        }
    }

    ModelParams params_;
    double horizon_;
    Xoshiro256 arrival_times_;
    Xoshiro256 choices_;
    Xoshiro256 departure_times_;
    Xoshiro256 selections_;
    std::vector<std::uint32_t> buffer_;
    double next_arrival_ = 0.0;
    double next_departure_ = 0.0;
    std::uint64_t arrivals_ = 0;
    std::uint64_t departures_ = 0;
};

/// Fixed, explicitly listed events (hand-built tests, parsed dumps).
class RecordedCursor {
public:
    explicit RecordedCursor(std::span<const Event> events,
                            double horizon = std::numeric_limits<double>::infinity())
        : events_(events), horizon_(horizon) {
        for (std::size_t i = 1; i < events_.size(); ++i)
            if (!(events_[i].time > events_[i - 1].time))
                throw std::invalid_argument("recorded events must have strictly increasing times");
        for (const auto& e : events_) {
            if (e.queues.empty()) throw std::invalid_argument("recorded event without queue indices");
            if (e.kind == EventKind::Departure && e.queues.size() != 1)
                throw std::invalid_argument("departure must select exactly one queue");
        }
    }

    double horizon() const noexcept { return horizon_; }

    double peek_time() const noexcept {
        if (pos_ >= events_.size() || events_[pos_].time > horizon_)
            return std::numeric_limits<double>::infinity();
        return events_[pos_].time;
    }

    EventView next() {
        const Event& e = events_[pos_++];
        return {e.kind, e.time, e.queues};
    }

private:
    std::span<const Event> events_;
    double horizon_;
    std::size_t pos_ = 0;
};

static_assert(EventSource<StreamCursor>);
static_assert(EventSource<RecordedCursor>);

/// Applies one event. Returns true when the state changed.
inline bool apply_event(QueueState& state, const EventView& e) {
    if (e.kind == EventKind::Arrival) {
        apply_arrival(state, e.queues);
        return true;
    }
    return apply_departure(state, e.queues[0]);
}

/// Applies every event with time <= t, calling visit(event, changed) after each.
template <EventSource Source, typename Visitor>
void advance(QueueState& state, Source& source, double t, Visitor&& visit) {
    if (t > source.horizon()) throw InsufficientStream(t, source.horizon());
    while (source.peek_time() <= t) {
        const EventView e = source.next();
        const bool changed = apply_event(state, e);
        visit(e, changed);
    }
}

template <EventSource Source>
void advance(QueueState& state, Source& source, double t) {
    advance(state, source, t, [](const EventView&, bool) {});
}

/// The state at time t started from x0 and driven by the stream.
inline QueueState evolve(QueueState x0, const EventStream& stream, double t) {
    if (t < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
    StreamCursor cursor(stream);
    if (x0.size() != stream.params.n) throw std::invalid_argument("evolve: state size differs from n");
    advance(x0, cursor, t);
    return x0;
}

inline QueueState evolve(QueueState x0, std::span<const Event> events, double t,
                         double horizon = std::numeric_limits<double>::infinity()) {
    if (t < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
    RecordedCursor cursor(events, horizon);
    advance(x0, cursor, t);
    return x0;
}

// Text format, one event per line with 1-based queue indices:
//   A <time> <c1> ... <cd>
//   D <time> <sel>
// Times are printed with 17 significant digits so they parse back exactly.

inline void write_event(std::ostream& os, const EventView& e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", e.time);
    os << (e.kind == EventKind::Arrival ? 'A' : 'D') << ' ' << buf;
    for (auto q : e.queues) os << ' ' << (q + 1);
    os << '\n';
}

/// Writes every event of the stream with time <= until.
inline std::uint64_t dump_events(std::ostream& os, const EventStream& stream, double until) {
    StreamCursor cursor(stream);
    std::uint64_t count = 0;
    while (cursor.peek_time() <= until) {
        write_event(os, cursor.next());
        ++count;
    }
    return count;
}

inline std::vector<Event> parse_events(std::istream& is) {
    std::vector<Event> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        char tag = 0;
        Event e;
        if (!(ls >> tag >> e.time) || (tag != 'A' && tag != 'D'))
            throw std::invalid_argument("malformed event on line " + std::to_string(lineno));
        e.kind = tag == 'A' ? EventKind::Arrival : EventKind::Departure;
        long long q = 0;
        while (ls >> q) {
            if (q < 1) throw std::invalid_argument("queue index must be >= 1 on line " + std::to_string(lineno));
            e.queues.push_back(static_cast<std::uint32_t>(q - 1));
        }
        if (e.queues.empty() || (e.kind == EventKind::Departure && e.queues.size() != 1))
            throw std::invalid_argument("wrong number of queue indices on line " + std::to_string(lineno));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace supersim
