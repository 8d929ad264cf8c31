#include <algorithm>
#include <cmath>
#include <map>

#include "sizzle/pulse.hpp"

namespace sizzle {

void validate(const Envelope& e)
{
    if (!(e.duration > 0.0)) throw ValidationError("envelope duration must be > 0");
    if (!(e.rise_fall_sigmas >= 0.0)) throw ValidationError("rise_fall_sigmas must be >= 0");
    if (e.rise_fall_sigmas > 0.0 && !(e.sigma > 0.0)) throw ValidationError("sigma must be > 0");
    if (e.duration < 2.0 * e.rise_fall_sigmas * e.sigma - 1e-12)
        throw ValidationError("duration shorter than the Gaussian rise and fall");
    if (!std::isfinite(e.amplitude) || !std::isfinite(e.drag_beta) || !std::isfinite(e.skew_gamma))
        throw ValidationError("envelope parameters must be finite");
}

namespace {

// (value, slope) of the unreversed flat-top Gaussian at time t.
std::pair<double, double> flat_top(const Envelope& e, double t)
{
    const double edge = e.rise_fall_sigmas * e.sigma;
    if (edge <= 0.0) return {e.amplitude, 0.0};
    const double s2 = e.sigma * e.sigma;
    if (t < edge) {
        const double x = t - edge;
        const double g = e.amplitude * std::exp(-x * x / (2.0 * s2));
        return {g, -g * x / s2};
    }
    if (t > e.duration - edge) {
        const double x = t - (e.duration - edge);
        const double g = e.amplitude * std::exp(-x * x / (2.0 * s2));
        return {g, -g * x / s2};
    }
    return {e.amplitude, 0.0};
}

}  // namespace

double envelope_slope(const Envelope& e, double t)
{
    return flat_top(e, t).second;
}

EnvelopeSample sample_envelope(const Envelope& e, double t)
{
    if (t < -1e-12 || t > e.duration + 1e-12) throw ValidationError("sample time outside the envelope");
    const double tt = e.time_reversed ? e.duration - t : t;
    auto [value, slope] = flat_top(e, tt);
    EnvelopeSample s;
    s.in_phase = value;
    if (e.kind == EnvelopeKind::GaussianDerivativeQuadrature)
        s.quadrature = e.drag_beta * slope + e.skew_gamma * std::abs(slope);
    return s;
}

PulseSchedule& PulseSchedule::play(const Envelope& e, double carrier, double phase, int target)
{
    Play p;
    p.envelope = e;
    p.carrier_frequency = carrier;
    p.carrier_phase = phase;
    p.target = target;
    items.emplace_back(p);
    return *this;
}

PulseSchedule& PulseSchedule::frame_change(double angle, int target)
{
    items.emplace_back(FrameChange{angle, target, std::nullopt});
    return *this;
}

PulseSchedule& PulseSchedule::barrier()
{
    items.emplace_back(Barrier{});
    return *this;
}

Timeline resolve(const PulseSchedule& schedule)
{
    Timeline tl;
    std::map<int, double> clock;
    double floor = 0.0;  // last barrier
    double horizon = 0.0;
    auto now = [&](int target) {
        auto it = clock.find(target);
        return std::max(floor, it == clock.end() ? 0.0 : it->second);
    };
    for (const auto& item : schedule.items) {
        if (const auto* p = std::get_if<Play>(&item)) {
            validate(p->envelope);
            const double start = p->start.value_or(now(p->target));
            if (start < 0.0) throw ValidationError("play starts before time zero");
            clock[p->target] = std::max(now(p->target), start + p->envelope.duration);
            horizon = std::max(horizon, start + p->envelope.duration);
            tl.plays.push_back({*p, start});
        } else if (const auto* f = std::get_if<FrameChange>(&item)) {
            const double t = f->time.value_or(now(f->target));
            horizon = std::max(horizon, t);
            tl.frame_changes.push_back({*f, t});
        } else {
            floor = horizon;
        }
    }
    tl.duration = std::max(horizon, schedule.total_duration);

    std::vector<const TimedPlay*> sorted;
    for (const auto& p : tl.plays) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
        return a->play.target != b->play.target ? a->play.target < b->play.target : a->start < b->start;
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->play.target == sorted[i - 1]->play.target &&
            sorted[i]->start < sorted[i - 1]->start + sorted[i - 1]->play.envelope.duration - 1e-9)
            throw ValidationError("overlapping plays on target " + std::to_string(sorted[i]->play.target));
    return tl;
}

PulseSchedule inverse(const PulseSchedule& schedule)
{
    const Timeline tl = resolve(schedule);
    const double T = tl.duration;
    PulseSchedule out;
    out.total_duration = T;
    // Walk the original items backwards so simultaneous frame changes also reverse.
    std::size_t ip = tl.plays.size(), ifc = tl.frame_changes.size();
    for (auto it = schedule.items.rbegin(); it != schedule.items.rend(); ++it) {
        if (std::holds_alternative<Play>(*it)) {
            const auto& tp = tl.plays[--ip];
            Play p = tp.play;
            p.envelope.time_reversed = !p.envelope.time_reversed;
            p.carrier_phase = wrap_phase(p.carrier_phase + kPi);
            p.start = T - (tp.start + p.envelope.duration);
            out.items.emplace_back(p);
        } else if (std::holds_alternative<FrameChange>(*it)) {
            const auto& tf = tl.frame_changes[--ifc];
            out.items.emplace_back(FrameChange{-tf.change.angle, tf.change.target, T - tf.time});
        }
    }
    return out;
}

}  // namespace sizzle
