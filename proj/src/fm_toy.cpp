#include "iatsf/fm_toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace iatsf {

namespace {

std::string format_frequency(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", f);
    return buf;
}

}  // namespace

void FMToyConfig::validate() const {
    if (n_steps == 0) throw ValidationError("FMToyConfig: n_steps must be positive");
    if (frequency_set.empty()) throw ValidationError("FMToyConfig: frequency_set empty");
    for (double f : frequency_set) {
        if (f <= 0.0) throw ValidationError("FMToyConfig: frequencies must be positive");
    }
    if (segment_min > segment_max) throw ValidationError("FMToyConfig: segment range inverted");
    if (segment_min <= pre_captions) {
        throw ValidationError("FMToyConfig: segment_min must exceed pre_captions");
    }
    if (amplitude <= 0.0) throw ValidationError("FMToyConfig: amplitude must be positive");
}

std::string fm_caption_change(double frequency, size_t steps_ahead) {
    return "Channel 1 will change to frequency " + format_frequency(frequency) + " in " +
           std::to_string(steps_ahead) + " timesteps.";
}

std::string fm_caption_steady(double frequency) {
    return "Channel 1 will keep steady with frequency of " + format_frequency(frequency) + ".";
}

std::string fm_caption_quiet() { return "The waveform will go steady."; }

std::optional<FmAnnouncement> parse_fm_caption(const std::string& text) {
    const std::string prefix = "Channel 1 will change to frequency ";
    if (text.rfind(prefix, 0) != 0) return std::nullopt;
    double freq = 0.0;
    unsigned long steps = 0;
    if (std::sscanf(text.c_str() + prefix.size(), "%lf in %lu timesteps.", &freq, &steps) != 2) {
        return std::nullopt;
    }
    return FmAnnouncement{freq, static_cast<size_t>(steps)};
}

FmTrajectory generate_fm_toy(const FMToyConfig& config) {
    config.validate();
    Rng rng(config.seed);
    Rng rng_seg = rng.split(1);
    Rng rng_freq = rng.split(2);
    Rng rng_phase = rng.split(3);

    FmTrajectory traj;
    const size_t T = config.n_steps;
    traj.values.resize(T);
    traj.phases.resize(T);
    traj.frequencies.resize(T);
    traj.amplitude = config.amplitude;

    // Frequency schedule: segments of uniform random integer length, each
    // switching to a different randomly chosen frequency.
    size_t freq_idx = rng_freq.uniform_int(config.frequency_set.size());
    traj.initial_frequency = config.frequency_set[freq_idx];
    size_t next_change = config.segment_min +
                         rng_seg.uniform_int(config.segment_max - config.segment_min + 1);
    double freq = traj.initial_frequency;
    for (size_t t = 0; t < T; ++t) {
        if (t == next_change) {
            if (config.frequency_set.size() > 1) {
                size_t offset = 1 + rng_freq.uniform_int(config.frequency_set.size() - 1);
                freq_idx = (freq_idx + offset) % config.frequency_set.size();
            }
            freq = config.frequency_set[freq_idx];
            traj.changes.push_back({t, freq});
            next_change = t + config.segment_min +
                          rng_seg.uniform_int(config.segment_max - config.segment_min + 1);
        }
        traj.frequencies[t] = freq;
    }

    // Phase-continuous rendering. The phase within each segment is computed
    // in closed form from the segment anchor (wrapped mod 2*pi at each change
    // point) so long series accumulate no drift.
    double anchor_phase = 2.0 * M_PI * rng_phase.uniform();  // phase of virtual step -1
    double anchor_step = -1.0;
    size_t ci = 0;
    for (size_t t = 0; t < T; ++t) {
        if (ci < traj.changes.size() && traj.changes[ci].step == t) {
            anchor_phase = std::fmod(traj.phases[t - 1], 2.0 * M_PI);
            anchor_step = static_cast<double>(t) - 1.0;
            ++ci;
        }
        traj.phases[t] =
            anchor_phase + 2.0 * M_PI * traj.frequencies[t] * (static_cast<double>(t) - anchor_step);
        traj.values[t] = config.amplitude * std::sin(traj.phases[t]);
    }

    // One caption per step. Announcements take precedence over confirmations,
    // which cannot collide anyway because segment_min > pre_captions.
    traj.events.reserve(T);
    size_t next_idx = 0;   // first change strictly after t
    size_t last_idx = 0;   // number of changes at or before t
    for (size_t t = 0; t < T; ++t) {
        while (next_idx < traj.changes.size() && traj.changes[next_idx].step <= t) ++next_idx;
        last_idx = next_idx;
        std::string text;
        if (next_idx < traj.changes.size() &&
            traj.changes[next_idx].step - t <= config.pre_captions) {
            const FmChange& c = traj.changes[next_idx];
            text = fm_caption_change(c.frequency, c.step - t);
        } else if (last_idx > 0 && t - traj.changes[last_idx - 1].step < config.post_captions) {
            text = fm_caption_steady(traj.changes[last_idx - 1].frequency);
        } else {
            text = fm_caption_quiet();
        }
        traj.events.push_back({static_cast<int64_t>(t), std::move(text), std::nullopt});
    }
    return traj;
}

std::vector<double> render_fm_future(const FmTrajectory& traj, size_t t_start, size_t horizon,
                                     double base_frequency, const std::vector<FmChange>& changes) {
    if (t_start == 0 || t_start + horizon > traj.values.size()) {
        throw ValidationError("render_fm_future: window out of range");
    }
    std::vector<double> out(horizon);
    double anchor_phase = traj.phases[t_start - 1];
    double anchor_step = static_cast<double>(t_start) - 1.0;
    double freq = base_frequency;
    size_t ci = 0;
    double phase = anchor_phase;
    for (size_t i = 0; i < horizon; ++i) {
        const size_t t = t_start + i;
        while (ci < changes.size() && changes[ci].step <= t) {
            anchor_phase = phase;
            anchor_step = static_cast<double>(t) - 1.0;
            freq = changes[ci++].frequency;
        }
        phase = anchor_phase + 2.0 * M_PI * freq * (static_cast<double>(t) - anchor_step);
        out[i] = traj.amplitude * std::sin(phase);
    }
    return out;
}

std::string fm_channel_descriptor_text() {
    return "Channel 1. A sinusoidal waveform whose cycle frequency changes at externally "
           "scheduled intervention points.";
}

}  // namespace iatsf
