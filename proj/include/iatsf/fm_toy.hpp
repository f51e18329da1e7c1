#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iatsf/errors.hpp"
#include "iatsf/events.hpp"
#include "iatsf/rng.hpp"

namespace iatsf {

/// Single-channel piecewise sinusoid whose cycle frequency jumps at random
/// change points, each announced by captions ahead of time.
struct FMToyConfig {
    size_t n_steps = 30000;
    std::vector<double> frequency_set = {0.05, 0.1, 0.2};
    size_t segment_min = 48;   // steps
    size_t segment_max = 96;   // steps, inclusive
    double amplitude = 1.0;
    size_t pre_captions = 10;  // announcement window before each change
    size_t post_captions = 5;  // confirmation window after each change
    uint64_t seed = 1;

    void validate() const;
};

struct FmChange {
    size_t step;       // first step at which the new frequency is in effect
    double frequency;  // cycles per step
};

struct FmTrajectory {
    std::vector<double> values;       // [T], amplitude * sin(phase)
    std::vector<double> phases;       // [T], phase advances by 2*pi*f per step
    std::vector<double> frequencies;  // [T], frequency in effect at each step
    std::vector<FmChange> changes;    // sorted, excludes the t=0 segment start
    double initial_frequency = 0.0;
    double amplitude = 1.0;
    std::vector<InterventionEvent> events;  // one per step, sorted by timestamp
};

FmTrajectory generate_fm_toy(const FMToyConfig& config);

// Caption templates.
std::string fm_caption_change(double frequency, size_t steps_ahead);
std::string fm_caption_steady(double frequency);
std::string fm_caption_quiet();

struct FmAnnouncement {
    double frequency;
    size_t steps_ahead;
};
/// Parses a change announcement caption; nullopt for steady/quiet captions.
std::optional<FmAnnouncement> parse_fm_caption(const std::string& text);

/// Renders the horizon [t_start, t_start + horizon) continuing the phase of
/// step t_start - 1 under an explicit frequency schedule: base_frequency is
/// in effect from t_start until overridden by `changes` (sorted by step).
/// Passing the trajectory's own schedule reproduces its values exactly.
std::vector<double> render_fm_future(const FmTrajectory& traj, size_t t_start, size_t horizon,
                                     double base_frequency, const std::vector<FmChange>& changes);

/// The toy's channel description text.
std::string fm_channel_descriptor_text();

}  // namespace iatsf
